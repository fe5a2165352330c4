#pragma once

// Reference samplers and chain diagnostics.

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cayley/cayley.hpp"
#include "cayley/rng.hpp"

namespace cayley {

/// A Haar frame together with the Gaussian matrix it was orthogonalized from.
struct HaarDraw {
  StiefelPoint q;
  Matrix z;
};

/// Uniform draw on V(k,p): Gram-Schmidt on a p x k standard normal matrix,
/// with strictly positive normalizers.
StiefelPoint haar_stiefel(Index p, Index k, Rng& rng);
HaarDraw haar_stiefel_coupled(Index p, Index k, Rng& rng);

/// (vech_strict(M1 - M1^T), vec(M2)) for M = [M1; M2] with M1 square.
Vector approx_inverse_cayley(const Matrix& m);

/// Multiplies the b block by sqrt(p/2) and the A block by sqrt(p).
Vector scale_matrix_apply(const Vector& v, Index p, Index k);

struct CouplingResult {
  Index p = 0;
  Index k = 0;
  /// max |phi_scaled - z|
  double epsilon = 0.0;
  Vector phi_scaled;
  Vector z;
};

/// Couples the scaled Cayley coordinates of a Haar frame with a vector of
/// independent standard normals built from the same Gaussian matrix.
CouplingResult coupling_epsilon(Index p, Index k, Rng& rng);

/// Columnwise angles arccos(|q_j . v_j| / (|q_j| |v_j|)), in [0, pi/2].
Vector principal_angles(const Matrix& q, const Matrix& v);

double normal_cdf(double x);

/// sup_x |F_n(x) - F(x)|.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);
/// sup_x |F_n(x) - G_m(x)|.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

struct ChainDiagnostics {
  std::vector<double> acf;
  double ess = 0.0;
  std::optional<std::pair<double, std::string>> ks;
  std::vector<Vector> principal_angles;
};

/// Autocorrelations up to max_lag and ESS = n / (1 + 2 sum rho_h), the sum
/// running over positive lags until the first negative autocorrelation.
ChainDiagnostics acf_ess(const std::vector<double>& samples, std::size_t max_lag);

struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::size_t> counts;
  /// Samples outside [lo, hi].
  std::size_t outside = 0;

  std::size_t total() const;
  double bin_width() const { return (hi - lo) / static_cast<double>(counts.size()); }
  double bin_center(std::size_t i) const { return lo + (static_cast<double>(i) + 0.5) * bin_width(); }
};

/// Equal-width bins on [lo, hi]; the right edge belongs to the last bin.
Histogram histogram(const std::vector<double>& samples, double lo, double hi, std::size_t bins);

/// Half the L1 distance between the normalized bin frequencies.
double total_variation(const Histogram& a, const Histogram& b);

double median(std::vector<double> v);
/// Linear-interpolation quantile, q in [0, 1].
double quantile(std::vector<double> v, double q);

}  // namespace cayley
