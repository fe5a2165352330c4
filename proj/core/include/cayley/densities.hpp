#pragma once

// Target densities on V(k,p) and V+(k,p), in log scale up to an additive
// constant, and their pullbacks to Cayley coordinates:
//     log pi(phi) = log g(C(phi)) + log J(phi).

#include <functional>
#include <string>

#include "cayley/cayley.hpp"

namespace cayley {

enum class Manifold { kStiefel, kGrassmann };

const char* manifold_name(Manifold m);
Manifold parse_manifold(const std::string& name);

struct LogDensity {
  std::string name;
  Manifold manifold = Manifold::kStiefel;
  /// log g(Q) for a p x k frame Q.
  std::function<double(const Matrix&)> log_g;
  /// Euclidean gradient d log g / dQ (p x k); empty when unavailable.
  std::function<Matrix(const Matrix&)> gradient;

  double operator()(const Matrix& q) const { return log_g(q); }
  bool has_gradient() const { return static_cast<bool>(gradient); }
};

/// g = 1, the uniform (Haar) distribution.
LogDensity uniform_log_density(Manifold manifold = Manifold::kStiefel);

/// Matrix Bingham posterior of the spiked covariance model under a uniform
/// prior: log g(Q) = tr(M Q^T S Q), M = (Lambda^{-1} + I)^{-1} / (2 sigma^2).
class BinghamParams {
 public:
  /// S must be symmetric PSD; lambda strictly decreasing and positive.
  BinghamParams(Matrix scatter, double sigma2, Vector lambda);
  /// S = Y^T Y for an n x p data matrix.
  static BinghamParams from_data(const Matrix& y, double sigma2, Vector lambda);

  const Matrix& scatter() const { return s_; }
  double sigma2() const { return sigma2_; }
  const Vector& lambda() const { return lambda_; }
  /// Diagonal of M: lambda_j / (1 + lambda_j) / (2 sigma^2).
  const Vector& weights() const { return m_; }

  /// Top-k eigenvectors of S, ordered by decreasing eigenvalue.
  Matrix mode_frame() const;

 private:
  Matrix s_;
  double sigma2_;
  Vector lambda_;
  Vector m_;
};

LogDensity bingham_log_density(const BinghamParams& params,
                               Manifold manifold = Manifold::kStiefel);

/// log g(C(phi)) + log J(phi) using the block Jacobian.
double pullback_log_density(const LogDensity& g, const StiefelCoords& phi);
/// Returns -infinity when psi is outside the Grassmann domain.
double pullback_log_density(const LogDensity& g, const GrassmannCoords& psi);

/// Marginal law of one entry of a uniformly distributed frame in V(k,p).
/// Each column of such a frame is uniform on the unit sphere in R^p, so an
/// entry x has density proportional to (1 - x^2)^{(p-3)/2} on (-1, 1)
/// (Eaton 1989, Prop. 7.3 with a 1 x 1 block); the normalizing constant is
/// computed by quadrature.
class EntryMarginal {
 public:
  EntryMarginal(Index p, Index k);

  double log_pdf(double x) const;
  double pdf(double x) const;
  double cdf(double x) const;
  double exponent() const { return exponent_; }
  double log_normalizer() const { return log_norm_; }

 private:
  Index p_;
  double exponent_;
  double log_norm_;
};

/// -infinity for |x| >= 1.
double entry_marginal_log_pdf(double x, Index p, Index k);

}  // namespace cayley
