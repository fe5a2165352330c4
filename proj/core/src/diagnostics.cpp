#include "cayley/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cayley/special_matrices.hpp"

namespace cayley {

HaarDraw haar_stiefel_coupled(Index p, Index k, Rng& rng) {
  const ManifoldDims dims(p, k);
  Matrix z = rng.normal_matrix(p, k);
  Matrix q = z;
  for (Index j = 0; j < k; ++j) {
    const double scale = q.col(j).norm();
    // Two passes of modified Gram-Schmidt keep the columns orthogonal to
    // working precision.
    for (int pass = 0; pass < 2; ++pass) {
      for (Index i = 0; i < j; ++i) q.col(j) -= q.col(i).dot(q.col(j)) * q.col(i);
    }
    const double norm = q.col(j).norm();
    if (!(norm > 1e-12 * scale) || !(norm > 0.0)) {
      throw NumericalError("Gaussian matrix is numerically rank deficient");
    }
    q.col(j) /= norm;
  }
  return HaarDraw{StiefelPoint(std::move(q)), std::move(z)};
}

StiefelPoint haar_stiefel(Index p, Index k, Rng& rng) { return haar_stiefel_coupled(p, k, rng).q; }

Vector approx_inverse_cayley(const Matrix& m) {
  const Index k = m.cols();
  const Index p = m.rows();
  if (k < 1 || k >= p) throw DimensionError("approx_inverse_cayley needs a p x k matrix with k < p");
  const Matrix top = m.topRows(k);
  const Vector b = vech_strict(top - top.transpose());
  const Index nb = b.size();
  Vector out(nb + (p - k) * k);
  out.head(nb) = b;
  const Matrix a = m.bottomRows(p - k);
  out.tail((p - k) * k) = Eigen::Map<const Vector>(a.data(), a.size());
  return out;
}

Vector scale_matrix_apply(const Vector& v, Index p, Index k) {
  const ManifoldDims dims(p, k);
  if (v.size() != dims.stiefel_dim()) throw DimensionError("scale_matrix_apply: length must be d_V");
  const Index nb = dims.skew_dim();
  Vector out = v;
  out.head(nb) *= std::sqrt(0.5 * static_cast<double>(p));
  out.tail(v.size() - nb) *= std::sqrt(static_cast<double>(p));
  return out;
}

CouplingResult coupling_epsilon(Index p, Index k, Rng& rng) {
  const HaarDraw draw = haar_stiefel_coupled(p, k, rng);
  CouplingResult r;
  r.p = p;
  r.k = k;
  r.phi_scaled = scale_matrix_apply(cayley_inverse_stiefel(draw.q).values(), p, k);
  r.z = scale_matrix_apply(approx_inverse_cayley(draw.z / std::sqrt(static_cast<double>(p))), p, k);
  r.epsilon = (r.phi_scaled - r.z).cwiseAbs().maxCoeff();
  return r;
}

Vector principal_angles(const Matrix& q, const Matrix& v) {
  if (q.rows() != v.rows() || q.cols() != v.cols()) throw DimensionError("principal_angles: shape mismatch");
  Vector out(q.cols());
  for (Index j = 0; j < q.cols(); ++j) {
    const double nq = q.col(j).norm();
    const double nv = v.col(j).norm();
    if (!(nq > 0.0) || !(nv > 0.0)) throw InputError("principal_angles: zero-norm column");
    const double c = std::clamp(std::abs(q.col(j).dot(v.col(j))) / (nq * nv), 0.0, 1.0);
    out(j) = std::acos(c);
  }
  return out;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw InputError("ks_statistic: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw InputError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

ChainDiagnostics acf_ess(const std::vector<double>& samples, std::size_t max_lag) {
  const std::size_t n = samples.size();
  if (n == 0) throw InputError("acf_ess: empty sample");
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(n);
  std::vector<double> c(n);
  for (std::size_t t = 0; t < n; ++t) c[t] = samples[t] - mean;
  const double gamma0 = std::inner_product(c.begin(), c.end(), c.begin(), 0.0);
  if (!(gamma0 > 0.0)) throw InputError("acf_ess: sample has zero variance");
  const std::size_t lags = std::min(max_lag, n - 1);
  ChainDiagnostics out;
  out.acf.resize(lags + 1);
  out.acf[0] = 1.0;
  for (std::size_t h = 1; h <= lags; ++h) {
    out.acf[h] = std::inner_product(c.begin(), c.end() - static_cast<std::ptrdiff_t>(h),
                                    c.begin() + static_cast<std::ptrdiff_t>(h), 0.0) /
                 gamma0;
  }
  double sum = 0.0;
  for (std::size_t h = 1; h <= lags && out.acf[h] >= 0.0; ++h) sum += out.acf[h];
  out.ess = std::min(static_cast<double>(n), static_cast<double>(n) / (1.0 + 2.0 * sum));
  return out;
}

std::size_t Histogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), outside);
}

Histogram histogram(const std::vector<double>& samples, double lo, double hi, std::size_t bins) {
  if (bins < 1 || !(hi > lo)) throw InputError("histogram: need at least one bin and hi > lo");
  Histogram h;
  h.lo = lo;
  h.hi = hi;
  h.counts.assign(bins, 0);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (double x : samples) {
    if (!(x >= lo && x <= hi)) {
      ++h.outside;
      continue;
    }
    auto b = static_cast<std::size_t>((x - lo) / width);
    h.counts[std::min(b, bins - 1)] += 1;
  }
  return h;
}

double total_variation(const Histogram& a, const Histogram& b) {
  if (a.counts.size() != b.counts.size() || a.lo != b.lo || a.hi != b.hi) {
    throw InputError("total_variation: histograms have different bins");
  }
  const double na = static_cast<double>(a.total());
  const double nb = static_cast<double>(b.total());
  if (!(na > 0.0) || !(nb > 0.0)) throw InputError("total_variation: empty histogram");
  double tv = std::abs(static_cast<double>(a.outside) / na - static_cast<double>(b.outside) / nb);
  for (std::size_t i = 0; i < a.counts.size(); ++i) {
    tv += std::abs(static_cast<double>(a.counts[i]) / na - static_cast<double>(b.counts[i]) / nb);
  }
  return 0.5 * tv;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw InputError("quantile: empty sample");
  std::sort(v.begin(), v.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

}  // namespace cayley
