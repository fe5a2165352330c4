#include "cayley/densities.hpp"

#include <cmath>
#include <limits>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "cayley/jacobian.hpp"

namespace cayley {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

const char* manifold_name(Manifold m) {
  return m == Manifold::kStiefel ? "stiefel" : "grassmann";
}

Manifold parse_manifold(const std::string& name) {
  if (name == "stiefel") return Manifold::kStiefel;
  if (name == "grassmann") return Manifold::kGrassmann;
  throw DimensionError("unknown manifold '" + name + "' (expected stiefel or grassmann)");
}

LogDensity uniform_log_density(Manifold manifold) {
  LogDensity g;
  g.name = "uniform";
  g.manifold = manifold;
  g.log_g = [](const Matrix&) { return 0.0; };
  g.gradient = [](const Matrix& q) { return Matrix(Matrix::Zero(q.rows(), q.cols())); };
  return g;
}

BinghamParams::BinghamParams(Matrix scatter, double sigma2, Vector lambda)
    : s_(std::move(scatter)), sigma2_(sigma2), lambda_(std::move(lambda)) {
  if (s_.rows() != s_.cols() || s_.rows() < 2) throw DimensionError("scatter matrix must be square");
  if (!s_.allFinite()) throw DimensionError("scatter matrix has non-finite entries");
  const double scale = std::max(1.0, s_.cwiseAbs().maxCoeff());
  if ((s_ - s_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw DimensionError("scatter matrix is not symmetric");
  }
  s_ = 0.5 * (s_ + s_.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(s_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10 * scale) {
    throw DimensionError("scatter matrix is not positive semidefinite");
  }
  if (!(sigma2_ > 0.0) || !std::isfinite(sigma2_)) throw DimensionError("sigma2 must be positive");
  if (lambda_.size() < 1 || lambda_.size() >= s_.rows()) {
    throw DimensionError("lambda must have length k with 1 <= k < p");
  }
  for (Index j = 0; j < lambda_.size(); ++j) {
    if (!(lambda_(j) > 0.0) || !std::isfinite(lambda_(j))) {
      throw DimensionError("lambda entries must be positive");
    }
    if (j > 0 && !(lambda_(j) < lambda_(j - 1))) {
      throw DimensionError("lambda must be strictly decreasing");
    }
  }
  m_ = (lambda_.array() / (1.0 + lambda_.array()) / (2.0 * sigma2_)).matrix();
}

BinghamParams BinghamParams::from_data(const Matrix& y, double sigma2, Vector lambda) {
  Matrix s = Matrix::Zero(y.cols(), y.cols());
  s.selfadjointView<Eigen::Lower>().rankUpdate(y.transpose());
  s = s.selfadjointView<Eigen::Lower>();
  return BinghamParams(std::move(s), sigma2, std::move(lambda));
}

Matrix BinghamParams::mode_frame() const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s_);
  const Index p = s_.rows();
  const Index k = lambda_.size();
  // Eigenvalues come back ascending.
  Matrix v(p, k);
  for (Index j = 0; j < k; ++j) v.col(j) = es.eigenvectors().col(p - 1 - j);
  return v;
}

LogDensity bingham_log_density(const BinghamParams& params, Manifold manifold) {
  LogDensity g;
  g.name = "bingham";
  g.manifold = manifold;
  const Matrix s = params.scatter();
  const Vector w = params.weights();
  g.log_g = [s, w](const Matrix& q) {
    if (q.rows() != s.rows() || q.cols() != w.size()) {
      throw DimensionError("Bingham density: frame has the wrong shape");
    }
    const Matrix sq = s * q;
    return (q.cwiseProduct(sq).colwise().sum().transpose().array() * w.array()).sum();
  };
  g.gradient = [s, w](const Matrix& q) {
    return Matrix(2.0 * (s * q) * w.asDiagonal());
  };
  return g;
}

double pullback_log_density(const LogDensity& g, const StiefelCoords& phi) {
  const StiefelPoint q = cayley_forward_stiefel(phi);
  return g(q.matrix()) + log_jacobian_block_stiefel(phi);
}

double pullback_log_density(const LogDensity& g, const GrassmannCoords& psi) {
  if (!psi.values().allFinite()) throw DomainError("Grassmann coordinates are not finite");
  if (!(grassmann_domain_margin(psi) > 0.0)) return kNegInf;
  const GrassmannPoint q = cayley_forward_grassmann(psi);
  return g(q.matrix()) + log_jacobian_block_grassmann(psi);
}

EntryMarginal::EntryMarginal(Index p, Index k) : p_(p) {
  ManifoldDims dims(p, k);  // validates 1 <= k < p
  (void)dims;
  exponent_ = 0.5 * static_cast<double>(p - 3);
  const double e = exponent_;
  boost::math::quadrature::tanh_sinh<double> integrator;
  const double z = integrator.integrate([e](double x) { return std::pow(1.0 - x * x, e); }, -1.0, 1.0);
  log_norm_ = std::log(z);
}

double EntryMarginal::log_pdf(double x) const {
  if (!(std::abs(x) < 1.0)) return kNegInf;
  return exponent_ * std::log1p(-x * x) - log_norm_;
}

double EntryMarginal::pdf(double x) const { return std::exp(log_pdf(x)); }

double EntryMarginal::cdf(double x) const {
  if (x <= -1.0) return 0.0;
  if (x >= 1.0) return 1.0;
  // x^2 ~ Beta(1/2, (p-1)/2), symmetric about zero.
  const double half = 0.5 * boost::math::ibeta(0.5, 0.5 * static_cast<double>(p_ - 1), x * x);
  return x >= 0.0 ? 0.5 + half : 0.5 - half;
}

double entry_marginal_log_pdf(double x, Index p, Index k) {
  return EntryMarginal(p, k).log_pdf(x);
}

}  // namespace cayley
