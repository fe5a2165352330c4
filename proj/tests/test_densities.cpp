#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "cayley/densities.hpp"
#include "cayley/diagnostics.hpp"
#include "cayley/jacobian.hpp"
#include "cayley/rng.hpp"
#include "oracles.hpp"

using namespace cayley;

namespace {

BinghamParams example_params(Index p) { return BinghamParams(Matrix::Identity(p, p), 1.0, Vector{{5.0, 3.0, 1.5}}); }

// Composite Simpson rule on [-1, 1].
double simpson(const std::function<double(double)>& f, int intervals) {
  const double h = 2.0 / intervals;
  double s = f(-1.0) + f(1.0);
  for (int i = 1; i < intervals; ++i) s += (i % 2 ? 4.0 : 2.0) * f(-1.0 + i * h);
  return s * h / 3.0;
}

std::vector<double> haar_entries(Index p, Index k, std::size_t draws, Rng& rng) {
  std::vector<double> out;
  for (std::size_t t = 0; t < draws; ++t) out.push_back(oracle::gram_schmidt_haar(p, k, rng)(p - 1, k - 1));
  return out;
}

// CDF of the density proportional to (1 - x^2)^e on (-1, 1), by quadrature.
std::function<double(double)> power_cdf(double e) {
  auto f = [e](double x) { return std::pow(std::max(0.0, 1.0 - x * x), e); };
  const double norm = simpson(f, 20000);
  return [f, norm](double x) {
    if (x <= -1.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const int n = 2000;
    const double h = (x + 1.0) / n;
    double s = f(-1.0) + f(x);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(-1.0 + i * h);
    return s * h / 3.0 / norm;
  };
}

}  // namespace

TEST(UniformDensity, IsZeroEverywhere) {
  Rng rng(31);
  const LogDensity g = uniform_log_density();
  EXPECT_EQ(g(oracle::gram_schmidt_haar(5, 2, rng)), 0.0);
  EXPECT_EQ(g(oracle::gram_schmidt_haar(5, 2, rng)), g(Matrix::Identity(5, 2)));
  EXPECT_EQ(uniform_log_density(Manifold::kGrassmann).manifold, Manifold::kGrassmann);
}

TEST(UniformDensity, PullbackIsLogJacobian) {
  Rng rng(32);
  const ManifoldDims dims(6, 3);
  const StiefelCoords phi(dims, rng.normal_vector(dims.stiefel_dim()));
  EXPECT_EQ(pullback_log_density(uniform_log_density(), phi), log_jacobian_block_stiefel(phi));
}

TEST(UniformDensity, CircleIsStandardCauchy) {
  for (double a : {-5.0, -1.0, 0.0, 0.4, 3.0}) {
    const StiefelCoords phi(ManifoldDims(2, 1), Vector::Constant(1, a));
    const double expected = std::log(2.0) - std::log1p(a * a);
    EXPECT_NEAR(pullback_log_density(uniform_log_density(), phi), expected, 1e-13);
    EXPECT_NEAR(log_jacobian_naive(derivative_stiefel(phi)), expected, 1e-13);
  }
}

TEST(BinghamDensity, ExampleValueAtIdentity) {
  const LogDensity g = bingham_log_density(example_params(6));
  EXPECT_NEAR(g(Matrix::Identity(6, 3)), 0.5 * (5.0 / 6.0 + 3.0 / 4.0 + 0.6), 1e-14);
}

TEST(BinghamDensity, WeightsFormula) {
  const BinghamParams params(Matrix::Identity(4, 4), 2.0, Vector{{4.0, 1.0}});
  EXPECT_NEAR(params.weights()(0), 0.8 / 4.0, 1e-15);
  EXPECT_NEAR(params.weights()(1), 0.5 / 4.0, 1e-15);
}

TEST(BinghamDensity, ColumnSignInvariance) {
  Rng rng(33);
  const Matrix y = rng.normal_matrix(30, 7);
  const LogDensity g = bingham_log_density(BinghamParams::from_data(y, 1.0, Vector{{5.0, 3.0, 1.5}}));
  const Matrix q = oracle::gram_schmidt_haar(7, 3, rng);
  for (int mask = 0; mask < 8; ++mask) {
    Matrix flipped = q;
    for (int j = 0; j < 3; ++j) {
      if (mask & (1 << j)) flipped.col(j) *= -1.0;
    }
    ASSERT_NEAR(g(flipped), g(q), 1e-12);
  }
}

TEST(BinghamDensity, RejectsInvalidParameters) {
  const Matrix s = Matrix::Identity(4, 4);
  EXPECT_THROW(BinghamParams(s, 1.0, Vector{{1.5, 3.0, 5.0}}), DimensionError);
  EXPECT_THROW(BinghamParams(s, 1.0, Vector{{2.0, 2.0}}), DimensionError);
  EXPECT_THROW(BinghamParams(s, 0.0, Vector{{2.0, 1.0}}), DimensionError);
  EXPECT_THROW(BinghamParams(s, 1.0, Vector{{2.0, -1.0}}), DimensionError);
  Matrix asym = s;
  asym(0, 1) = 0.5;
  EXPECT_THROW(BinghamParams(asym, 1.0, Vector{{2.0, 1.0}}), DimensionError);
  EXPECT_THROW(BinghamParams(-s, 1.0, Vector{{2.0, 1.0}}), DimensionError);
}

TEST(BinghamDensity, PullbackAtZero) {
  const ManifoldDims dims(6, 3);
  const double expected = 0.5 * (5.0 / 6.0 + 3.0 / 4.0 + 0.6) + log_jacobian_block_stiefel(StiefelCoords::zero(dims));
  EXPECT_NEAR(pullback_log_density(bingham_log_density(example_params(6)), StiefelCoords::zero(dims)), expected,
              1e-12);
}

TEST(BinghamDensity, GradientMatchesFiniteDifferences) {
  Rng rng(34);
  const Matrix y = rng.normal_matrix(20, 5);
  const LogDensity g = bingham_log_density(BinghamParams::from_data(y, 1.0, Vector{{5.0, 3.0}}));
  ASSERT_TRUE(g.has_gradient());
  const Matrix q = rng.normal_matrix(5, 2);
  const Matrix grad = g.gradient(q);
  for (Index i = 0; i < q.size(); ++i) {
    Matrix up = q;
    Matrix down = q;
    up(i) += 1e-5;
    down(i) -= 1e-5;
    ASSERT_NEAR(grad(i), (g(up) - g(down)) / 2e-5, 1e-6);
  }
}

TEST(BinghamDensity, ModeFrameMaximizesAlongRotations) {
  Rng rng(35);
  const Matrix y = rng.normal_matrix(100, 8);
  const BinghamParams params = BinghamParams::from_data(y, 1.0, Vector{{5.0, 3.0, 1.5}});
  const LogDensity g = bingham_log_density(params);
  const Matrix mode = params.mode_frame();
  for (int t = 0; t < 5; ++t) {
    // Geodesic-free one-parameter family: orthonormalize cos(s) V + sin(s) W.
    const Matrix w = oracle::gram_schmidt_haar(8, 3, rng);
    const double at_mode = g(mode);
    for (int i = 1; i <= 200; ++i) {
      const double s = -1.5 + 3.0 * i / 201.0;
      const Matrix m = std::cos(s) * mode + std::sin(s) * w;
      const Eigen::HouseholderQR<Matrix> qr(m);
      const Matrix q = qr.householderQ() * Matrix::Identity(8, 3);
      ASSERT_LE(g(q), at_mode + 1e-10);
    }
  }
}

TEST(Pullback, BlockAndNaiveAgree) {
  Rng rng(36);
  const ManifoldDims dims(7, 3);
  const BinghamParams params = BinghamParams::from_data(rng.normal_matrix(15, 7), 1.0, Vector{{5.0, 3.0, 1.5}});
  for (Manifold m : {Manifold::kStiefel, Manifold::kGrassmann}) {
    const LogDensity g = bingham_log_density(params, m);
    for (int t = 0; t < 10; ++t) {
      if (m == Manifold::kStiefel) {
        const StiefelCoords phi(dims, rng.normal_vector(dims.stiefel_dim()));
        const double naive = g(cayley_forward_stiefel(phi).matrix()) + log_jacobian_naive(derivative_stiefel(phi));
        ASSERT_NEAR(pullback_log_density(g, phi), naive, 1e-8 * std::max(1.0, std::abs(naive)));
      } else {
        const GrassmannCoords psi(dims, oracle::vec(oracle::scale_into_domain(rng.normal_matrix(4, 3), 0.7)));
        const double naive =
            g(cayley_forward_grassmann(psi).matrix()) + log_jacobian_naive(derivative_grassmann(psi));
        ASSERT_NEAR(pullback_log_density(g, psi), naive, 1e-8 * std::max(1.0, std::abs(naive)));
      }
    }
  }
}

TEST(Pullback, OutsideGrassmannDomainIsMinusInfinity) {
  const GrassmannCoords psi(ManifoldDims(2, 1), Vector::Constant(1, 1.5));
  EXPECT_EQ(pullback_log_density(uniform_log_density(Manifold::kGrassmann), psi),
            -std::numeric_limits<double>::infinity());
}

TEST(EntryMarginal, SphereProjectionIsUniform) {
  for (double x : {-0.9, -0.2, 0.0, 0.5, 0.99}) EXPECT_NEAR(std::exp(entry_marginal_log_pdf(x, 3, 1)), 0.5, 1e-12);
}

TEST(EntryMarginal, IntegratesToOneAndIsSymmetric) {
  for (auto [p, k] : {std::pair<Index, Index>{50, 3}, {5, 3}, {4, 1}, {200, 5}}) {
    const EntryMarginal f(p, k);
    // x = sin(t) removes the endpoint singularity of the derivative.
    const auto in_angle = [&](double u) {
      const double t = u * std::acos(0.0);
      return std::abs(u) >= 1.0 ? 0.0 : f.pdf(std::sin(t)) * std::cos(t) * std::acos(0.0);
    };
    EXPECT_NEAR(simpson(in_angle, 20000), 1.0, 1e-10);
    for (double x : {0.1, 0.37, 0.8}) EXPECT_EQ(f.log_pdf(x), f.log_pdf(-x));
    EXPECT_NEAR(f.cdf(0.0), 0.5, 1e-12);
  }
}

TEST(EntryMarginal, OutsideSupportIsMinusInfinity) {
  EXPECT_EQ(entry_marginal_log_pdf(1.0, 5, 2), -std::numeric_limits<double>::infinity());
  EXPECT_EQ(entry_marginal_log_pdf(-1.3, 5, 2), -std::numeric_limits<double>::infinity());
}

TEST(EntryMarginal, ExponentDependsOnRowCountOnly) {
  EXPECT_DOUBLE_EQ(EntryMarginal(50, 3).exponent(), 23.5);
  EXPECT_DOUBLE_EQ(EntryMarginal(50, 1).exponent(), 23.5);
  EXPECT_DOUBLE_EQ(EntryMarginal(3, 1).exponent(), 0.0);
}

TEST(EntryMarginal, MatchesHaarDrawsAndRejectsColumnCountExponent) {
  Rng rng(37);
  const std::size_t n = 4000;
  for (auto [p, k] : {std::pair<Index, Index>{5, 3}, {8, 4}}) {
    const std::vector<double> draws = haar_entries(p, k, n, rng);
    const EntryMarginal f(p, k);
    const double ks = ks_statistic(draws, [&](double x) { return f.cdf(x); });
    const double ks_alt = ks_statistic(draws, power_cdf((p - k - 2) / 2.0));
    // 1.63 / sqrt(n) is the 1% critical value.
    EXPECT_LT(ks, 1.63 / std::sqrt(double(n))) << p << "," << k;
    EXPECT_GT(ks_alt, 1.63 / std::sqrt(double(n))) << p << "," << k;
  }
}
