#include <chrono>
#include <cmath>

#include <gtest/gtest.h>

#include "cayley/jacobian.hpp"
#include "cayley/rng.hpp"
#include "cayley/special_matrices.hpp"
#include "oracles.hpp"

using namespace cayley;

namespace {

using Dims = std::pair<Index, Index>;

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

Vector stiefel_vec(const Vector& phi, const ManifoldDims& dims) {
  return oracle::vec(cayley_forward_stiefel(StiefelCoords(dims, phi)).matrix());
}

Vector grassmann_vec(const Vector& psi, const ManifoldDims& dims) {
  return oracle::vec(cayley_forward_grassmann(GrassmannCoords(dims, psi)).matrix());
}

GrassmannCoords random_grassmann(const ManifoldDims& dims, Rng& rng, double radius) {
  const Matrix a = oracle::scale_into_domain(rng.normal_matrix(dims.p() - dims.k(), dims.k()), radius);
  return GrassmannCoords(dims, oracle::vec(a));
}

}  // namespace

TEST(DerivativeStiefel, AtZeroIsTwiceEmbedding) {
  for (Dims pk : {Dims{2, 1}, Dims{5, 3}, Dims{6, 2}}) {
    const ManifoldDims dims(pk.first, pk.second);
    const Matrix d = derivative_stiefel(StiefelCoords::zero(dims));
    const Matrix gamma = gamma_stiefel(dims.p(), dims.k()).to_dense().cast<double>();
    // Rows of vec(X) that belong to the first k columns.
    EXPECT_EQ(d, 2.0 * gamma.topRows(dims.p() * dims.k()));
    for (Index j = 0; j < dims.skew_dim(); ++j) {
      EXPECT_EQ((d.col(j).array() != 0.0).count(), 2);
      EXPECT_EQ(d.col(j).cwiseAbs().maxCoeff(), 2.0);
    }
  }
}

TEST(DerivativeStiefel, MatchesFiniteDifferences) {
  Rng rng(21);
  for (Dims pk : {Dims{6, 3}, Dims{2, 1}, Dims{7, 2}}) {
    const ManifoldDims dims(pk.first, pk.second);
    for (int t = 0; t < 5; ++t) {
      const Vector phi = rng.normal_vector(dims.stiefel_dim());
      const Matrix fd = oracle::jacobian_fd([&](const Vector& x) { return stiefel_vec(x, dims); }, phi, 1e-5);
      ASSERT_LE(max_abs(derivative_stiefel(StiefelCoords(dims, phi)) - fd), 1e-6);
    }
  }
}

TEST(DerivativeStiefel, FullColumnRank) {
  Rng rng(22);
  const ManifoldDims dims(8, 4);
  const Matrix d = derivative_stiefel(StiefelCoords(dims, rng.normal_vector(dims.stiefel_dim())));
  Eigen::JacobiSVD<Matrix> svd(d);
  svd.setThreshold(1e-12);
  EXPECT_EQ(svd.rank(), dims.stiefel_dim());
}

TEST(DerivativeGrassmann, AtZeroIsTwiceEmbedding) {
  const ManifoldDims dims(5, 2);
  const Matrix d = derivative_grassmann(GrassmannCoords::zero(dims));
  const Matrix gamma = gamma_grassmann(5, 2).to_dense().cast<double>();
  EXPECT_EQ(d, 2.0 * gamma.topRows(10));
}

TEST(DerivativeGrassmann, MatchesFiniteDifferencesAndRank) {
  Rng rng(23);
  const ManifoldDims dims(5, 2);
  for (int t = 0; t < 5; ++t) {
    const GrassmannCoords psi = random_grassmann(dims, rng, 0.6);
    const Matrix fd =
        oracle::jacobian_fd([&](const Vector& x) { return grassmann_vec(x, dims); }, psi.values(), 1e-5);
    const Matrix d = derivative_grassmann(psi);
    ASSERT_LE(max_abs(d - fd), 1e-6);
    Eigen::JacobiSVD<Matrix> svd(d);
    svd.setThreshold(1e-12);
    ASSERT_EQ(svd.rank(), dims.grassmann_dim());
  }
}

TEST(DerivativeGrassmann, OutsideDomainThrows) {
  EXPECT_THROW(derivative_grassmann(GrassmannCoords(ManifoldDims(2, 1), Vector::Constant(1, 1.2))), DomainError);
}

TEST(DerivativeTransposeApply, MatchesDenseProduct) {
  Rng rng(24);
  const ManifoldDims dims(9, 3);
  const StiefelCoords phi(dims, rng.normal_vector(dims.stiefel_dim()));
  const Matrix w = rng.normal_matrix(9, 3);
  EXPECT_LE(max_abs(derivative_transpose_apply(phi, w) - derivative_stiefel(phi).transpose() * oracle::vec(w)), 1e-12);
  const GrassmannCoords psi = random_grassmann(dims, rng, 0.7);
  EXPECT_LE(max_abs(derivative_transpose_apply(psi, w) - derivative_grassmann(psi).transpose() * oracle::vec(w)),
            1e-12);
}

TEST(LogJacobianNaive, TwoByOneArcLength) {
  // The circle has arc length 2 arctan(a), so |DC| = 2 / (1 + a^2).
  for (double a : {-4.0, -0.5, 0.0, 0.3, 2.0}) {
    const ManifoldDims dims(2, 1);
    const double lj = log_jacobian_naive(derivative_stiefel(StiefelCoords(dims, Vector::Constant(1, a))));
    EXPECT_NEAR(lj, std::log(2.0) - std::log1p(a * a), 1e-13);
  }
}

TEST(LogJacobianNaive, AtZero) {
  for (Dims pk : {Dims{4, 2}, Dims{5, 3}, Dims{9, 4}}) {
    const ManifoldDims dims(pk.first, pk.second);
    const double expected =
        (dims.stiefel_dim() + dims.k() * (dims.k() - 1) / 4.0) * std::log(2.0);
    EXPECT_NEAR(log_jacobian_naive(derivative_stiefel(StiefelCoords::zero(dims))), expected, 1e-12);
  }
}

TEST(LogJacobianNaive, RankDeficientThrows) {
  Matrix d = Matrix::Zero(4, 2);
  d(0, 0) = 1.0;
  EXPECT_THROW(log_jacobian_naive(d), NumericalError);
}

TEST(LogJacobianNaive, SingleColumnDependsOnNormOnly) {
  Rng rng(25);
  const ManifoldDims dims(6, 1);
  const Vector a = rng.normal_vector(5);
  const double base = log_jacobian_naive(derivative_stiefel(StiefelCoords(dims, a)));
  for (int t = 0; t < 10; ++t) {
    const Matrix rot = oracle::gram_schmidt_haar(5, 5, rng);
    const double rotated = log_jacobian_naive(derivative_stiefel(StiefelCoords(dims, rot * a)));
    ASSERT_LE(std::abs(rotated - base), 1e-10);
    ASSERT_LE(std::abs(log_jacobian_block_stiefel(StiefelCoords(dims, rot * a)) - base), 1e-10);
  }
}

TEST(JacobianBlocks, AtZero) {
  const ManifoldDims dims(6, 3);
  const JacobianBlocks j = jacobian_blocks_stiefel(StiefelCoords::zero(dims));
  EXPECT_EQ(j.c11, Matrix::Identity(3, 3));
  EXPECT_EQ(j.c22, Matrix::Identity(3, 3));
  EXPECT_EQ(max_abs(j.c12), 0.0);
  EXPECT_EQ(max_abs(j.c21), 0.0);
  EXPECT_LE(max_abs(j.omega11 - 2.0 * Matrix::Identity(3, 3)), 1e-15);
  EXPECT_LE(max_abs(j.omega12), 1e-15);
  EXPECT_LE(max_abs(j.omega22 - Matrix::Identity(9, 9)), 1e-15);
}

TEST(JacobianBlocks, MatchDenseInverseAndSymmetry) {
  Rng rng(26);
  for (Dims pk : {Dims{5, 3}, Dims{8, 2}, Dims{7, 4}}) {
    const ManifoldDims dims(pk.first, pk.second);
    const Index k = dims.k();
    const Index q = dims.p() - k;
    const Vector phi = rng.normal_vector(dims.stiefel_dim());
    const JacobianBlocks j = jacobian_blocks_stiefel(StiefelCoords(dims, phi));
    const Matrix x = oracle::skew_embedding(phi, dims.p(), k, true);
    const Matrix c = (Matrix::Identity(dims.p(), dims.p()) - x).inverse();
    EXPECT_LE(max_abs(j.c11 - c.topLeftCorner(k, k)), 1e-10);
    EXPECT_LE(max_abs(j.c12 - c.topRightCorner(k, q)), 1e-10);
    EXPECT_LE(max_abs(j.c21 - c.bottomLeftCorner(q, k)), 1e-10);
    EXPECT_LE(max_abs(j.c22 - c.bottomRightCorner(q, q)), 1e-10);
    const Matrix g = c.leftCols(k) * c.leftCols(k).transpose();
    const Matrix h = c.transpose() * c;
    EXPECT_LE(max_abs(j.g11 - g.topLeftCorner(k, k)), 1e-10);
    EXPECT_LE(max_abs(j.g22 - g.bottomRightCorner(q, q)), 1e-10);
    EXPECT_LE(max_abs(j.h11 - h.topLeftCorner(k, k)), 1e-10);
    EXPECT_LE(max_abs(j.h22 - h.bottomRightCorner(q, q)), 1e-10);
    EXPECT_LE(max_abs(j.omega21 - j.omega12.transpose()), 1e-10);
    // Omega is DC^T DC / 4.
    const Matrix d = derivative_stiefel(StiefelCoords(dims, phi));
    const Matrix gram = d.transpose() * d / 4.0;
    const Index s = dims.skew_dim();
    EXPECT_LE(max_abs(j.omega11 - gram.topLeftCorner(s, s)), 1e-9);
    EXPECT_LE(max_abs(j.omega12 - gram.topRightCorner(s, q * k)), 1e-9);
    EXPECT_LE(max_abs(j.omega22 - gram.bottomRightCorner(q * k, q * k)), 1e-9);
    EXPECT_NEAR(log_jacobian_from_blocks(j, dims.stiefel_dim()), log_jacobian_naive(d), 1e-8);
  }
}

TEST(LogJacobianBlockStiefel, MatchesNaiveOnGrid) {
  Rng rng(27);
  for (Dims pk : {Dims{4, 2}, Dims{5, 3}, Dims{6, 3}, Dims{8, 4}}) {
    const ManifoldDims dims(pk.first, pk.second);
    for (int t = 0; t < 100; ++t) {
      const StiefelCoords phi(dims, rng.normal_vector(dims.stiefel_dim()));
      const double naive = log_jacobian_naive(derivative_stiefel(phi));
      ASSERT_LE(rel_err(log_jacobian_block_stiefel(phi), naive), 1e-8) << pk.first << "," << pk.second;
      ASSERT_LE(rel_err(log_jacobian_dense_block_stiefel(phi), naive), 1e-8);
    }
  }
}

TEST(LogJacobianBlockStiefel, ReducedRouteMatchesNaiveForTallFrames) {
  Rng rng(28);
  for (Dims pk : {Dims{30, 4}, Dims{25, 1}, Dims{12, 6}, Dims{40, 3}}) {
    const ManifoldDims dims(pk.first, pk.second);
    for (int t = 0; t < 5; ++t) {
      const StiefelCoords phi(dims, rng.normal_vector(dims.stiefel_dim()) * (t + 1) * 0.3);
      const double naive = log_jacobian_naive(derivative_stiefel(phi));
      ASSERT_LE(rel_err(log_jacobian_block_stiefel(phi), naive), 1e-8);
    }
  }
}

TEST(LogJacobianBlockStiefel, AtZero) {
  for (Dims pk : {Dims{2, 1}, Dims{5, 3}, Dims{20, 4}}) {
    const ManifoldDims dims(pk.first, pk.second);
    const double expected = (dims.stiefel_dim() + dims.k() * (dims.k() - 1) / 4.0) * std::log(2.0);
    EXPECT_NEAR(log_jacobian_block_stiefel(StiefelCoords::zero(dims)), expected, 1e-12);
  }
}

TEST(LogJacobianBlockGrassmann, MatchesNaive) {
  Rng rng(29);
  for (Dims pk : {Dims{4, 2}, Dims{6, 3}, Dims{20, 3}}) {
    const ManifoldDims dims(pk.first, pk.second);
    for (int t = 0; t < 50; ++t) {
      const GrassmannCoords psi = random_grassmann(dims, rng, 0.95 * rng.uniform() + 0.01);
      const double naive = log_jacobian_naive(derivative_grassmann(psi));
      ASSERT_LE(rel_err(log_jacobian_block_grassmann(psi), naive), 1e-8);
      ASSERT_LE(rel_err(log_jacobian_dense_block_grassmann(psi), naive), 1e-8);
    }
  }
}

TEST(LogJacobianBlockGrassmann, ZeroAndScalarCase) {
  const ManifoldDims dims(6, 2);
  EXPECT_NEAR(log_jacobian_block_grassmann(GrassmannCoords::zero(dims)), dims.grassmann_dim() * std::log(2.0),
              1e-12);
  for (double a : {-0.8, 0.1, 0.5}) {
    const GrassmannCoords psi(ManifoldDims(2, 1), Vector::Constant(1, a));
    EXPECT_NEAR(log_jacobian_block_grassmann(psi), std::log(2.0) - std::log1p(a * a), 1e-13);
    EXPECT_NEAR(log_jacobian_block_grassmann(psi), log_jacobian_naive(derivative_grassmann(psi)), 1e-13);
  }
}

TEST(LogJacobianGradient, MatchesFiniteDifferencesOfBlockValue) {
  Rng rng(30);
  for (Dims pk : {Dims{12, 3}, Dims{5, 3}, Dims{3, 1}}) {
    const ManifoldDims dims(pk.first, pk.second);
    const Vector phi = rng.normal_vector(dims.stiefel_dim());
    const Vector grad = log_jacobian_gradient_stiefel(StiefelCoords(dims, phi), 1e-5);
    Vector fd(phi.size());
    for (Index i = 0; i < phi.size(); ++i) {
      Vector up = phi;
      Vector down = phi;
      up(i) += 1e-5;
      down(i) -= 1e-5;
      fd(i) = (log_jacobian_naive(derivative_stiefel(StiefelCoords(dims, up))) -
               log_jacobian_naive(derivative_stiefel(StiefelCoords(dims, down)))) / 2e-5;
    }
    ASSERT_LE((grad - fd).cwiseAbs().maxCoeff(), 1e-6);

    const GrassmannCoords psi = random_grassmann(dims, rng, 0.5);
    const Vector ggrad = log_jacobian_gradient_grassmann(psi, 1e-5);
    for (Index i = 0; i < psi.values().size(); ++i) {
      Vector up = psi.values();
      Vector down = psi.values();
      up(i) += 1e-5;
      down(i) -= 1e-5;
      const double f = (log_jacobian_naive(derivative_grassmann(GrassmannCoords(dims, up))) -
                        log_jacobian_naive(derivative_grassmann(GrassmannCoords(dims, down)))) / 2e-5;
      ASSERT_NEAR(ggrad(i), f, 1e-6);
    }
  }
}

TEST(LogJacobianBlockStiefel, AtLeastTenTimesFasterThanNaive) {
  using Clock = std::chrono::steady_clock;
  Rng rng(31);
  const ManifoldDims dims(200, 5);
  const StiefelCoords phi(dims, rng.normal_vector(dims.stiefel_dim()));
  double naive_value = 0.0;
  auto t0 = Clock::now();
  for (int i = 0; i < 2; ++i) naive_value = log_jacobian_naive(derivative_stiefel(phi));
  const double naive = std::chrono::duration<double>(Clock::now() - t0).count() / 2;
  double block_value = 0.0;
  t0 = Clock::now();
  for (int i = 0; i < 20; ++i) block_value = log_jacobian_block_stiefel(phi);
  const double block = std::chrono::duration<double>(Clock::now() - t0).count() / 20;
  EXPECT_LE(rel_err(block_value, naive_value), 1e-8);
  EXPECT_GE(naive / block, 10.0) << "naive " << naive << " s, block " << block << " s";
}
