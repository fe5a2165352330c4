#include <cmath>

#include <gtest/gtest.h>

#include "cayley/cayley.hpp"
#include "cayley/rng.hpp"
#include "oracles.hpp"

using namespace cayley;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

Matrix projector(const Matrix& q) { return q * q.transpose(); }

}  // namespace

TEST(ManifoldDims, Formulas) {
  const ManifoldDims d(5, 3);
  EXPECT_EQ(d.stiefel_dim(), 9);
  EXPECT_EQ(d.grassmann_dim(), 6);
  EXPECT_EQ(d.skew_dim(), 3);
  EXPECT_THROW(ManifoldDims(3, 3), DimensionError);
  EXPECT_THROW(ManifoldDims(3, 0), DimensionError);
}

TEST(Coords, RejectLengthMismatch) {
  EXPECT_THROW(StiefelCoords(ManifoldDims(4, 2), Vector::Zero(4)), DimensionError);
  EXPECT_THROW(GrassmannCoords(ManifoldDims(4, 2), Vector::Zero(5)), DimensionError);
}

TEST(EmbedSkew, ZeroCoordinates) {
  EXPECT_EQ(embed_skew(StiefelCoords::zero(ManifoldDims(5, 2))), Matrix::Zero(5, 5));
}

TEST(EmbedSkew, TwoByOneLayout) {
  Matrix expected(2, 2);
  expected << 0, -0.7, 0.7, 0;
  EXPECT_EQ(embed_skew(StiefelCoords(ManifoldDims(2, 1), Vector::Constant(1, 0.7))), expected);
}

TEST(EmbedSkew, MatchesEntrywiseLayout) {
  Rng rng(11);
  const ManifoldDims dims(7, 3);
  const Vector phi = rng.normal_vector(dims.stiefel_dim());
  const Matrix x = embed_skew(StiefelCoords(dims, phi));
  EXPECT_EQ(x, oracle::skew_embedding(phi, 7, 3, true));
  EXPECT_EQ(x, -x.transpose());
  const Vector psi = rng.normal_vector(dims.grassmann_dim());
  EXPECT_EQ(embed_skew(GrassmannCoords(dims, psi)), oracle::skew_embedding(psi, 7, 3, false));
}

TEST(CayleyForwardStiefel, ZeroGivesIdentityBlock) {
  const ManifoldDims dims(6, 2);
  EXPECT_EQ(cayley_forward_stiefel(StiefelCoords::zero(dims)).matrix(), Matrix::Identity(6, 2));
}

TEST(CayleyForwardStiefel, TwoByOneScalarFormula) {
  for (double a : {-3.0, -0.4, 0.0, 0.25, 1.0, 7.5}) {
    const Matrix q = cayley_forward_stiefel(StiefelCoords(ManifoldDims(2, 1), Vector::Constant(1, a))).matrix();
    EXPECT_NEAR(q(0, 0), (1 - a * a) / (1 + a * a), 1e-14);
    EXPECT_NEAR(q(1, 0), 2 * a / (1 + a * a), 1e-14);
  }
}

TEST(CayleyForwardStiefel, MatchesDirectFormula) {
  Rng rng(12);
  for (auto [p, k] : {std::pair<Index, Index>{50, 3}, {5, 3}, {8, 4}, {3, 1}}) {
    const ManifoldDims dims(p, k);
    for (int t = 0; t < 10; ++t) {
      const Vector phi = rng.normal_vector(dims.stiefel_dim());
      const Matrix q = cayley_forward_stiefel(StiefelCoords(dims, phi)).matrix();
      const Matrix direct = oracle::cayley_direct(oracle::skew_embedding(phi, p, k, true), k);
      ASSERT_LE(max_abs(q - direct), 1e-10);
      ASSERT_LE(orthonormality_error(q), 1e-10);
    }
  }
}

TEST(CayleyInverseStiefel, IdentityGivesZero) {
  const ManifoldDims dims(5, 3);
  EXPECT_LE(cayley_inverse_stiefel(StiefelPoint::identity(dims)).values().cwiseAbs().maxCoeff(), 0.0);
}

TEST(CayleyInverseStiefel, SingularTopBlockIsDomainError) {
  Matrix q(2, 1);
  q << -1, 0;
  EXPECT_THROW(cayley_inverse_stiefel(StiefelPoint(q)), DomainError);
}

TEST(CayleyInverseStiefel, RoundTripOnHaarDraws) {
  Rng rng(13);
  for (auto [p, k] : {std::pair<Index, Index>{3, 1}, {5, 3}, {20, 5}, {50, 3}}) {
    for (int t = 0; t < 20; ++t) {
      const Matrix q = oracle::gram_schmidt_haar(p, k, rng);
      const StiefelCoords phi = cayley_inverse_stiefel(StiefelPoint(q));
      ASSERT_LE(max_abs(cayley_forward_stiefel(phi).matrix() - q), 1e-10) << p << "," << k;
    }
  }
}

TEST(CayleyInverseStiefel, RoundTripOnCoordinates) {
  Rng rng(14);
  for (auto [p, k] : {std::pair<Index, Index>{3, 1}, {5, 3}, {20, 5}, {50, 3}}) {
    const ManifoldDims dims(p, k);
    for (int t = 0; t < 20; ++t) {
      const Vector phi = rng.normal_vector(dims.stiefel_dim());
      const Vector back = cayley_inverse_stiefel(cayley_forward_stiefel(StiefelCoords(dims, phi))).values();
      ASSERT_LE((back - phi).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(StiefelPoint, RejectsNonOrthonormal) {
  EXPECT_THROW(StiefelPoint(Matrix::Ones(3, 1)), DomainError);
}

TEST(SystemMatrix, NonsingularForRandomBlocks) {
  Rng rng(15);
  for (int t = 0; t < 1000; ++t) {
    const Index k = 1 + t % 5;
    const Matrix a = rng.normal_matrix(3 + t % 7, k) * (1.0 + t % 4);
    const Matrix r = rng.normal_matrix(k, k);
    const Matrix b = r - r.transpose();
    const Matrix m = Matrix::Identity(k, k) + a.transpose() * a - b;
    const double smin = Eigen::JacobiSVD<Matrix>(m).singularValues().minCoeff();
    ASSERT_GT(smin, 1e-12);
  }
}

TEST(CayleyForwardGrassmann, ZeroGivesIdentityBlock) {
  const ManifoldDims dims(4, 2);
  EXPECT_EQ(cayley_forward_grassmann(GrassmannCoords::zero(dims)).matrix(), Matrix::Identity(4, 2));
}

TEST(CayleyForwardGrassmann, TwoByOneScalarFormula) {
  for (double a : {-0.9, -0.3, 0.5, 0.99}) {
    const Matrix q = cayley_forward_grassmann(GrassmannCoords(ManifoldDims(2, 1), Vector::Constant(1, a))).matrix();
    EXPECT_NEAR(q(0, 0), (1 - a * a) / (1 + a * a), 1e-14);
    EXPECT_NEAR(q(1, 0), 2 * a / (1 + a * a), 1e-14);
    EXPECT_GT(q(0, 0), 0.0);
  }
}

TEST(CayleyForwardGrassmann, OutsideDomainThrows) {
  const ManifoldDims dims(3, 1);
  Vector psi(2);
  psi << std::sqrt(1.5), 0.0;
  EXPECT_THROW(cayley_forward_grassmann(GrassmannCoords(dims, psi)), DomainError);
}

TEST(CayleyForwardGrassmann, ProducesSpdTopBlock) {
  Rng rng(16);
  const ManifoldDims dims(7, 3);
  for (int t = 0; t < 50; ++t) {
    const Matrix a = oracle::scale_into_domain(rng.normal_matrix(4, 3), 0.98 * rng.uniform() + 0.01);
    const GrassmannPoint q = cayley_forward_grassmann(GrassmannCoords(dims, oracle::vec(a)));
    const Matrix q1 = q.q1();
    ASSERT_LE(max_abs(q1 - q1.transpose()), 1e-10);
    ASSERT_GT(Eigen::SelfAdjointEigenSolver<Matrix>(q1).eigenvalues().minCoeff(), 0.0);
    ASSERT_LE(orthonormality_error(q.matrix()), 1e-10);
  }
}

TEST(CayleyInverseGrassmann, IdentityGivesZero) {
  EXPECT_LE(cayley_inverse_grassmann(GrassmannPoint::identity(ManifoldDims(6, 2))).values().cwiseAbs().maxCoeff(), 0.0);
}

TEST(CayleyInverseGrassmann, RoundTripCoordinates) {
  Rng rng(17);
  const ManifoldDims dims(6, 2);
  for (int t = 0; t < 50; ++t) {
    const Matrix a = oracle::scale_into_domain(rng.normal_matrix(4, 2), 0.9 * rng.uniform() + 0.05);
    const GrassmannCoords psi(dims, oracle::vec(a));
    const Vector back = cayley_inverse_grassmann(cayley_forward_grassmann(psi)).values();
    ASSERT_LE((back - psi.values()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(CayleyInverseGrassmann, EigenvalueRelationAndMargin) {
  Rng rng(18);
  for (auto [p, k] : {std::pair<Index, Index>{6, 2}, {8, 3}, {5, 4}}) {
    for (int t = 0; t < 20; ++t) {
      const GrassmannPoint q = canonicalize_grassmann(StiefelPoint(oracle::gram_schmidt_haar(p, k, rng)));
      const GrassmannCoords psi = cayley_inverse_grassmann(q);
      ASSERT_GT(grassmann_domain_margin(psi), 0.0);
      Vector lam = Eigen::SelfAdjointEigenSolver<Matrix>(Matrix(q.q1())).eigenvalues();
      Vector predicted(k);
      for (Index i = 0; i < k; ++i) {
        const double l = lam(i);
        const double f = 1.0 + (1.0 - l) / (1.0 + l);
        predicted(i) = 0.25 * (1 - l * l) * f * f;
      }
      std::sort(predicted.data(), predicted.data() + k);
      const Matrix a = psi.a();
      const Vector actual = Eigen::SelfAdjointEigenSolver<Matrix>(a.transpose() * a).eigenvalues();
      ASSERT_LE((actual - predicted).cwiseAbs().maxCoeff(), 1e-8);
    }
  }
}

TEST(GrassmannPoint, RejectsNonSpdTopBlock) {
  Matrix q(2, 1);
  q << -1, 0;
  EXPECT_THROW(GrassmannPoint{q}, DomainError);
}

TEST(Canonicalize, AlreadyCanonicalIsUnchanged) {
  Rng rng(19);
  const ManifoldDims dims(6, 2);
  const Matrix a = oracle::scale_into_domain(rng.normal_matrix(4, 2), 0.5);
  const GrassmannPoint q = cayley_forward_grassmann(GrassmannCoords(dims, oracle::vec(a)));
  EXPECT_LE(max_abs(canonicalize_grassmann(q.as_stiefel()).matrix() - q.matrix()), 1e-10);
}

TEST(Canonicalize, NegativeUnitVector) {
  Matrix q(2, 1);
  q << -1, 0;
  const Matrix c = canonicalize_grassmann(StiefelPoint(q)).matrix();
  EXPECT_NEAR(c(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(c(1, 0), 0.0, 1e-15);
}

TEST(Canonicalize, PreservesProjectorAndIsIdempotent) {
  Rng rng(20);
  for (int t = 0; t < 30; ++t) {
    const Matrix q = oracle::gram_schmidt_haar(8, 3, rng);
    const GrassmannPoint c = canonicalize_grassmann(StiefelPoint(q));
    ASSERT_LE(max_abs(projector(c.matrix()) - projector(q)), 1e-10);
    ASSERT_GT(Eigen::SelfAdjointEigenSolver<Matrix>(Matrix(c.q1())).eigenvalues().minCoeff(), 0.0);
    ASSERT_LE(max_abs(canonicalize_grassmann(c.as_stiefel()).matrix() - c.matrix()), 1e-10);
  }
}

TEST(Canonicalize, SingularTopBlockThrows) {
  Matrix q = Matrix::Zero(3, 1);
  q(2, 0) = 1.0;
  EXPECT_THROW(canonicalize_grassmann(StiefelPoint(q)), DomainError);
}

TEST(DomainMargin, Values) {
  EXPECT_DOUBLE_EQ(grassmann_domain_margin(GrassmannCoords::zero(ManifoldDims(4, 2))), 1.0);
  EXPECT_NEAR(grassmann_domain_margin(GrassmannCoords(ManifoldDims(2, 1), Vector::Constant(1, 0.6))), 0.64, 1e-15);
}
