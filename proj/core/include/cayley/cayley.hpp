#pragma once

// Cayley parametrizations of the Stiefel manifold V(k,p) and of V+(k,p),
// the orthonormal frames with a symmetric positive definite top block that
// represent the Grassmann manifold.
//
// Stiefel coordinates phi = (b, vec(A)) fill the skew matrix
//     X = [ B  -A^T ]
//         [ A   0   ]
// with B = skew_from_vech(b, k); Grassmann coordinates psi = vec(A) use B = 0
// and must satisfy eval_i(A^T A) < 1. The forward map is
// C(X) = (I + X)(I - X)^{-1} I_{p x k}, evaluated through k x k solves.

#include "cayley/types.hpp"

namespace cayley {

/// Linear solves are declared failed below this reciprocal condition number.
inline constexpr double kMinReciprocalCondition = 1e-14;
/// Orthonormality tolerance, max-entry norm of Q^T Q - I.
inline constexpr double kOrthonormalityTolerance = 1e-10;
/// Smallest admissible eigenvalue of a symmetrized SPD top block.
inline constexpr double kSpdTolerance = 1e-12;

class ManifoldDims {
 public:
  /// Throws DimensionError unless 1 <= k < p.
  ManifoldDims(Index p, Index k);

  Index p() const { return p_; }
  Index k() const { return k_; }
  /// pk - k(k+1)/2
  Index stiefel_dim() const { return p_ * k_ - k_ * (k_ + 1) / 2; }
  /// (p-k)k
  Index grassmann_dim() const { return (p_ - k_) * k_; }
  /// k(k-1)/2, the length of b.
  Index skew_dim() const { return k_ * (k_ - 1) / 2; }

  friend bool operator==(const ManifoldDims&, const ManifoldDims&) = default;

 private:
  Index p_;
  Index k_;
};

class StiefelCoords {
 public:
  StiefelCoords(ManifoldDims dims, Vector phi);
  static StiefelCoords zero(ManifoldDims dims);

  const ManifoldDims& dims() const { return dims_; }
  const Vector& values() const { return phi_; }
  auto b() const { return phi_.head(dims_.skew_dim()); }
  /// The (p-k) x k block A.
  Matrix a() const;
  /// The k x k skew block B.
  Matrix b_matrix() const;

 private:
  ManifoldDims dims_;
  Vector phi_;
};

class GrassmannCoords {
 public:
  GrassmannCoords(ManifoldDims dims, Vector psi);
  static GrassmannCoords zero(ManifoldDims dims);

  const ManifoldDims& dims() const { return dims_; }
  const Vector& values() const { return psi_; }
  Matrix a() const;

 private:
  ManifoldDims dims_;
  Vector psi_;
};

class StiefelPoint {
 public:
  /// Validates orthonormal columns; throws DomainError otherwise.
  explicit StiefelPoint(Matrix q);
  static StiefelPoint identity(ManifoldDims dims);

  const ManifoldDims& dims() const { return dims_; }
  const Matrix& matrix() const { return q_; }
  auto q1() const { return q_.topRows(dims_.k()); }
  auto q2() const { return q_.bottomRows(dims_.p() - dims_.k()); }

 private:
  ManifoldDims dims_;
  Matrix q_;
};

class GrassmannPoint {
 public:
  /// Validates orthonormal columns and an SPD top block; throws DomainError.
  explicit GrassmannPoint(Matrix q);
  static GrassmannPoint identity(ManifoldDims dims);

  const ManifoldDims& dims() const { return dims_; }
  const Matrix& matrix() const { return q_; }
  auto q1() const { return q_.topRows(dims_.k()); }
  auto q2() const { return q_.bottomRows(dims_.p() - dims_.k()); }
  StiefelPoint as_stiefel() const { return StiefelPoint(q_); }

 private:
  ManifoldDims dims_;
  Matrix q_;
};

/// max |Q^T Q - I|
double orthonormality_error(const Matrix& q);

/// The p x p skew matrix X_phi.
Matrix embed_skew(const StiefelCoords& phi);
/// The p x p skew matrix X_psi (zero top-left block).
Matrix embed_skew(const GrassmannCoords& psi);

StiefelPoint cayley_forward_stiefel(const StiefelCoords& phi);
/// Throws DomainError when I_k + Q_1 is singular.
StiefelCoords cayley_inverse_stiefel(const StiefelPoint& q);

/// Throws DomainError when some eigenvalue of A^T A is >= 1.
GrassmannPoint cayley_forward_grassmann(const GrassmannCoords& psi);
GrassmannCoords cayley_inverse_grassmann(const GrassmannPoint& q);

/// Rotates Q within its column space so that the top block becomes SPD:
/// with Q_1 = U D V^T, returns Q V U^T. Throws DomainError when Q_1 is
/// numerically singular.
GrassmannPoint canonicalize_grassmann(const StiefelPoint& q);

/// 1 - max_i eval_i(A^T A); positive exactly on the Grassmann domain.
double grassmann_domain_margin(const GrassmannCoords& psi);

}  // namespace cayley
