#include "cayley/cayley.hpp"

#include <cmath>
#include <string>

#include "cayley/special_matrices.hpp"

namespace cayley {

namespace {

// Solves X M = R for X, i.e. X = R M^{-1}, via the transposed system.
Matrix right_solve(const Matrix& m, const Matrix& r, const char* what) {
  Eigen::PartialPivLU<Matrix> lu(m.transpose());
  const double rcond = lu.rcond();
  if (!(rcond >= kMinReciprocalCondition)) {
    throw NumericalError(std::string(what) + ": reciprocal condition number " +
                         std::to_string(rcond) + " below cutoff");
  }
  return lu.solve(r.transpose()).transpose();
}

ManifoldDims dims_of(const Matrix& q) { return ManifoldDims(q.rows(), q.cols()); }

void check_orthonormal(const Matrix& q) {
  const double err = orthonormality_error(q);
  if (!(err <= kOrthonormalityTolerance)) {
    throw DomainError("columns are not orthonormal: max |Q^T Q - I| = " + std::to_string(err));
  }
}

Matrix symmetric_part(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double min_eigenvalue_symmetric(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetric_part(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

ManifoldDims::ManifoldDims(Index p, Index k) : p_(p), k_(k) {
  if (k < 1 || k >= p) {
    throw DimensionError("need 1 <= k < p, got p=" + std::to_string(p) + " k=" + std::to_string(k));
  }
}

StiefelCoords::StiefelCoords(ManifoldDims dims, Vector phi) : dims_(dims), phi_(std::move(phi)) {
  if (phi_.size() != dims_.stiefel_dim()) {
    throw DimensionError("Stiefel coordinates: expected length " +
                         std::to_string(dims_.stiefel_dim()) + ", got " +
                         std::to_string(phi_.size()));
  }
}

StiefelCoords StiefelCoords::zero(ManifoldDims dims) {
  return StiefelCoords(dims, Vector::Zero(dims.stiefel_dim()));
}

Matrix StiefelCoords::a() const {
  const Index m = dims_.p() - dims_.k();
  return Eigen::Map<const Matrix>(phi_.data() + dims_.skew_dim(), m, dims_.k());
}

Matrix StiefelCoords::b_matrix() const { return skew_from_vech(b(), dims_.k()); }

GrassmannCoords::GrassmannCoords(ManifoldDims dims, Vector psi) : dims_(dims), psi_(std::move(psi)) {
  if (psi_.size() != dims_.grassmann_dim()) {
    throw DimensionError("Grassmann coordinates: expected length " +
                         std::to_string(dims_.grassmann_dim()) + ", got " +
                         std::to_string(psi_.size()));
  }
}

GrassmannCoords GrassmannCoords::zero(ManifoldDims dims) {
  return GrassmannCoords(dims, Vector::Zero(dims.grassmann_dim()));
}

Matrix GrassmannCoords::a() const {
  return Eigen::Map<const Matrix>(psi_.data(), dims_.p() - dims_.k(), dims_.k());
}

double orthonormality_error(const Matrix& q) {
  const Matrix gram = q.transpose() * q;
  return (gram - Matrix::Identity(q.cols(), q.cols())).cwiseAbs().maxCoeff();
}

StiefelPoint::StiefelPoint(Matrix q) : dims_(dims_of(q)), q_(std::move(q)) { check_orthonormal(q_); }

StiefelPoint StiefelPoint::identity(ManifoldDims dims) {
  return StiefelPoint(Matrix::Identity(dims.p(), dims.k()));
}

GrassmannPoint::GrassmannPoint(Matrix q) : dims_(dims_of(q)), q_(std::move(q)) {
  check_orthonormal(q_);
  const Matrix top = q_.topRows(dims_.k());
  const double asym = (top - top.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= kOrthonormalityTolerance)) {
    throw DomainError("top block is not symmetric: max asymmetry " + std::to_string(asym));
  }
  const double lo = min_eigenvalue_symmetric(top);
  if (!(lo > kSpdTolerance)) {
    throw DomainError("top block is not positive definite: smallest eigenvalue " +
                      std::to_string(lo));
  }
}

GrassmannPoint GrassmannPoint::identity(ManifoldDims dims) {
  return GrassmannPoint(Matrix::Identity(dims.p(), dims.k()));
}

Matrix embed_skew(const StiefelCoords& phi) {
  const Index p = phi.dims().p();
  const Index k = phi.dims().k();
  const Matrix a = phi.a();
  Matrix x = Matrix::Zero(p, p);
  x.topLeftCorner(k, k) = phi.b_matrix();
  x.bottomLeftCorner(p - k, k) = a;
  x.topRightCorner(k, p - k) = -a.transpose();
  return x;
}

Matrix embed_skew(const GrassmannCoords& psi) {
  const Index p = psi.dims().p();
  const Index k = psi.dims().k();
  const Matrix a = psi.a();
  Matrix x = Matrix::Zero(p, p);
  x.bottomLeftCorner(p - k, k) = a;
  x.topRightCorner(k, p - k) = -a.transpose();
  return x;
}

StiefelPoint cayley_forward_stiefel(const StiefelCoords& phi) {
  const Index p = phi.dims().p();
  const Index k = phi.dims().k();
  if (!phi.values().allFinite()) throw DomainError("Stiefel coordinates are not finite");
  const Matrix a = phi.a();
  const Matrix b = phi.b_matrix();
  const Matrix ata = a.transpose() * a;
  const Matrix id = Matrix::Identity(k, k);

  // Q1 = (I - A^T A + B) M^{-1}, Q2 = 2 A M^{-1}, M = I + A^T A - B.
  const Matrix m = id + ata - b;
  Matrix rhs(p, k);
  rhs.topRows(k) = id - ata + b;
  rhs.bottomRows(p - k) = 2.0 * a;
  Matrix q = right_solve(m, rhs, "Cayley forward solve");
  const double err = orthonormality_error(q);
  if (!(err <= kOrthonormalityTolerance)) {
    throw NumericalError("Cayley forward map lost orthonormality (error " + std::to_string(err) +
                         ")");
  }
  return StiefelPoint(std::move(q));
}

StiefelCoords cayley_inverse_stiefel(const StiefelPoint& q) {
  const ManifoldDims dims = q.dims();
  const Index k = dims.k();
  const Matrix q1 = q.q1();
  const Matrix id = Matrix::Identity(k, k);
  const Matrix shifted = id + q1;
  Eigen::PartialPivLU<Matrix> lu(shifted.transpose());
  if (!(lu.rcond() >= kMinReciprocalCondition)) {
    throw DomainError("inverse Cayley map undefined: I_k + Q_1 is singular");
  }
  // F = (I - Q1)(I + Q1)^{-1}
  const Matrix f = lu.solve((id - q1).transpose()).transpose();
  const Matrix b = 0.5 * (f.transpose() - f);
  const Matrix a = 0.5 * q.q2() * (id + f);

  Vector phi(dims.stiefel_dim());
  phi.head(dims.skew_dim()) = vech_strict(b);
  phi.tail(dims.grassmann_dim()) = Eigen::Map<const Vector>(a.data(), a.size());
  return StiefelCoords(dims, std::move(phi));
}

double grassmann_domain_margin(const GrassmannCoords& psi) {
  const Matrix a = psi.a();
  const Matrix ata = a.transpose() * a;
  Eigen::SelfAdjointEigenSolver<Matrix> es(ata, Eigen::EigenvaluesOnly);
  return 1.0 - es.eigenvalues().maxCoeff();
}

GrassmannPoint cayley_forward_grassmann(const GrassmannCoords& psi) {
  const Index p = psi.dims().p();
  const Index k = psi.dims().k();
  if (!psi.values().allFinite()) throw DomainError("Grassmann coordinates are not finite");
  const double margin = grassmann_domain_margin(psi);
  if (!(margin > 0.0)) {
    throw DomainError("Grassmann coordinates outside the domain: max eigenvalue of A^T A is " +
                      std::to_string(1.0 - margin));
  }
  const Matrix a = psi.a();
  const Matrix ata = a.transpose() * a;
  const Matrix id = Matrix::Identity(k, k);
  Matrix rhs(p, k);
  rhs.topRows(k) = id - ata;
  rhs.bottomRows(p - k) = 2.0 * a;
  Matrix q = right_solve(id + ata, rhs, "Grassmann forward solve");
  // Q1 = (I - S)(I + S)^{-1} is symmetric in exact arithmetic; remove rounding.
  q.topRows(k) = symmetric_part(q.topRows(k));
  return GrassmannPoint(std::move(q));
}

GrassmannCoords cayley_inverse_grassmann(const GrassmannPoint& q) {
  const ManifoldDims dims = q.dims();
  const Index k = dims.k();
  const Matrix q1 = q.q1();
  const Matrix id = Matrix::Identity(k, k);
  Eigen::PartialPivLU<Matrix> lu((id + q1).transpose());
  if (!(lu.rcond() >= kMinReciprocalCondition)) {
    throw NumericalError("Grassmann inverse: I_k + Q_1 is ill-conditioned");
  }
  const Matrix f = lu.solve((id - q1).transpose()).transpose();
  const Matrix a = 0.5 * q.q2() * (id + f);
  return GrassmannCoords(dims, Eigen::Map<const Vector>(a.data(), a.size()));
}

GrassmannPoint canonicalize_grassmann(const StiefelPoint& q) {
  const Index k = q.dims().k();
  const Matrix q1 = q.q1();
  Eigen::JacobiSVD<Matrix> svd(q1, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double smallest = svd.singularValues()(k - 1);
  if (!(smallest >= kSpdTolerance)) {
    throw DomainError("cannot canonicalize: top block is singular (smallest singular value " +
                      std::to_string(smallest) + ")");
  }
  Matrix out = q.matrix() * (svd.matrixV() * svd.matrixU().transpose());
  out.topRows(k) = symmetric_part(out.topRows(k));
  return GrassmannPoint(std::move(out));
}

}  // namespace cayley
