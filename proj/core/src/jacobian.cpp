#include "cayley/jacobian.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "cayley/special_matrices.hpp"

namespace cayley {

namespace {

// C11 = (I - B + A^T A)^{-1}; the remaining blocks follow from it.
struct Resolvent {
  Matrix c11, c12, c21, c22;
};

Resolvent resolvent_blocks(const Matrix& a, const Matrix& b) {
  const Index k = a.cols();
  const Index m = a.rows();
  const Matrix id = Matrix::Identity(k, k);
  Eigen::PartialPivLU<Matrix> lu(id - b + a.transpose() * a);
  if (!(lu.rcond() >= kMinReciprocalCondition)) {
    throw NumericalError("resolvent block I - B + A^T A is ill-conditioned");
  }
  Resolvent r;
  r.c11 = lu.inverse();
  r.c12 = -r.c11 * a.transpose();
  r.c21 = a * r.c11;
  r.c22 = Matrix::Identity(m, m) - a * r.c11 * a.transpose();
  return r;
}

Matrix assemble_resolvent(const Resolvent& r) {
  const Index k = r.c11.rows();
  const Index m = r.c22.rows();
  Matrix c(k + m, k + m);
  c.topLeftCorner(k, k) = r.c11;
  c.topRightCorner(k, m) = r.c12;
  c.bottomLeftCorner(m, k) = r.c21;
  c.bottomRightCorner(m, m) = r.c22;
  return c;
}

// Columns of the derivative: 2 vec(C E C[:, :k]) for each column E of Gamma.
Matrix derivative_from_gamma(const Matrix& c, Index k, const SparseSignMatrix& gamma) {
  const Index p = c.rows();
  const Matrix c1 = c.leftCols(k);
  Matrix d = Matrix::Zero(p * k, gamma.cols());
  Matrix col(p, k);
  for (Index j = 0; j < gamma.cols(); ++j) {
    col.setZero();
    for (const auto& e : gamma.column(j)) {
      const Index r = e.row % p;
      const Index s = e.row / p;
      col.noalias() += static_cast<double>(e.value) * c.col(r) * c1.row(s);
    }
    d.col(j) = 2.0 * Eigen::Map<const Vector>(col.data(), col.size());
  }
  return d;
}

// log det of a symmetric positive definite matrix. Cholesky first; a pivoted
// LDL^T is tried when Cholesky breaks down.
double log_det_spd(const Matrix& m, const char* what) {
  if (m.size() == 0) return 0.0;
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() == Eigen::Success) {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  }
  Eigen::LDLT<Matrix> ldlt(m);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
    const Vector d = ldlt.vectorD();
    if ((d.array() > 0.0).all()) return d.array().log().sum();
  }
  throw NumericalError(std::string(what) + " is not positive definite");
}

Matrix omega22_from_blocks(const JacobianBlocks& jb) {
  const Index k = jb.g11.rows();
  const Index m = jb.h22.rows();
  Matrix omega(m * k, m * k);
  // Row (j, i) <-> coordinate A(i, j); rank-one terms carry the commutation.
  for (Index j = 0; j < k; ++j) {
    for (Index jp = 0; jp < k; ++jp) {
      auto blk = omega.block(j * m, jp * m, m, m);
      blk = jb.g11(j, jp) * jb.h22 + jb.h11(j, jp) * jb.g22;
      blk.noalias() -= jb.h21.col(jp) * jb.g12.row(j);
      blk.noalias() -= jb.g21.col(jp) * jb.h12.row(j);
    }
  }
  return omega;
}

// Strictly-lower pairs (a, c), a > c, in vech_strict order.
std::vector<std::pair<Index, Index>> lower_pairs(Index k) {
  std::vector<std::pair<Index, Index>> out;
  for (Index c = 0; c < k; ++c) {
    for (Index a = c + 1; a < k; ++a) out.emplace_back(a, c);
  }
  return out;
}

JacobianBlocks blocks_from(const Matrix& a, const Matrix& b, bool with_b_blocks) {
  const Index k = a.cols();
  const Index m = a.rows();
  const Resolvent r = resolvent_blocks(a, b);
  JacobianBlocks jb;
  jb.c11 = r.c11;
  jb.c12 = r.c12;
  jb.c21 = r.c21;
  jb.c22 = r.c22;

  jb.h11 = r.c11.transpose() * r.c11 + r.c21.transpose() * r.c21;
  jb.h12 = r.c11.transpose() * r.c12 + r.c21.transpose() * r.c22;
  jb.h21 = jb.h12.transpose();
  jb.h22 = r.c12.transpose() * r.c12 + r.c22.transpose() * r.c22;

  jb.g11 = r.c11 * r.c11.transpose();
  jb.g12 = r.c11 * r.c21.transpose();
  jb.g21 = jb.g12.transpose();
  jb.g22 = r.c21 * r.c21.transpose();

  jb.omega22 = omega22_from_blocks(jb);

  const auto pairs = lower_pairs(with_b_blocks ? k : 0);
  const auto nb = static_cast<Index>(pairs.size());
  jb.omega11.resize(nb, nb);
  jb.omega12.resize(nb, m * k);
  for (Index u = 0; u < nb; ++u) {
    const auto [a1, c1] = pairs[static_cast<std::size_t>(u)];
    for (Index v = 0; v < nb; ++v) {
      const auto [a2, c2] = pairs[static_cast<std::size_t>(v)];
      jb.omega11(u, v) = jb.h11(a1, a2) * jb.g11(c2, c1) - jb.h11(a1, c2) * jb.g11(a2, c1) -
                         jb.h11(c1, a2) * jb.g11(c2, a1) + jb.h11(c1, c2) * jb.g11(a2, a1);
    }
    for (Index jp = 0; jp < k; ++jp) {
      for (Index ip = 0; ip < m; ++ip) {
        jb.omega12(u, jp * m + ip) =
            jb.h12(a1, ip) * jb.g11(jp, c1) - jb.h11(a1, jp) * jb.g21(ip, c1) -
            jb.h12(c1, ip) * jb.g11(jp, a1) + jb.h11(c1, jp) * jb.g21(ip, a1);
      }
    }
  }
  jb.omega21 = jb.omega12.transpose();
  return jb;
}

void require_grassmann_domain(const GrassmannCoords& psi) {
  const double margin = grassmann_domain_margin(psi);
  if (!(margin > 0.0)) {
    throw DomainError("Grassmann coordinates outside the domain (margin " +
                      std::to_string(margin) + ")");
  }
}

// DC^T vec(w) = 2 <E_j, C^T w C1^T> over the skew basis matrices E_j of the
// coordinates, read straight off the block layout of X.
Vector vjp(const Matrix& c, Index k, bool with_b, const Matrix& w) {
  const Index p = c.rows();
  const Index m = p - k;
  if (w.rows() != p || w.cols() != k) throw DimensionError("vector-Jacobian product: bad shape");
  const Matrix proj = c.transpose() * w * c.leftCols(k).transpose();
  const Index nb = with_b ? k * (k - 1) / 2 : 0;
  Vector out(nb + m * k);
  Index pos = 0;
  for (Index col = 0; with_b && col < k; ++col) {
    for (Index row = col + 1; row < k; ++row) out(pos++) = 2.0 * (proj(row, col) - proj(col, row));
  }
  for (Index j = 0; j < k; ++j) {
    for (Index i = 0; i < m; ++i) out(pos++) = 2.0 * (proj(k + i, j) - proj(j, k + i));
  }
  return out;
}

constexpr double kLn2 = std::numbers::ln2;

// A = Q_A R with R square upper triangular; R^T R = A^T A.
Matrix reduce(const Matrix& a) {
  const Index k = a.cols();
  Eigen::HouseholderQR<Matrix> qr(a);
  return qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
}

}  // namespace

Matrix derivative_stiefel(const StiefelCoords& phi) {
  const Index p = phi.dims().p();
  const Index k = phi.dims().k();
  const Matrix c = assemble_resolvent(resolvent_blocks(phi.a(), phi.b_matrix()));
  return derivative_from_gamma(c, k, gamma_stiefel(p, k));
}

Matrix derivative_grassmann(const GrassmannCoords& psi) {
  require_grassmann_domain(psi);
  const Index p = psi.dims().p();
  const Index k = psi.dims().k();
  const Matrix c = assemble_resolvent(resolvent_blocks(psi.a(), Matrix::Zero(k, k)));
  return derivative_from_gamma(c, k, gamma_grassmann(p, k));
}

double log_jacobian_naive(const Matrix& d) {
  if (d.cols() > d.rows()) throw NumericalError("derivative matrix has more columns than rows");
  Matrix gram = Matrix::Zero(d.cols(), d.cols());
  gram.selfadjointView<Eigen::Lower>().rankUpdate(d.transpose());
  gram = gram.selfadjointView<Eigen::Lower>();
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) throw NumericalError("derivative matrix is rank deficient");
  const Vector diag = llt.matrixLLT().diagonal();
  const double lo = diag.minCoeff();
  const double hi = diag.maxCoeff();
  if (!(lo * lo > static_cast<double>(d.cols()) * std::numeric_limits<double>::epsilon() * hi * hi)) {
    throw NumericalError("derivative matrix is rank deficient at working precision");
  }
  return diag.array().log().sum();
}

JacobianBlocks jacobian_blocks_stiefel(const StiefelCoords& phi) {
  return blocks_from(phi.a(), phi.b_matrix(), true);
}

JacobianBlocks jacobian_blocks_grassmann(const GrassmannCoords& psi) {
  require_grassmann_domain(psi);
  const Index k = psi.dims().k();
  return blocks_from(psi.a(), Matrix::Zero(k, k), false);
}

double log_jacobian_from_blocks(const JacobianBlocks& jb, Index dim) {
  const double d = static_cast<double>(dim);
  Matrix schur = jb.omega11;
  Eigen::LLT<Matrix> llt22(jb.omega22);
  double logdet22 = 0.0;
  if (llt22.info() == Eigen::Success) {
    logdet22 = 2.0 * llt22.matrixLLT().diagonal().array().log().sum();
    if (schur.size() > 0) schur.noalias() -= jb.omega12 * llt22.solve(jb.omega21);
  } else {
    logdet22 = log_det_spd(jb.omega22, "Omega22");
    if (schur.size() > 0) {
      Eigen::LDLT<Matrix> ldlt(jb.omega22);
      schur.noalias() -= jb.omega12 * ldlt.solve(jb.omega21);
    }
  }
  const double logdet_schur = log_det_spd(0.5 * (schur + schur.transpose()), "Schur complement");
  return d * kLn2 + 0.5 * (logdet22 + logdet_schur);
}

double log_jacobian_dense_block_stiefel(const StiefelCoords& phi) {
  return log_jacobian_from_blocks(jacobian_blocks_stiefel(phi), phi.dims().stiefel_dim());
}

double log_jacobian_dense_block_grassmann(const GrassmannCoords& psi) {
  return log_jacobian_from_blocks(jacobian_blocks_grassmann(psi), psi.dims().grassmann_dim());
}

namespace {

// log J on V(k, p) from the k x k factor R of A = Q_A R, for p >= 2k.
double reduced_log_jacobian(const Matrix& r, const Matrix& b, const ManifoldDims& dims, bool stiefel) {
  const Index k = dims.k();
  const Matrix m = Matrix::Identity(k, k) - b + r.transpose() * r;
  Eigen::PartialPivLU<Matrix> lu(m);
  if (!(lu.rcond() >= kMinReciprocalCondition)) {
    throw NumericalError("resolvent block I - B + A^T A is ill-conditioned");
  }
  const double log_abs_det = lu.matrixLU().diagonal().cwiseAbs().array().log().sum();
  const ManifoldDims core(2 * k, k);
  const Index d_full = stiefel ? dims.stiefel_dim() : dims.grassmann_dim();
  const Index d_core = stiefel ? core.stiefel_dim() : core.grassmann_dim();
  return log_jacobian_from_blocks(blocks_from(r, b, stiefel), d_core) +
         static_cast<double>(d_full - d_core) * kLn2 -
         static_cast<double>(dims.p() - 2 * k) * log_abs_det;
}

}  // namespace

double log_jacobian_block_stiefel(const StiefelCoords& phi) {
  const ManifoldDims& dims = phi.dims();
  if (dims.p() < 2 * dims.k()) return log_jacobian_dense_block_stiefel(phi);
  const Matrix b = phi.b_matrix();
  return reduced_log_jacobian(reduce(phi.a()), b, dims, true);
}

double log_jacobian_block_grassmann(const GrassmannCoords& psi) {
  require_grassmann_domain(psi);
  const ManifoldDims& dims = psi.dims();
  if (dims.p() < 2 * dims.k()) return log_jacobian_dense_block_grassmann(psi);
  return reduced_log_jacobian(reduce(psi.a()), Matrix::Zero(dims.k(), dims.k()), dims, false);
}

namespace {

// Central differences of f over every coordinate.
template <class F>
Vector coordinate_gradient(const Vector& x, double h, F&& f) {
  Vector g(x.size());
  Vector y = x;
  for (Index i = 0; i < x.size(); ++i) {
    y(i) = x(i) + h;
    const double up = f(y);
    y(i) = x(i) - h;
    const double down = f(y);
    y(i) = x(i);
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

// Stencil points must keep A^T A safely positive definite for Cholesky.
constexpr double kStencilMargin = 100.0;

// Gradient over (S, B) mapped back to (b, vec(A)). Returns false when S is
// too close to singular for the stencil.
bool reduced_gradient(const Matrix& a, const Matrix& b, const ManifoldDims& dims, bool stiefel,
                      double h, Vector& out) {
  const Index k = dims.k();
  const Index m = dims.p() - k;
  const Matrix s = a.transpose() * a;
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues().minCoeff() > kStencilMargin * h)) return false;
  auto eval = [&](const Matrix& ss, const Matrix& bb) {
    Eigen::LLT<Matrix> llt(ss);
    if (llt.info() != Eigen::Success) return std::numeric_limits<double>::quiet_NaN();
    const Matrix r = llt.matrixU();
    if (!stiefel) {
      Eigen::SelfAdjointEigenSolver<Matrix> ev(ss, Eigen::EigenvaluesOnly);
      if (!(ev.eigenvalues().maxCoeff() < 1.0)) return -std::numeric_limits<double>::infinity();
    }
    return reduced_log_jacobian(r, bb, dims, stiefel);
  };
  // d/dS over the upper triangle, with symmetric perturbations.
  Matrix gs = Matrix::Zero(k, k);
  for (Index j = 0; j < k; ++j) {
    for (Index i = 0; i <= j; ++i) {
      Matrix e = Matrix::Zero(k, k);
      e(i, j) = 1.0;
      e(j, i) = 1.0;
      const double d = (eval(s + h * e, b) - eval(s - h * e, b)) / (2.0 * h);
      if (i == j) {
        gs(i, i) = 2.0 * d;
      } else {
        gs(i, j) = d;
        gs(j, i) = d;
      }
    }
  }
  const Index nb = stiefel ? dims.skew_dim() : 0;
  out.resize(nb + m * k);
  Index pos = 0;
  for (Index c = 0; stiefel && c < k; ++c) {
    for (Index r = c + 1; r < k; ++r) {
      Matrix e = Matrix::Zero(k, k);
      e(r, c) = 1.0;
      e(c, r) = -1.0;
      out(pos++) = (eval(s, b + h * e) - eval(s, b - h * e)) / (2.0 * h);
    }
  }
  const Matrix ga = a * gs;
  out.tail(m * k) = Eigen::Map<const Vector>(ga.data(), ga.size());
  return true;
}

}  // namespace

Vector log_jacobian_gradient_stiefel(const StiefelCoords& phi, double h) {
  const ManifoldDims& dims = phi.dims();
  Vector g;
  if (dims.p() >= 2 * dims.k() && reduced_gradient(phi.a(), phi.b_matrix(), dims, true, h, g)) return g;
  return coordinate_gradient(phi.values(), h, [&](const Vector& y) {
    return log_jacobian_block_stiefel(StiefelCoords(dims, y));
  });
}

Vector log_jacobian_gradient_grassmann(const GrassmannCoords& psi, double h) {
  const ManifoldDims& dims = psi.dims();
  Vector g;
  if (dims.p() >= 2 * dims.k() &&
      reduced_gradient(psi.a(), Matrix::Zero(dims.k(), dims.k()), dims, false, h, g)) {
    return g;
  }
  return coordinate_gradient(psi.values(), h, [&](const Vector& y) {
    const GrassmannCoords q(dims, y);
    if (!(grassmann_domain_margin(q) > 0.0)) return -std::numeric_limits<double>::infinity();
    return log_jacobian_block_grassmann(q);
  });
}

Vector derivative_transpose_apply(const StiefelCoords& phi, const Matrix& w) {
  const Index k = phi.dims().k();
  const Matrix c = assemble_resolvent(resolvent_blocks(phi.a(), phi.b_matrix()));
  return vjp(c, k, true, w);
}

Vector derivative_transpose_apply(const GrassmannCoords& psi, const Matrix& w) {
  const Index k = psi.dims().k();
  const Matrix c = assemble_resolvent(resolvent_blocks(psi.a(), Matrix::Zero(k, k)));
  return vjp(c, k, false, w);
}

}  // namespace cayley
