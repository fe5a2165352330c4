#include "cayley/special_matrices.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

namespace cayley {

namespace {

using SparseInt = Eigen::SparseMatrix<int>;

void require_positive(Index n, const char* what) {
  if (n < 1) throw DimensionError(std::string(what) + " must be at least 1");
}

void require_stiefel_dims(Index p, Index k) {
  if (k < 1 || k >= p) {
    throw DimensionError("need 1 <= k < p, got p=" + std::to_string(p) +
                         " k=" + std::to_string(k));
  }
}

// Theta_1 = [I_k 0] (k x p) and Theta_2 = [0 I_{p-k}] ((p-k) x p).
SparseInt selector(Index rows, Index p, Index offset) {
  SparseInt s(rows, p);
  std::vector<Eigen::Triplet<int>> t;
  t.reserve(static_cast<std::size_t>(rows));
  for (Index i = 0; i < rows; ++i) t.emplace_back(i, offset + i, 1);
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

SparseInt permutation_to_sparse(const PermutationMap& perm) {
  const auto n = static_cast<Index>(perm.size);
  SparseInt k(n, n);
  std::vector<Eigen::Triplet<int>> t;
  t.reserve(perm.size);
  for (std::size_t s = 0; s < perm.size; ++s) {
    t.emplace_back(static_cast<Index>(perm.target_index[s]), static_cast<Index>(s), 1);
  }
  k.setFromTriplets(t.begin(), t.end());
  return k;
}

SparseInt identity(Index n) {
  SparseInt id(n, n);
  id.setIdentity();
  return id;
}

// (I_{p^2} - K_{p,p})(Theta_1^T (x) Theta_2^T)
SparseInt a_block_embedding(Index p, Index k) {
  const SparseInt theta1_t = SparseInt(selector(k, p, 0).transpose());
  const SparseInt theta2_t = SparseInt(selector(p - k, p, k).transpose());
  const SparseInt kron = Eigen::kroneckerProduct(theta1_t, theta2_t).eval();
  const SparseInt antisym = identity(p * p) - permutation_to_sparse(commutation_matrix(p, p));
  SparseInt out = antisym * kron;
  out.prune(0);
  return out;
}

}  // namespace

Vector PermutationMap::apply(const Vector& v) const {
  if (static_cast<std::size_t>(v.size()) != size) {
    throw DimensionError("permutation of size " + std::to_string(size) +
                         " applied to vector of length " + std::to_string(v.size()));
  }
  Vector out(v.size());
  for (std::size_t s = 0; s < size; ++s) out(static_cast<Index>(target_index[s])) = v(static_cast<Index>(s));
  return out;
}

Eigen::MatrixXi PermutationMap::to_dense() const {
  const auto n = static_cast<Index>(size);
  Eigen::MatrixXi m = Eigen::MatrixXi::Zero(n, n);
  for (std::size_t s = 0; s < size; ++s) m(static_cast<Index>(target_index[s]), static_cast<Index>(s)) = 1;
  return m;
}

bool PermutationMap::is_bijection() const {
  if (target_index.size() != size) return false;
  std::vector<bool> seen(size, false);
  for (auto t : target_index) {
    if (t >= size || seen[t]) return false;
    seen[t] = true;
  }
  return true;
}

SparseSignMatrix::SparseSignMatrix(Index rows, Index cols, std::vector<SignEntry> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(), [](const SignEntry& a, const SignEntry& b) {
    return a.col != b.col ? a.col < b.col : a.row < b.row;
  });
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.row < 0 || e.row >= rows_ || e.col < 0 || e.col >= cols_) {
      throw DimensionError("sign matrix entry out of range");
    }
    if (e.value != 1 && e.value != -1) throw DimensionError("sign matrix entry is not +-1");
    if (i > 0 && entries_[i - 1].row == e.row && entries_[i - 1].col == e.col) {
      throw DimensionError("duplicate sign matrix entry");
    }
  }
}

SparseSignMatrix SparseSignMatrix::from_sparse(const SparseInt& m) {
  std::vector<SignEntry> entries;
  for (Index j = 0; j < m.outerSize(); ++j) {
    for (SparseInt::InnerIterator it(m, j); it; ++it) {
      if (it.value() == 0) continue;
      entries.push_back({it.row(), it.col(), it.value()});
    }
  }
  return SparseSignMatrix(m.rows(), m.cols(), std::move(entries));
}

std::vector<SignEntry> SparseSignMatrix::column(Index j) const {
  auto lo = std::lower_bound(entries_.begin(), entries_.end(), j,
                             [](const SignEntry& e, Index c) { return e.col < c; });
  std::vector<SignEntry> out;
  for (; lo != entries_.end() && lo->col == j; ++lo) out.push_back(*lo);
  return out;
}

Vector SparseSignMatrix::multiply(const Vector& x) const {
  if (x.size() != cols_) throw DimensionError("sign matrix multiply: length mismatch");
  Vector y = Vector::Zero(rows_);
  for (const auto& e : entries_) y(e.row) += e.value * x(e.col);
  return y;
}

Eigen::MatrixXi SparseSignMatrix::to_dense() const {
  Eigen::MatrixXi m = Eigen::MatrixXi::Zero(rows_, cols_);
  for (const auto& e : entries_) m(e.row, e.col) = e.value;
  return m;
}

SparseInt SparseSignMatrix::to_sparse() const {
  SparseInt m(rows_, cols_);
  std::vector<Eigen::Triplet<int>> t;
  t.reserve(entries_.size());
  for (const auto& e : entries_) t.emplace_back(e.row, e.col, e.value);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

PermutationMap commutation_matrix(Index m, Index n) {
  require_positive(m, "m");
  require_positive(n, "n");
  PermutationMap perm;
  perm.size = static_cast<std::size_t>(m * n);
  perm.target_index.resize(perm.size);
  // A(i, j) sits at j*m + i in vec(A) and at i*n + j in vec(A^T).
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < m; ++i) {
      perm.target_index[static_cast<std::size_t>(j * m + i)] = static_cast<std::size_t>(i * n + j);
    }
  }
  return perm;
}

SparseSignMatrix dtilde_matrix(Index n) {
  require_positive(n, "n");
  std::vector<SignEntry> entries;
  for (Index j = 0; j < n; ++j) {
    for (Index i = j + 1; i < n; ++i) {
      // 1-based column (j-1)n + i - j(j+1)/2, written for 0-based i, j.
      const Index col = j * n + i - (j + 1) * (j + 2) / 2;
      entries.push_back({j * n + i, col, +1});
      entries.push_back({i * n + j, col, -1});
    }
  }
  return SparseSignMatrix(n * n, n * (n - 1) / 2, std::move(entries));
}

Vector vech_strict(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("vech_strict: matrix is not square");
  const Index n = m.rows();
  Vector b(n * (n - 1) / 2);
  Index pos = 0;
  for (Index j = 0; j < n; ++j) {
    for (Index i = j + 1; i < n; ++i) b(pos++) = m(i, j);
  }
  return b;
}

Matrix skew_from_vech(const Vector& b, Index n) {
  require_positive(n, "n");
  if (b.size() != n * (n - 1) / 2) {
    throw DimensionError("skew_from_vech: expected length " + std::to_string(n * (n - 1) / 2) +
                         ", got " + std::to_string(b.size()));
  }
  Matrix s = Matrix::Zero(n, n);
  Index pos = 0;
  for (Index j = 0; j < n; ++j) {
    for (Index i = j + 1; i < n; ++i) {
      s(i, j) = b(pos);
      s(j, i) = -b(pos);
      ++pos;
    }
  }
  return s;
}

SparseSignMatrix gamma_stiefel(Index p, Index k) {
  require_stiefel_dims(p, k);
  const SparseInt theta1_t = SparseInt(selector(k, p, 0).transpose());
  const SparseInt b_part = SparseInt(Eigen::kroneckerProduct(theta1_t, theta1_t).eval()) *
                           dtilde_matrix(k).to_sparse();
  const SparseInt a_part = a_block_embedding(p, k);

  const Index d_b = b_part.cols();
  std::vector<SignEntry> entries;
  for (Index j = 0; j < b_part.outerSize(); ++j) {
    for (SparseInt::InnerIterator it(b_part, j); it; ++it) {
      if (it.value() != 0) entries.push_back({it.row(), it.col(), it.value()});
    }
  }
  for (Index j = 0; j < a_part.outerSize(); ++j) {
    for (SparseInt::InnerIterator it(a_part, j); it; ++it) {
      if (it.value() != 0) entries.push_back({it.row(), d_b + it.col(), it.value()});
    }
  }
  return SparseSignMatrix(p * p, d_b + a_part.cols(), std::move(entries));
}

SparseSignMatrix gamma_grassmann(Index p, Index k) {
  require_stiefel_dims(p, k);
  return SparseSignMatrix::from_sparse(a_block_embedding(p, k));
}

}  // namespace cayley
