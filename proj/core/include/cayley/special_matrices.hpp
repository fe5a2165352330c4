#pragma once

// Integer structural matrices behind the Cayley derivative formulas.
//
// Vectorization is column-major everywhere: vec(A) stacks the columns of A,
// so entry (i, j) of an m x n matrix sits at position j * m + i.

#include <cstddef>
#include <vector>

#include <Eigen/SparseCore>

#include "cayley/types.hpp"

namespace cayley {

/// A permutation of {0, ..., size-1}; position s of the input lands at
/// target_index[s] of the output.
struct PermutationMap {
  std::size_t size = 0;
  std::vector<std::size_t> target_index;

  Vector apply(const Vector& v) const;
  Eigen::MatrixXi to_dense() const;
  bool is_bijection() const;
};

struct SignEntry {
  Index row;
  Index col;
  int value;  // -1 or +1
};

/// Sparse matrix whose stored entries are all +1 or -1, at most one per cell.
class SparseSignMatrix {
 public:
  SparseSignMatrix(Index rows, Index cols, std::vector<SignEntry> entries);

  /// Converts an integer sparse matrix, dropping explicit zeros. Throws
  /// DimensionError if any remaining value is not +-1.
  static SparseSignMatrix from_sparse(const Eigen::SparseMatrix<int>& m);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  const std::vector<SignEntry>& entries() const { return entries_; }

  /// Entries of column j, ordered by row.
  std::vector<SignEntry> column(Index j) const;

  Vector multiply(const Vector& x) const;
  Eigen::MatrixXi to_dense() const;
  Eigen::SparseMatrix<int> to_sparse() const;

 private:
  Index rows_;
  Index cols_;
  std::vector<SignEntry> entries_;  // sorted by (col, row)
};

/// K_{m,n}: the permutation with K vec(A) = vec(A^T) for every m x n matrix A.
PermutationMap commutation_matrix(Index m, Index n);

/// The n^2 x n(n-1)/2 matrix mapping vech_strict(A) to vec(A) for skew A.
SparseSignMatrix dtilde_matrix(Index n);

/// Strictly subdiagonal entries of a square matrix, column by column.
Vector vech_strict(const Matrix& m);

/// The skew-symmetric matrix whose strictly subdiagonal part is b.
Matrix skew_from_vech(const Vector& b, Index n);

/// Gamma_V with vec(X_phi) = Gamma_V phi for the Stiefel coordinates
/// phi = (b, vec(A)).
SparseSignMatrix gamma_stiefel(Index p, Index k);

/// Gamma_G with vec(X_psi) = Gamma_G psi for psi = vec(A).
SparseSignMatrix gamma_grassmann(Index p, Index k);

}  // namespace cayley
