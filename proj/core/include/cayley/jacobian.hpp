#pragma once

// Derivatives of the Cayley maps and the log-Jacobian terms
//     log J(phi) = 1/2 log det(DC(phi)^T DC(phi)).
//
// Two routes are provided: a naive one that forms the pk x d derivative
// matrix and factors its Gram matrix, and a block route that assembles the
// Gram matrix 4 * [[Omega11, Omega12], [Omega21, Omega22]] directly from the
// blocks of C = (I_p - X)^{-1} and factors Omega22 and its Schur complement.
//
// Away from the identity, every block of Omega22 except G11 (x) I_{p-k} acts
// inside span(I_k (x) A). Writing A = Q_A R with R upper triangular k x k,
// Omega22 splits into a k^2 x k^2 core (the same matrix built with A -> R)
// and G11 (x) I_{p-2k}, while Omega12 lives in the core. Hence for p >= 2k
//   log J_p(A, B) = log J_{2k}(R, B) + (d(p) - d(2k)) log 2
//                   - (p - 2k) log |det(I - B + A^T A)|,
// which is what the block route evaluates.

#include "cayley/cayley.hpp"

namespace cayley {

/// Blocks of C = (I - X)^{-1}, G = C I_{pk} I_{pk}^T C^T, H = C^T C and of
/// the reduced Gram matrix Omega (DC^T DC = 4 Omega). Block 1 is the leading
/// k rows/columns, block 2 the trailing p-k. Omega rows/columns follow the
/// coordinate order: b first, then vec(A).
struct JacobianBlocks {
  Matrix c11, c12, c21, c22;
  Matrix g11, g12, g21, g22;
  Matrix h11, h12, h21, h22;
  Matrix omega11, omega12, omega21, omega22;
};

/// pk x d_V derivative matrix of phi -> vec(C(phi)).
Matrix derivative_stiefel(const StiefelCoords& phi);
/// pk x d_G derivative matrix of psi -> vec(C(psi)); throws DomainError
/// outside the Grassmann domain.
Matrix derivative_grassmann(const GrassmannCoords& psi);

/// 1/2 log det(D^T D). Throws NumericalError if D is rank deficient at
/// working precision.
double log_jacobian_naive(const Matrix& d);

JacobianBlocks jacobian_blocks_stiefel(const StiefelCoords& phi);
JacobianBlocks jacobian_blocks_grassmann(const GrassmannCoords& psi);

/// d log 2 + 1/2 log det(Omega22) + 1/2 log det(Omega11 - Omega12 Omega22^{-1} Omega21)
/// from fully assembled blocks; d is the coordinate dimension.
double log_jacobian_from_blocks(const JacobianBlocks& blocks, Index d);

/// d_V log 2 + 1/2 log det(Omega22) + 1/2 log det(Omega11 - Omega12 Omega22^{-1} Omega21)
double log_jacobian_block_stiefel(const StiefelCoords& phi);
/// d_G log 2 + 1/2 log det(Omega22) with B = 0.
double log_jacobian_block_grassmann(const GrassmannCoords& psi);

/// The same quantities with the full (p-k)k square Omega22 factored.
double log_jacobian_dense_block_stiefel(const StiefelCoords& phi);
double log_jacobian_dense_block_grassmann(const GrassmannCoords& psi);

/// Gradient of the block log-Jacobian by central differences with step h.
/// For p >= 2k the differences are taken in (A^T A, B), on which log J
/// depends, and mapped back to the coordinates by the chain rule; this needs
/// 2k^2 small evaluations instead of 2d full ones. Near rank-deficient A^T A
/// the coordinates are differenced directly. Entries are non-finite when a
/// difference stencil leaves the Grassmann domain.
Vector log_jacobian_gradient_stiefel(const StiefelCoords& phi, double h);
Vector log_jacobian_gradient_grassmann(const GrassmannCoords& psi, double h);

/// DC(phi)^T vec(w) for a p x k matrix w, without forming DC.
Vector derivative_transpose_apply(const StiefelCoords& phi, const Matrix& w);
Vector derivative_transpose_apply(const GrassmannCoords& psi, const Matrix& w);

}  // namespace cayley
