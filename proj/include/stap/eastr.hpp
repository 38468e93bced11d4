#pragma once

#include "stap/core.hpp"

namespace stap {

// Linear equality constraints on the clutter eigenvalues that make
// R_c = V_r diag(lambda) V_r^H Toeplitz. One complex row per adjacent
// lower-triangle pair ((i,j),(i+1,j+1)); each complex row is stored as two
// real rows (real part, then imaginary part), since lambda is real.
struct ToeplitzConstraintSystem {
  RMat coefficients;         // N(N-1) x r
  int numeric_rank = 0;      // singular values above tolerance_used
  double tolerance_used = 0; // 1e-10 * largest singular value
};

// Builds the constraint system from the first `rank` columns of the sample
// eigenvector matrix v. Row k of complex constraint ((i,j),(i+1,j+1)) is
// v(i,k)*conj(v(j,k)) - v(i+1,k)*conj(v(j+1,k)).
ToeplitzConstraintSystem build_toeplitz_constraints(const CMat& v, int rank);

// Nearest system (Frobenius) of column rank r-1: zero the smallest singular
// value and reassemble. A system that is already rank-deficient is returned
// unchanged.
ToeplitzConstraintSystem reduce_rank_eckart_young(const ToeplitzConstraintSystem& c);

// Euclidean projection of lambda onto the nullspace of the constraints:
// lambda* = (I - P^T (P P^T)^{-1} P) lambda, with P a maximal independent
// row subset chosen by column-pivoted QR at the system's own tolerance.
RVec project_eigenvalues(const RVec& lambda_rcml, const ToeplitzConstraintSystem& c);

// Full cascade: clutter eigenvalues max(d_i - noise, 0) from the sample
// spectrum, Toeplitz constraints from the sample eigenvectors, then either
// the exact branch (system already rank-deficient: project directly) or the
// approximate branch (drop one singular value first). Negative projected
// eigenvalues are clipped to zero; the clipped mass is annotated. Output is
// noise*I + V_r diag(lambda*) V_r^H.
CovarianceEstimate eastr(const HermitianMatrix& s, double noise, int rank);

}  // namespace stap
