#pragma once

#include <vector>

#include "stap/core.hpp"

namespace stap {

// Sample-matrix-inversion baseline: the sample covariance itself, untouched.
// Consumers must fall back to a pseudo-inverse when K < N makes it singular.
CovarianceEstimate smi(const HermitianMatrix& s);

// Fast maximum likelihood: keep the sample eigenvectors, clamp every
// eigenvalue below the known noise floor up to it. rank_used reports how many
// sample eigenvalues exceeded the floor.
CovarianceEstimate fml(const HermitianMatrix& s, double noise);

// Rank-constrained ML: clamp only the top r eigenvalues at max(d_i, noise)
// and force the rest to the noise floor exactly.
CovarianceEstimate rcml(const HermitianMatrix& s, double noise, int rank);

// Rank-constrained ML with unknown noise bounded below: the optimal noise is
// c* = max(lower bound, mean of the N-r trailing eigenvalues).
CovarianceEstimate rcml_lb(const HermitianMatrix& s, double noise_lower_bound,
                           int rank);

// Signal-count ML estimate: top-r eigenvalues kept verbatim, the rest
// replaced by their mean. Unlike rcml_lb the top block is never clamped.
CovarianceEstimate wax_kailath(const HermitianMatrix& s, int rank);

// Default cross-validation grid for looc(): 0.01, 0.05..0.95 in steps of
// 0.05, and 0.99.
std::vector<double> looc_default_grid();

// Leave-one-out shrinkage toward the diagonal: selects beta from the grid by
// maximizing the summed held-out Gaussian log-likelihood and returns
// beta*diag(S) + (1-beta)*S built from the full sample covariance. Grid
// candidates whose held-out estimate is singular are skipped; if every
// candidate is, a NumericError is thrown.
CovarianceEstimate looc(const TrainingSet& z,
                        const std::vector<double>& beta_grid = looc_default_grid());

// Eigencanceler: its natural output is the inverse approximation
// (1/noise)(I - P) with P the projector onto the top-r sample eigenvectors.
// Consumers use the explicit inverse; the matrix field carries the
// noise-level PSD completion of that singular inverse.
CovarianceEstimate eigencanceler(const HermitianMatrix& s, double noise, int rank);

// Iterative Toeplitz approximation: alternate rank-r clutter extraction
// (trailing-eigenvalue mean removed) with per-diagonal averaging until the
// extracted clutter is Toeplitz to `tol` or max_iters is hit. Never fails;
// the iteration count is annotated on the estimate.
CovarianceEstimate itam(const HermitianMatrix& s, int rank, int max_iters = 200,
                        double tol = 1e-8);

}  // namespace stap
