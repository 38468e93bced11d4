#pragma once

#include "stap/core.hpp"

namespace stap {

enum class CnCase { identity, fml, kmax_clamp, interior };

const char* to_string(CnCase c);

// Closed-form condition-number-constrained ML spectrum for one sample
// spectrum. u_star is the minimizer of the whitened objective on (0, 1];
// eigenvalues are in the covariance domain, descending.
struct ConditionNumberSolution {
  double u_star = 1.0;
  CnCase case_tag = CnCase::identity;
  RVec eigenvalues;
};

// Minimizes sum_i G_i(u) over (0, 1], where the G_i are the per-eigenvalue
// pieces of the whitened negative log-likelihood as a function of the free
// parameter u (d_bar = sample eigenvalues over the noise floor, descending).
// The derivative is piecewise -m/u + c between breakpoints
// {1/kmax} u {1/(kmax*db_i), 1/db_i : db_i > 1}, so the crossing interval is
// found by a sweep and the stationary point is the analytic u = m/c.
double solve_u(const RVec& d_bar, double kmax);

// Four-case closed form on the sample spectrum d (descending):
//   1. d1 <= noise                      -> noise * I
//   2. noise < d1 <= noise*kmax         -> the FML clamp
//   3. d1 > noise*kmax, kmax large side -> top block clamped at noise*kmax
//   4. otherwise                        -> interior solution through solve_u
// Case comparisons carry a 1e-12 relative guard band; ties resolve to the
// lower-numbered case.
ConditionNumberSolution cncml_spectrum(const RVec& d, double noise, double kmax);

// Full estimator: eigenvectors of s are kept, the spectrum is replaced by
// cncml_spectrum's solution. The output condition number never exceeds kmax.
CovarianceEstimate cncml(const HermitianMatrix& s, double noise, double kmax);

}  // namespace stap
