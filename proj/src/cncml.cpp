#include "stap/cncml.hpp"

#include <cmath>
#include <map>

namespace stap {

const char* to_string(CnCase c) {
  switch (c) {
    case CnCase::identity: return "identity";
    case CnCase::fml: return "fml";
    case CnCase::kmax_clamp: return "kmax_clamp";
    case CnCase::interior: return "interior";
  }
  return "?";
}

double solve_u(const RVec& d_bar, double kmax) {
  if (kmax < 1.0) throw std::invalid_argument("solve_u: kmax must be >= 1");
  const int n = static_cast<int>(d_bar.size());
  if (n == 0) throw std::invalid_argument("solve_u: empty spectrum");
  for (int i = 0; i < n; ++i)
    if (d_bar(i) <= 0.0) throw std::invalid_argument("solve_u: spectrum must be positive");

  // Derivative bookkeeping: G'(u) = -m/u + c between breakpoints. Each i
  // contributes -1/u + kmax*db_i until its first-piece end (1/kmax, or
  // 1/(kmax*db_i) when db_i > 1), and db_i > 1 re-enters as -1/u + db_i from
  // 1/db_i on. Events accumulate (dm, dc) at each breakpoint.
  struct Delta {
    int dm = 0;
    double dc = 0.0;
  };
  std::map<double, Delta> events;
  int m = n;
  double c = 0.0;
  for (int i = 0; i < n; ++i) {
    c += kmax * d_bar(i);
    if (d_bar(i) > 1.0) {
      Delta& drop = events[1.0 / (kmax * d_bar(i))];
      drop.dm -= 1;
      drop.dc -= kmax * d_bar(i);
      Delta& rise = events[1.0 / d_bar(i)];
      rise.dm += 1;
      rise.dc += d_bar(i);
    } else {
      Delta& drop = events[1.0 / kmax];
      drop.dm -= 1;
      drop.dc -= kmax * d_bar(i);
    }
  }

  double left = 0.0;
  auto it = events.begin();
  for (;;) {
    double right = (it == events.end()) ? 1.0 : std::min(it->first, 1.0);
    if (right > left) {
      // G' is increasing inside the interval; check its value at the right end.
      double deriv_right = c - (m > 0 ? m / right : 0.0);
      if (deriv_right >= 0.0) {
        // First interval where G' reaches zero. The stationary point m/c can
        // fall below `left` when G' jumped past zero at the breakpoint; the
        // minimum is then the breakpoint itself.
        if (m > 0) return std::max(m / c, left);
        return left > 0.0 ? left : right;
      }
    }
    if (it == events.end() || it->first >= 1.0) return 1.0;
    m += it->second.dm;
    c += it->second.dc;
    left = it->first;
    ++it;
  }
}

ConditionNumberSolution cncml_spectrum(const RVec& d, double noise, double kmax) {
  if (noise <= 0.0) throw std::invalid_argument("cncml: noise power must be > 0");
  if (kmax < 1.0) throw std::invalid_argument("cncml: kmax must be >= 1");
  const int n = static_cast<int>(d.size());
  if (n == 0) throw std::invalid_argument("cncml: empty spectrum");

  constexpr double kGuard = 1e-12;  // relative band; ties go to the lower case
  ConditionNumberSolution sol;
  sol.eigenvalues.resize(n);

  const double d1 = d(0);
  if (d1 <= noise * (1.0 + kGuard)) {
    sol.case_tag = CnCase::identity;
    sol.u_star = 1.0 / kmax;
    sol.eigenvalues.setConstant(noise);
    return sol;
  }
  if (d1 <= noise * kmax * (1.0 + kGuard)) {
    sol.case_tag = CnCase::fml;
    sol.u_star = noise / d1;
    for (int i = 0; i < n; ++i) sol.eigenvalues(i) = std::max(d(i), noise);
    return sol;
  }

  RVec d_bar = d / noise;
  int p = 0;
  while (p < n && d_bar(p) > kmax) ++p;
  int n_bar = 0;
  while (n_bar < n && d_bar(n_bar) >= 1.0) ++n_bar;
  double head = d_bar.head(p).sum();
  double tail_excess = 0.0;
  for (int i = n_bar; i < n; ++i) tail_excess += d_bar(i) - 1.0;

  if (kmax >= (head / (p - tail_excess)) * (1.0 - kGuard)) {
    sol.case_tag = CnCase::kmax_clamp;
    sol.u_star = 1.0 / kmax;
    for (int i = 0; i < n; ++i) {
      if (i < p)
        sol.eigenvalues(i) = noise * kmax;
      else if (i < n_bar)
        sol.eigenvalues(i) = d(i);
      else
        sol.eigenvalues(i) = noise;
    }
    return sol;
  }

  const double u = solve_u(d_bar, kmax);
  sol.case_tag = CnCase::interior;
  sol.u_star = u;
  const double top = noise / u;
  const double bottom = noise / (u * kmax);
  for (int i = 0; i < n; ++i) {
    if (d(i) > top)
      sol.eigenvalues(i) = top;
    else if (d(i) > bottom)
      sol.eigenvalues(i) = d(i);
    else
      sol.eigenvalues(i) = bottom;
  }
  return sol;
}

CovarianceEstimate cncml(const HermitianMatrix& s, double noise, double kmax) {
  EigenSystem es = eig_hermitian(s);
  ConditionNumberSolution sol = cncml_spectrum(es.values, noise, kmax);
  CovarianceEstimate est;
  est.matrix = reconstruct(es.vectors, sol.eigenvalues);
  est.tag = "CNCML";
  est.noise_used = noise;
  est.condition_number_used = kmax;
  return est;
}

}  // namespace stap
