// Condition-number-constrained estimation: the 1-D dual search solve_u, the
// four-case closed-form spectrum, and the assembled estimator. The oracle
// defined first evaluates the per-eigenvalue objective
//   G_i(u) = -log lam_i(u) + dbar_i * lam_i(u),
//   lam_i(u) = min(min(kmax*u, 1), max(u, 1/dbar_i)),
// on a dense grid of u in (0, 1]; the objective is convex (its derivative is
// nondecreasing), so a coarse pass plus a fine pass around the coarse minimum
// is equivalent to a full dense grid at the fine resolution.
#include <doctest.h>

#include <cmath>
#include <random>

#include "stap/cncml.hpp"
#include "stap/core.hpp"
#include "stap/estimators.hpp"

using namespace stap;

namespace {

// ---------------------------------------------------------------------------
// Independent oracles.
// ---------------------------------------------------------------------------

double lambda_at(double u, double d_bar, double kmax) {
  return std::min(std::min(kmax * u, 1.0), std::max(u, 1.0 / d_bar));
}

double objective_at(double u, const RVec& d_bar, double kmax) {
  double g = 0.0;
  for (int i = 0; i < d_bar.size(); ++i) {
    double lam = lambda_at(u, d_bar(i), kmax);
    g += -std::log(lam) + d_bar(i) * lam;
  }
  return g;
}

// First minimum of the objective over a grid [lo, hi] with the given step.
double grid_first_min(const RVec& d_bar, double kmax, double lo, double hi,
                      double step) {
  double best_u = lo, best_g = objective_at(lo, d_bar, kmax);
  for (double u = lo + step; u <= hi; u += step) {
    double g = objective_at(u, d_bar, kmax);
    if (g < best_g) {
      best_g = g;
      best_u = u;
    }
  }
  return best_u;
}

// Dense-grid minimizer at 1e-7 resolution: coarse 1e-4 sweep of (0, 1], then
// a fine sweep of the surviving coarse cell.
double oracle_u_grid(const RVec& d_bar, double kmax) {
  const double coarse = 1e-4, fine = 1e-7;
  double u_coarse = grid_first_min(d_bar, kmax, coarse, 1.0, coarse);
  double lo = std::max(fine, u_coarse - 2.0 * coarse);
  double hi = std::min(1.0, u_coarse + 2.0 * coarse);
  return grid_first_min(d_bar, kmax, lo, hi, fine);
}

// Output spectrum implied by a given u, by composing the clamp formula.
RVec composed_spectrum(double u, const RVec& d_bar, double kmax, double noise) {
  RVec e(d_bar.size());
  for (int i = 0; i < d_bar.size(); ++i)
    e(i) = noise / lambda_at(u, d_bar(i), kmax);
  return e;
}

// ---------------------------------------------------------------------------
// Input helpers.
// ---------------------------------------------------------------------------

CMat random_complex(int rows, int cols, unsigned long seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  CMat m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = Complex(gauss(eng), gauss(eng));
  return m;
}

HermitianMatrix with_spectrum(const RVec& d, unsigned long seed) {
  const int n = static_cast<int>(d.size());
  EigenSystem es = eig_hermitian(hermitize(random_complex(n, n, seed)));
  return reconstruct(es.vectors, d);
}

double condition_of(const HermitianMatrix& m) {
  RVec e = eig_hermitian(m).values;
  return e(0) / e(e.size() - 1);
}

RVec random_dbar(int n, double top, unsigned long seed) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> unif(0.2, 1.0);
  RVec d(n);
  d(0) = top;
  for (int i = 1; i < n; ++i) d(i) = unif(eng) * top * std::pow(0.35, i);
  std::sort(d.data(), d.data() + n, std::greater<double>());
  return d;
}

}  // namespace

TEST_CASE("solve_u: sub-noise spectrum settles at the constraint knee") {
  RVec d(3);
  d << 0.9, 0.5, 0.2;
  CHECK(solve_u(d, 10.0) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("solve_u: dominant eigenvalue against a tiny tail matches the grid") {
  RVec d(3);
  d << 50.0, 0.1, 0.1;
  double impl = solve_u(d, 5.0);
  double grid = oracle_u_grid(d, 5.0);
  CHECK(std::abs(impl - grid) <= 2e-7);
}

TEST_CASE("solve_u: random spectra match the dense grid") {
  for (unsigned long seed : {101ul, 102ul, 103ul, 104ul}) {
    std::mt19937_64 eng(seed);
    std::uniform_real_distribution<double> top(4.0, 20.0);
    std::uniform_real_distribution<double> km(2.0, 6.0);
    RVec d = random_dbar(6, top(eng), seed + 7);
    double kmax = km(eng);
    double impl = solve_u(d, kmax);
    double grid = oracle_u_grid(d, kmax);
    CHECK(impl > 0.0);
    CHECK(impl <= 1.0);
    CHECK(std::abs(impl - grid) <= 2e-7);
  }
}

TEST_CASE("solve_u: rejects invalid inputs") {
  RVec d(2);
  d << 2.0, 1.0;
  CHECK_THROWS_AS(solve_u(d, 0.5), std::invalid_argument);
  RVec bad(2);
  bad << 2.0, 0.0;
  CHECK_THROWS_AS(solve_u(bad, 3.0), std::invalid_argument);
  CHECK_THROWS_AS(solve_u(RVec(), 3.0), std::invalid_argument);
}

TEST_CASE("cncml: spectrum below the noise floor returns white") {
  const double noise = 1.7;
  RVec d(2);
  d << 0.5 * noise, 0.3 * noise;
  HermitianMatrix s = with_spectrum(d, 201);
  CovarianceEstimate est = cncml(s, noise, 12.0);
  CHECK((est.matrix - noise * CMat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(condition_of(est.matrix) == doctest::Approx(1.0));
  CHECK(cncml_spectrum(d, noise, 12.0).case_tag == CnCase::identity);
}

TEST_CASE("cncml: slack constraint reduces to the noise-floor clamp") {
  const double noise = 0.8;
  RVec d(3);
  d << 3.0 * noise, 2.0 * noise, 0.5 * noise;
  HermitianMatrix s = with_spectrum(d, 202);
  CovarianceEstimate cn = cncml(s, noise, 5.0);
  CovarianceEstimate base = fml(s, noise);
  CHECK((cn.matrix - base.matrix).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(condition_of(cn.matrix) == doctest::Approx(3.0));
  CHECK(cncml_spectrum(d, noise, 5.0).case_tag == CnCase::fml);
}

TEST_CASE("cncml: clamp case pins the top block at the constraint") {
  const double noise = 1.0;
  RVec d(4);
  d << 100.0, 1.5, 0.8, 0.6;
  const double kmax = 70.0;  // constraint strong enough to clamp outright
  ConditionNumberSolution sol = cncml_spectrum(d, noise, kmax);
  CHECK(sol.case_tag == CnCase::kmax_clamp);
  CHECK(sol.eigenvalues(0) == doctest::Approx(70.0));
  CHECK(sol.eigenvalues(1) == doctest::Approx(1.5));
  CHECK(sol.eigenvalues(2) == doctest::Approx(1.0));
  CHECK(sol.eigenvalues(3) == doctest::Approx(1.0));

  // The composed-grid oracle lands on the same spectrum.
  double u_grid = oracle_u_grid(d, kmax);
  RVec expect = composed_spectrum(u_grid, d, kmax, noise);
  for (int i = 0; i < 4; ++i)
    CHECK(std::abs(sol.eigenvalues(i) - expect(i)) <= 1e-5 * std::max(1.0, expect(i)));
}

TEST_CASE("cncml: interior case matches the composed-grid oracle") {
  const double noise = 1.0;
  for (unsigned long seed : {211ul, 212ul, 213ul}) {
    std::mt19937_64 eng(seed);
    std::uniform_real_distribution<double> km(2.0, 5.0);
    double kmax = km(eng);
    RVec d = random_dbar(6, kmax * 4.0, seed + 9);  // d1 above the clamp level
    REQUIRE(d(0) > kmax * noise);
    ConditionNumberSolution sol = cncml_spectrum(d, noise, kmax);
    REQUIRE((sol.case_tag == CnCase::interior || sol.case_tag == CnCase::kmax_clamp));

    double u_grid = oracle_u_grid(d, kmax);
    RVec expect = composed_spectrum(u_grid, d, kmax, noise);
    for (int i = 0; i < 6; ++i)
      CHECK(std::abs(sol.eigenvalues(i) - expect(i)) <=
            1e-5 * std::max(1.0, expect(i)));
  }
}

TEST_CASE("cncml: condition-number certificate across all four cases") {
  const double noise = 1.0;
  unsigned long seed = 300;
  for (double top : {0.6, 2.5, 9.0, 40.0}) {
    for (double kmax : {1.5, 4.0, 30.0}) {
      RVec d = random_dbar(5, top, ++seed);
      HermitianMatrix s = with_spectrum(d, seed + 1000);
      CovarianceEstimate est = cncml(s, noise, kmax);
      double cond = condition_of(est.matrix);
      CHECK(cond <= kmax * (1.0 + 1e-9));
      // The achieved condition number is one of the three case values.
      bool hits = std::abs(cond - 1.0) <= 1e-9 * 1.0 ||
                  std::abs(cond - d(0) / noise) <= 1e-9 * (d(0) / noise) ||
                  std::abs(cond - kmax) <= 1e-9 * kmax;
      CHECK(hits);
    }
  }
}

TEST_CASE("cncml: eigenvectors preserved and spectrum monotone") {
  const double noise = 0.7;
  RVec d = random_dbar(6, 25.0, 401);
  d *= noise;
  HermitianMatrix s = with_spectrum(d, 402);
  EigenSystem es = eig_hermitian(s);
  ConditionNumberSolution sol = cncml_spectrum(es.values, noise, 6.0);
  CovarianceEstimate est = cncml(s, noise, 6.0);
  CHECK((est.matrix - reconstruct(es.vectors, sol.eigenvalues)).cwiseAbs().maxCoeff() <
        1e-12);
  for (int i = 0; i + 1 < 6; ++i)
    CHECK(sol.eigenvalues(i) >= sol.eigenvalues(i + 1) - 1e-12);
  CHECK(sol.u_star > 0.0);
  CHECK(sol.u_star <= 1.0);
}

TEST_CASE("cncml: continuous across the clamp boundary") {
  const double noise = 1.3;
  const double kmax = 4.0;
  RVec lo(4), hi(4);
  lo << noise * kmax * (1.0 - 1e-9), 2.0 * noise, 0.7 * noise, 0.4 * noise;
  hi << noise * kmax * (1.0 + 1e-9), 2.0 * noise, 0.7 * noise, 0.4 * noise;
  ConditionNumberSolution below = cncml_spectrum(lo, noise, kmax);
  ConditionNumberSolution above = cncml_spectrum(hi, noise, kmax);
  CHECK(below.case_tag != above.case_tag);  // the boundary separates two cases
  for (int i = 0; i < 4; ++i)
    CHECK(std::abs(below.eigenvalues(i) - above.eigenvalues(i)) <=
          1e-6 * std::max(1.0, std::abs(above.eigenvalues(i))));
}

TEST_CASE("cncml: rejects invalid arguments") {
  CMat eye = CMat::Identity(3, 3);
  CHECK_THROWS_AS(cncml(eye, 0.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(cncml(eye, -1.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(cncml(eye, 1.0, 0.9), std::invalid_argument);
}
