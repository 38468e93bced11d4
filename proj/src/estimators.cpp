#include "stap/estimators.hpp"

#include <cmath>
#include <limits>

namespace stap {

namespace {

void check_noise(double noise) {
  if (noise <= 0.0) throw std::invalid_argument("estimator: noise power must be > 0");
}

void check_rank(int rank, int n, int lo, int hi) {
  if (rank < lo || rank > hi)
    throw std::invalid_argument("estimator: rank out of range for N=" + std::to_string(n));
}

}  // namespace

CovarianceEstimate smi(const HermitianMatrix& s) {
  CovarianceEstimate est;
  est.matrix = s;
  est.tag = "SMI";
  return est;
}

CovarianceEstimate fml(const HermitianMatrix& s, double noise) {
  check_noise(noise);
  EigenSystem es = eig_hermitian(s);
  const int n = static_cast<int>(es.values.size());
  int rank = 0;
  RVec e(n);
  for (int i = 0; i < n; ++i) {
    e(i) = std::max(es.values(i), noise);
    if (es.values(i) > noise) ++rank;
  }
  CovarianceEstimate est;
  est.matrix = reconstruct(es.vectors, e);
  est.tag = "FML";
  est.rank_used = rank;
  est.noise_used = noise;
  return est;
}

CovarianceEstimate rcml(const HermitianMatrix& s, double noise, int rank) {
  check_noise(noise);
  EigenSystem es = eig_hermitian(s);
  const int n = static_cast<int>(es.values.size());
  check_rank(rank, n, 0, n);
  RVec e(n);
  for (int i = 0; i < n; ++i)
    e(i) = i < rank ? std::max(es.values(i), noise) : noise;
  CovarianceEstimate est;
  est.matrix = reconstruct(es.vectors, e);
  est.tag = "RCML";
  est.rank_used = rank;
  est.noise_used = noise;
  return est;
}

CovarianceEstimate rcml_lb(const HermitianMatrix& s, double noise_lower_bound,
                           int rank) {
  if (noise_lower_bound < 0.0)
    throw std::invalid_argument("rcml_lb: lower bound must be >= 0");
  EigenSystem es = eig_hermitian(s);
  const int n = static_cast<int>(es.values.size());
  check_rank(rank, n, 0, n - 1);  // tail must be non-empty
  const double tail_mean = es.values.tail(n - rank).mean();
  const double c_star = std::max(noise_lower_bound, tail_mean);
  RVec e(n);
  for (int i = 0; i < n; ++i)
    e(i) = i < rank ? std::max(es.values(i), c_star) : c_star;
  CovarianceEstimate est;
  est.matrix = reconstruct(es.vectors, e);
  est.tag = "RCML_LB";
  est.rank_used = rank;
  est.noise_used = c_star;
  return est;
}

CovarianceEstimate wax_kailath(const HermitianMatrix& s, int rank) {
  EigenSystem es = eig_hermitian(s);
  const int n = static_cast<int>(es.values.size());
  check_rank(rank, n, 0, n - 1);
  const double tail_mean = es.values.tail(n - rank).mean();
  RVec e(n);
  for (int i = 0; i < n; ++i) e(i) = i < rank ? es.values(i) : tail_mean;
  CovarianceEstimate est;
  est.matrix = reconstruct(es.vectors, e);
  est.tag = "WaxKailath";
  est.rank_used = rank;
  est.noise_used = tail_mean;
  return est;
}

std::vector<double> looc_default_grid() {
  std::vector<double> g;
  g.push_back(0.01);
  for (int i = 1; i <= 19; ++i) g.push_back(0.05 * i);
  g.push_back(0.99);
  return g;
}

CovarianceEstimate looc(const TrainingSet& z, const std::vector<double>& beta_grid) {
  if (z.count < 2) throw std::invalid_argument("looc: needs K >= 2");
  if (beta_grid.empty()) throw std::invalid_argument("looc: empty beta grid");
  const int n = z.dim;
  const int k = z.count;
  const HermitianMatrix s = sample_covariance(z);

  double best_ll = -std::numeric_limits<double>::infinity();
  double best_beta = 0.0;
  bool any = false;

  for (double beta : beta_grid) {
    double ll = 0.0;
    bool singular = false;
    for (int hold = 0; hold < k; ++hold) {
      const CVec& zc = z.samples.col(hold);
      CMat s_rest =
          (static_cast<double>(k) * s - zc * zc.adjoint()) / static_cast<double>(k - 1);
      CMat shrunk = beta * CMat(s_rest.diagonal().asDiagonal()) + (1.0 - beta) * s_rest;
      Eigen::LLT<CMat> llt(hermitize(shrunk));
      if (llt.info() != Eigen::Success) {
        singular = true;
        break;
      }
      // Complex circular Gaussian log-density of the held-out sample.
      CVec y = llt.solve(zc);
      double quad = zc.dot(y).real();
      double logdet = 0.0;
      for (int i = 0; i < n; ++i)
        logdet += 2.0 * std::log(llt.matrixLLT()(i, i).real());
      ll += -n * std::log(M_PI) - logdet - quad;
    }
    if (singular) continue;
    if (!any || ll > best_ll) {  // first maximum wins ties
      any = true;
      best_ll = ll;
      best_beta = beta;
    }
  }
  if (!any) throw NumericError("looc: every candidate estimate was singular");

  CovarianceEstimate est;
  est.matrix =
      hermitize(best_beta * CMat(s.diagonal().asDiagonal()) + (1.0 - best_beta) * s);
  est.tag = "LOOC";
  est.shrinkage_used = best_beta;
  return est;
}

CovarianceEstimate eigencanceler(const HermitianMatrix& s, double noise, int rank) {
  check_noise(noise);
  EigenSystem es = eig_hermitian(s);
  const int n = static_cast<int>(es.values.size());
  check_rank(rank, n, 1, n - 1);
  CMat proj = CMat::Zero(n, n);
  for (int i = 0; i < rank; ++i)
    proj += es.vectors.col(i) * es.vectors.col(i).adjoint();
  CMat identity = CMat::Identity(n, n);

  CovarianceEstimate est;
  est.inverse = hermitize((identity - proj) / noise);
  // The inverse is singular on the clutter subspace; the matrix field is its
  // pseudo-inverse completed at the noise level there, i.e. noise * I.
  est.matrix = noise * identity;
  est.tag = "EigC";
  est.rank_used = rank;
  est.noise_used = noise;
  return est;
}

CovarianceEstimate itam(const HermitianMatrix& s, int rank, int max_iters,
                        double tol) {
  EigenSystem probe = eig_hermitian(s);
  const int n = static_cast<int>(probe.values.size());
  check_rank(rank, n, 1, n - 1);
  if (max_iters < 1) throw std::invalid_argument("itam: max_iters must be >= 1");

  HermitianMatrix current = s;
  HermitianMatrix clutter;
  double lam_av = 0.0;
  int it = 0;
  for (it = 1; it <= max_iters; ++it) {
    EigenSystem es = eig_hermitian(current);
    lam_av = es.values.tail(n - rank).mean();
    RVec e = RVec::Zero(n);
    for (int i = 0; i < rank; ++i) e(i) = es.values(i) - lam_av;
    clutter = reconstruct(es.vectors, e);
    if (toeplitz_deviation(clutter) < tol) break;
    current = toeplitz_average(clutter) + lam_av * CMat::Identity(n, n);
  }

  CovarianceEstimate est;
  est.matrix = hermitize(clutter + lam_av * CMat::Identity(n, n));
  est.tag = "ITAM";
  est.rank_used = rank;
  est.noise_used = lam_av;
  est.iterations = std::min(it, max_iters);
  return est;
}

}  // namespace stap
