#include "stap/expected_likelihood.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "stap/cncml.hpp"
#include "stap/parallel.hpp"
#include "stap/rng.hpp"
#include "stap/stats.hpp"

namespace stap {

namespace {

double log_lr_of_whitened(const CMat& white_sample) {
  Eigen::SelfAdjointEigenSolver<CMat> solver(white_sample);
  const RVec& g = solver.eigenvalues();
  double out = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i)
    out += std::log(g(i)) + 1.0 - g(i);
  return out;
}

// RCML spectrum for rank r at noise power sigma2 over sample eigenvalues d.
RVec rcml_lambda(const RVec& d, int rank, double sigma2) {
  RVec lambda(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i)
    lambda(i) = i < rank ? std::max(d(i), sigma2) : sigma2;
  return lambda;
}

double log_lr_rank_noise(const RVec& d, int rank, double sigma2) {
  return log_lr_from_spectra(d, rcml_lambda(d, rank, sigma2));
}

// Shared +-1 rank walk toward the reference log-LR. Appends every evaluated
// (rank, log-LR) pair to audit when given.
int walk_rank(const RVec& d, double sigma2, int rank_init, double log_lr0,
              std::vector<std::pair<double, double>>* audit) {
  const int n = static_cast<int>(d.size());
  auto note = [&](int r, double ll) {
    if (audit) audit->emplace_back(static_cast<double>(r), ll);
  };
  auto dist = [&](int r) { return std::abs(log_lr_rank_noise(d, r, sigma2) - log_lr0); };

  int r = rank_init;
  note(r, log_lr_rank_noise(d, r, sigma2));
  if (r + 1 <= n && dist(r + 1) < dist(r)) {
    while (r + 1 <= n && dist(r + 1) < dist(r)) {
      ++r;
      note(r, log_lr_rank_noise(d, r, sigma2));
    }
  } else if (r - 1 >= 0 && dist(r - 1) < dist(r)) {
    while (r - 1 >= 0 && dist(r - 1) < dist(r)) {
      --r;
      note(r, log_lr_rank_noise(d, r, sigma2));
    }
  }
  return r;
}

}  // namespace

double log_lr_from_spectra(const RVec& d, const RVec& lambda) {
  if (d.size() != lambda.size())
    throw std::invalid_argument("log_lr_from_spectra: length mismatch");
  double out = 0.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const double g = d(i) / lambda(i);
    out += std::log(g) + 1.0 - g;
  }
  return out;
}

double likelihood_ratio_log(const CovarianceEstimate& estimate,
                            const HermitianMatrix& s) {
  const Eigen::Index n = s.rows();
  CMat w;
  if (estimate.inverse.has_value()) {
    // Whiten with the square root of the supplied inverse.
    EigenSystem es = eig_hermitian(*estimate.inverse);
    if (es.values(n - 1) <= 1e-14 * std::max(1.0, es.values(0)))
      throw NumericError("likelihood_ratio_log: estimate is singular");
    w = es.vectors * es.values.cwiseSqrt().asDiagonal() * es.vectors.adjoint();
  } else {
    EigenSystem es = eig_hermitian(estimate.matrix);
    if (es.values(n - 1) <= 1e-14 * std::max(1.0, es.values(0)))
      throw NumericError("likelihood_ratio_log: estimate is singular");
    RVec inv_root = es.values.cwiseSqrt().cwiseInverse();
    w = es.vectors * inv_root.asDiagonal() * es.vectors.adjoint();
  }
  return log_lr_of_whitened(hermitize(w * s * w));
}

LikelihoodRatioReference calibrate_lr0(int dim, int samples, int trials,
                                       std::uint64_t seed, int workers) {
  if (samples < dim)
    throw std::invalid_argument("calibrate_lr0: needs K >= N (complex Wishart)");
  if (trials < 100) throw std::invalid_argument("calibrate_lr0: needs trials >= 100");

  std::vector<double> values(static_cast<std::size_t>(trials));
  parallel_for(static_cast<std::size_t>(trials), workers, [&](std::size_t t) {
    std::mt19937_64 eng = rng_stream(seed, t);
    CMat g = complex_gaussian_matrix(dim, samples, eng);
    CMat s = (g * g.adjoint()) / static_cast<double>(samples);
    values[t] = log_lr_of_whitened(hermitize(s));
  });

  LikelihoodRatioReference ref;
  ref.dim = dim;
  ref.samples = samples;
  ref.trials = trials;
  ref.seed = seed;
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  ref.log_lr0 = median(values);
  for (int dec = 1; dec <= 9; ++dec) {
    const double p = 0.1 * dec;
    ref.quantiles.emplace_back(p, quantile_sorted(sorted, p));
  }
  return ref;
}

double lambert_w(WBranch branch, double x) {
  const double branch_point = -1.0 / M_E;
  const double slack = 1e-12;
  if (x < branch_point * (1.0 + slack) - slack)
    throw std::invalid_argument("lambert_w: x below -1/e");
  if (branch == WBranch::minus_one && x >= 0.0)
    throw std::invalid_argument("lambert_w: minus-one branch needs x < 0");
  if (x < branch_point) x = branch_point;  // inside the slack band

  // Series around the branch point; exact enough to skip iteration when the
  // expansion parameter is tiny (error is O(p^4)).
  const double p2 = 2.0 * (M_E * x + 1.0);
  const double p = std::sqrt(std::max(p2, 0.0));
  double w;
  if (branch == WBranch::principal) {
    if (p < 1e-4) return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
    if (x < -0.2)
      w = -1.0 + p - p * p / 3.0;
    else if (x < M_E)
      w = x / (1.0 + x);  // adequate seed on (-0.2, e)
    else {
      const double l1 = std::log(x), l2 = std::log(l1);
      w = l1 - l2 + l2 / l1;
    }
  } else {
    if (p < 1e-4) return -1.0 - p - p * p / 3.0 - 11.0 / 72.0 * p * p * p;
    if (x < -0.2) {
      w = -1.0 - p - p * p / 3.0;
    } else {
      const double l1 = std::log(-x), l2 = std::log(-l1);
      w = l1 - l2 + l2 / l1;
    }
  }

  for (int it = 0; it < 100; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double wp1 = w + 1.0;
    double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    if (denom == 0.0 || !std::isfinite(denom)) denom = ew * wp1;
    const double step = f / denom;
    w -= step;
    if (std::abs(step) <= 1e-14 * (1.0 + std::abs(w))) break;
  }
  return w;
}

ElSelection select_rank_el(const HermitianMatrix& s, double noise, int rank_init,
                           const LikelihoodRatioReference& ref) {
  if (noise <= 0.0) throw std::invalid_argument("select_rank_el: noise must be > 0");
  EigenSystem es = eig_hermitian(s);
  const int n = static_cast<int>(es.values.size());
  if (rank_init < 1 || rank_init > n)
    throw std::invalid_argument("select_rank_el: rank_init out of range");

  ElSelection sel;
  const int r = walk_rank(es.values, noise, rank_init, ref.log_lr0,
                          &sel.candidates_considered);
  sel.rank = r;
  sel.log_lr_achieved = log_lr_rank_noise(es.values, r, noise);
  return sel;
}

std::vector<double> noise_el_candidates(const RVec& d, int rank,
                                        const LikelihoodRatioReference& ref) {
  const int n = static_cast<int>(d.size());
  if (rank < 0 || rank >= n)
    throw std::invalid_argument("noise_el_candidates: rank must be < N");

  const int tail = n - rank;
  double tail_sum = 0.0, tail_logprod = 0.0;
  for (int i = rank; i < n; ++i) {
    if (d(i) <= 0.0) return {};  // log-LR is -inf for every noise power
    tail_sum += d(i);
    tail_logprod += std::log(d(i));
  }

  const double a = static_cast<double>(-tail);  // rank - N
  const double b = tail_sum;
  const double c = ref.log_lr0 - tail_logprod + a;
  const double arg = (b / a) * std::exp(-c / a);

  std::vector<double> out;
  for (WBranch branch : {WBranch::principal, WBranch::minus_one}) {
    const double lo = -1.0 / M_E;
    if (arg < lo * (1.0 + 1e-12)) continue;  // below the branch point: no root
    if (branch == WBranch::minus_one && arg >= 0.0) continue;
    double w;
    try {
      w = lambert_w(branch, arg);
    } catch (const std::invalid_argument&) {
      continue;
    }
    const double sigma2 = std::exp(w + c / a);
    if (!std::isfinite(sigma2) || sigma2 <= 0.0) continue;
    if (std::abs(log_lr_rank_noise(d, rank, sigma2) - ref.log_lr0) >= 1e-8) continue;
    out.push_back(sigma2);
  }
  std::sort(out.begin(), out.end());
  // When lr0 touches the peak the two branch roots coincide up to the square
  // root of the LR tolerance; merge them.
  if (out.size() == 2 && std::abs(out[1] - out[0]) <= 1e-7 * std::max(out[0], out[1]))
    out.pop_back();
  return out;
}

ElSelection select_rank_noise_el(const HermitianMatrix& s, int rank_init,
                                 const LikelihoodRatioReference& ref,
                                 const NoiseTieBreaker& tie_breaker) {
  EigenSystem es = eig_hermitian(s);
  const RVec& d = es.values;
  const int n = static_cast<int>(d.size());
  if (rank_init < 1 || rank_init >= n)
    throw std::invalid_argument("select_rank_noise_el: rank_init out of range");

  ElSelection sel;
  int r = rank_init;
  for (int iter = 0; iter < n; ++iter) {
    if (r >= n)
      throw NumericError("select_rank_noise_el: rank reached N without converging");
    const double sigma_ml = d.tail(n - r).mean();
    if (sigma_ml <= 0.0)
      throw NumericError("select_rank_noise_el: non-positive tail mean");

    const std::vector<double> cands = noise_el_candidates(d, r, ref);
    if (cands.empty()) {
      ++r;
      continue;
    }

    auto log_lr_of = [&](double sig) { return log_lr_rank_noise(d, r, sig); };
    double sigma_hat;
    if (tie_breaker) {
      sigma_hat = tie_breaker(sigma_ml, cands, log_lr_of);
    } else {
      // Smallest |log LR - log_lr0|, ties resolved toward the ML tail mean.
      sigma_hat = sigma_ml;
      double best = std::abs(log_lr_of(sigma_ml) - ref.log_lr0);
      for (double cand : cands) {
        const double dist = std::abs(log_lr_of(cand) - ref.log_lr0);
        if (dist < best) {
          best = dist;
          sigma_hat = cand;
        }
      }
    }
    sel.candidates_considered.emplace_back(sigma_hat, log_lr_of(sigma_hat));

    const int r_next = walk_rank(d, sigma_hat, r, ref.log_lr0, nullptr);
    if (r_next == r) {
      sel.rank = r;
      sel.noise = sigma_hat;
      sel.log_lr_achieved = log_lr_of(sigma_hat);
      return sel;
    }
    r = r_next;
  }
  throw NumericError("select_rank_noise_el: did not converge within N iterations");
}

ElSelection select_condition_number_el(const HermitianMatrix& s, double noise,
                                       const LikelihoodRatioReference& ref) {
  if (noise <= 0.0)
    throw std::invalid_argument("select_condition_number_el: noise must be > 0");
  EigenSystem es = eig_hermitian(s);
  const RVec& d = es.values;
  const int n = static_cast<int>(d.size());

  ElSelection sel;
  if (d(0) <= noise * (1.0 + 1e-12)) {
    // The estimate is noise*I for every K_max; nothing to search.
    sel.condition_number = 1.0;
    sel.log_lr_achieved = log_lr_from_spectra(d, RVec::Constant(n, noise));
    sel.candidates_considered.emplace_back(1.0, sel.log_lr_achieved);
    return sel;
  }

  auto log_lr_at = [&](double kmax) {
    return log_lr_from_spectra(d, cncml_spectrum(d, noise, kmax).eigenvalues);
  };
  auto dist = [&](double kmax) { return std::abs(log_lr_at(kmax) - ref.log_lr0); };

  double k = d(0) / noise;  // unconstrained ML condition number
  double delta = k / 100.0;
  sel.candidates_considered.emplace_back(k, log_lr_at(k));
  while (delta >= 1e-4) {
    if (dist(k + delta) < dist(k)) {
      do {
        k += delta;
        sel.candidates_considered.emplace_back(k, log_lr_at(k));
      } while (dist(k + delta) < dist(k));
    } else if (k - delta >= 1.0 && dist(k - delta) < dist(k)) {
      do {
        k -= delta;
        sel.candidates_considered.emplace_back(k, log_lr_at(k));
      } while (k - delta >= 1.0 && dist(k - delta) < dist(k));
    }
    delta /= 10.0;
  }
  sel.condition_number = k;
  sel.log_lr_achieved = log_lr_at(k);
  return sel;
}

// ---- reference cache -------------------------------------------------------

std::filesystem::path lr0_cache_path(const std::filesystem::path& dir, int dim,
                                     int samples, int trials, std::uint64_t seed) {
  std::ostringstream name;
  name << "lr0_N" << dim << "_K" << samples << "_T" << trials << "_S" << seed
       << ".txt";
  return dir / name.str();
}

void store_lr0(const std::filesystem::path& dir, const LikelihoodRatioReference& ref) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path final_path =
      lr0_cache_path(dir, ref.dim, ref.samples, ref.trials, ref.seed);
  const std::filesystem::path tmp_path =
      final_path.string() + ".tmp" + std::to_string(::getpid());

  char buf[64];
  std::ofstream out(tmp_path);
  if (!out) throw std::runtime_error("store_lr0: cannot write " + tmp_path.string());
  out << "stapcov-lr0 v1\n";
  out << "dim " << ref.dim << "\n";
  out << "samples " << ref.samples << "\n";
  out << "trials " << ref.trials << "\n";
  out << "seed " << ref.seed << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", ref.log_lr0);
  out << "log_lr0 " << buf << "\n";
  for (const auto& [p, v] : ref.quantiles) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << "quantile " << p << " " << buf << "\n";
  }
  out.close();
  if (!out) throw std::runtime_error("store_lr0: write failed for " + tmp_path.string());
  std::filesystem::rename(tmp_path, final_path);
}

std::optional<LikelihoodRatioReference> load_lr0(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::string line;
  if (!std::getline(in, line) || line != "stapcov-lr0 v1") return std::nullopt;

  LikelihoodRatioReference ref;
  bool have_lr0 = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "dim") ls >> ref.dim;
    else if (key == "samples") ls >> ref.samples;
    else if (key == "trials") ls >> ref.trials;
    else if (key == "seed") ls >> ref.seed;
    else if (key == "log_lr0") { ls >> ref.log_lr0; have_lr0 = !ls.fail(); }
    else if (key == "quantile") {
      double p = 0.0, v = 0.0;
      ls >> p >> v;
      if (!ls.fail()) ref.quantiles.emplace_back(p, v);
    } else {
      return std::nullopt;  // unknown key: treat as corrupt
    }
    if (ls.fail()) return std::nullopt;
  }
  if (!have_lr0 || ref.dim <= 0 || ref.samples <= 0 || ref.trials <= 0)
    return std::nullopt;
  return ref;
}

LikelihoodRatioReference calibrate_lr0_cached(const std::filesystem::path& dir,
                                              int dim, int samples, int trials,
                                              std::uint64_t seed, int workers) {
  const std::filesystem::path path = lr0_cache_path(dir, dim, samples, trials, seed);
  if (auto cached = load_lr0(path)) {
    if (cached->dim == dim && cached->samples == samples &&
        cached->trials == trials && cached->seed == seed)
      return *cached;
  }
  LikelihoodRatioReference ref = calibrate_lr0(dim, samples, trials, seed, workers);
  store_lr0(dir, ref);
  return ref;
}

}  // namespace stap
