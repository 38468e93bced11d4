#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "stap/core.hpp"

namespace stap {

// Calibrated reference for the likelihood-ratio statistic at one (N, K):
// the median log-LR that the *true* covariance attains against the sample
// covariance, which by invariance does not depend on the true covariance.
struct LikelihoodRatioReference {
  int dim = 0;
  int samples = 0;
  double log_lr0 = 0.0;  // median log-LR; always <= 0
  int trials = 0;
  std::vector<std::pair<double, double>> quantiles;  // (probability, log-LR)
  std::uint64_t seed = 0;
};

// Result of an expected-likelihood parameter selection.
struct ElSelection {
  std::optional<int> rank;
  std::optional<double> noise;
  std::optional<double> condition_number;
  double log_lr_achieved = 0.0;
  // Audit trail: (candidate value, its log-LR) in evaluation order.
  std::vector<std::pair<double, double>> candidates_considered;
};

// log LR(R_hat, Z) = sum_i log g_i + N - sum_i g_i, with g_i the eigenvalues
// of R_hat^{-1} S. Always <= 0, equal to 0 only when R_hat = S. Throws
// NumericError when the estimate is singular.
double likelihood_ratio_log(const CovarianceEstimate& estimate,
                            const HermitianMatrix& s);

// Same statistic when the estimate shares the sample eigenvectors, so the
// whitened eigenvalues are simply the ratios d_i / lambda_i.
double log_lr_from_spectra(const RVec& d, const RVec& lambda);

// Monte Carlo calibration: log-LR of the truth over `trials` complex Wishart
// draws (R0 = I without loss of generality), reduced to the median plus
// deciles. Per-trial RNG streams derive from (seed, trial), so any worker
// count reproduces the same reference bit-for-bit. Requires K >= N.
LikelihoodRatioReference calibrate_lr0(int dim, int samples, int trials,
                                       std::uint64_t seed, int workers = 1);

enum class WBranch { principal, minus_one };

// Lambert W on either real branch, to 1e-12 relative residual.
double lambert_w(WBranch branch, double x);

// Walks the RCML rank by +-1 in the direction that shrinks
// |log LR - log_lr0|, stopping at the first local minimum (global, since the
// log-LR is monotone in the rank).
ElSelection select_rank_el(const HermitianMatrix& s, double noise, int rank_init,
                           const LikelihoodRatioReference& ref);

// Noise powers at which the rank-r RCML estimate attains the reference
// log-LR exactly: the closed-form Lambert-W roots on both branches, verified
// against the full spectrum and deduplicated. Empty when the reference lies
// above the attainable peak.
std::vector<double> noise_el_candidates(const RVec& d, int rank,
                                        const LikelihoodRatioReference& ref);

// Chooses the final noise power among the ML tail mean and the (up to two)
// expected-likelihood roots. log_lr_of evaluates the log-LR at any noise
// power for the current rank.
using NoiseTieBreaker = std::function<double(
    double sigma_ml, const std::vector<double>& el_candidates,
    const std::function<double(double)>& log_lr_of)>;

// Alternates noise-power selection and rank reselection until the rank is
// stable. When no noise root exists for the current rank the rank is grown.
// Throws NumericError if the rank reaches N without converging. The default
// tie-breaker picks the smallest |log LR - log_lr0| with ties to the ML tail
// mean.
ElSelection select_rank_noise_el(const HermitianMatrix& s, int rank_init,
                                 const LikelihoodRatioReference& ref,
                                 const NoiseTieBreaker& tie_breaker = {});

// Step search over the condition-number constraint, starting from the
// unconstrained ML condition number d1/noise: step K_max/100, direction of
// shrinking |log LR - log_lr0|, step divided by 10 on reversal, stop below
// 1e-4. When the estimate does not depend on K_max (sample spectrum already
// at or below the noise floor) the ML condition number is returned as-is.
ElSelection select_condition_number_el(const HermitianMatrix& s, double noise,
                                       const LikelihoodRatioReference& ref);

// ---- reference cache -------------------------------------------------------
// One structured-text file per (N, K, trials, seed); writes are atomic
// (temp file + rename) so concurrent readers never observe a torn record.

std::filesystem::path lr0_cache_path(const std::filesystem::path& dir, int dim,
                                     int samples, int trials, std::uint64_t seed);

void store_lr0(const std::filesystem::path& dir, const LikelihoodRatioReference& ref);

std::optional<LikelihoodRatioReference> load_lr0(const std::filesystem::path& path);

// Cache-through calibration: returns the cached record when present and
// keyed identically, otherwise calibrates and stores.
LikelihoodRatioReference calibrate_lr0_cached(const std::filesystem::path& dir,
                                              int dim, int samples, int trials,
                                              std::uint64_t seed, int workers = 1);

}  // namespace stap
