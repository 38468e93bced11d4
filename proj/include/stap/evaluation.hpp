#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stap/core.hpp"
#include "stap/expected_likelihood.hpp"
#include "stap/simulation.hpp"

namespace stap {

// One aggregated measurement cell: a single (scenario, estimator, K, metric,
// grid point) combination with its per-trial values. Failed trials hold NaN
// in per_trial and are excluded from the mean; `failures` counts them.
struct BenchmarkResult {
  std::string scenario;
  std::string estimator;
  int samples = 0;  // K
  std::string metric;
  std::vector<double> grid;  // angle/Doppler or SNR coordinates; empty if none
  std::vector<double> per_trial;
  double mean = 0.0;
  double standard_error = 0.0;
  int trials = 0;
  std::uint64_t seed = 0;
  int failures = 0;
};

// R_hat^{-1}: the stored inverse when the estimator supplied one, otherwise
// the eigenvalue inverse; eigenvalues at or below 1e-10 * sigma_max are
// dropped (pseudo-inverse), which covers the singular SMI regime K < N.
CMat estimate_inverse(const CovarianceEstimate& estimate);

// 10 log10 of eta = |s^H R^-1_hat s|^2 / (|s^H R^-1_hat R R^-1_hat s| |s^H R^-1 s|);
// 0 dB iff the whitened weight direction matches the optimal one.
double normalized_sinr_db(const CovarianceEstimate& estimate,
                          const HermitianMatrix& truth,
                          const SteeringVector& s);

// Trace deviation |tr(R R_hat^{-1})/N - 1|.
double trd(const CovarianceEstimate& estimate, const HermitianMatrix& truth);

enum class DetectorKind { NMF, AMF, GLRT };

std::string to_string(DetectorKind kind);
DetectorKind detector_from_name(const std::string& name);

// Matched-filter test statistics against observation e:
//   NMF  = |s^H Q e|^2 / ((s^H Q s)(e^H Q e))        with Q = R_hat^{-1}
//   AMF  = |s^H Q e|^2 / (s^H Q s)
//   GLRT = |s^H Q e|^2 / ((s^H Q s)(1 + e^H Q e / K))
// NMF is in [0, 1]; GLRT <= AMF. GLRT needs the training sample count K.
double detector_statistic(DetectorKind kind, const SteeringVector& s,
                          const CovarianceEstimate& estimate,
                          const CVec& observation, int sample_count = 0);

// Empirical (1 - pfa) quantile of the statistic under H0 draws
// e ~ CN(0, truth). Requires trials * pfa >= 50 so the tail quantile is
// estimable. sample_count is the GLRT's K (unused by NMF/AMF).
double calibrate_threshold(DetectorKind kind, const SteeringVector& s,
                           const CovarianceEstimate& estimate,
                           const HermitianMatrix& truth, double pfa,
                           int trials, std::uint64_t seed,
                           int sample_count = 0, int workers = 1);

// Detection probability versus SNR: calibrates the threshold, then for each
// grid point draws e = alpha s + d with alpha^2 s^H R^{-1} s equal to the
// (linear) SNR and counts threshold exceedances. One result row per grid
// point, each with Bernoulli per-trial values. calibration_trials defaults
// to `trials` when 0; small false-alarm rates need far more calibration
// draws than detection draws.
std::vector<BenchmarkResult> probability_of_detection(
    DetectorKind kind, const SteeringVector& s,
    const CovarianceEstimate& estimate, const HermitianMatrix& truth,
    const std::vector<double>& snr_grid_db, double pfa, int trials,
    std::uint64_t seed, int sample_count = 0, int workers = 1,
    int calibration_trials = 0);

// One estimator invocation in a benchmark plan. `tag` picks the algorithm;
// unset parameters fall back to the scenario preset (rank, noise) when the
// plan resolves them. The el_* switches replace the corresponding fixed
// parameter with expected-likelihood selection, which needs a calibrated
// reference.
struct EstimatorSpec {
  std::string tag;  // smi|fml|rcml|rcml_lb|wax_kailath|looc|eigencanceler|
                    // itam|eastr|cncml
  std::optional<double> noise;
  std::optional<int> rank;
  std::optional<double> condition_number;  // K_max for cncml
  std::optional<double> noise_lower_bound;  // c_hat for rcml_lb
  bool el_rank = false;
  bool el_noise = false;
  bool el_condition = false;
  std::optional<std::string> name;  // display label; defaults from the tag

  std::string label() const;
};

// Known estimator tags, for validation and CLI help.
std::vector<std::string> estimator_tags();

// Runs one estimator on one training set. `ref` is required when any el_*
// switch is set. Throws ConfigError for unknown tags or missing parameters.
CovarianceEstimate estimate_with(const EstimatorSpec& spec,
                                 const TrainingSet& z,
                                 const LikelihoodRatioReference* ref = nullptr);

// Fills unset estimator parameters from the scenario: noise from the preset
// noise floor, rank from the recommended clutter rank, and cncml's K_max
// from the truth condition number.
EstimatorSpec resolve_estimator_defaults(const EstimatorSpec& spec,
                                         const ScenarioPreset& preset);

// Full factorial Monte Carlo sweep over scenario x estimator x K x trial.
struct BenchmarkPlan {
  std::vector<std::string> scenarios;    // preset names
  std::vector<ScenarioPreset> presets;   // used instead of names when set
  std::vector<EstimatorSpec> estimators;
  std::vector<int> sample_counts;      // K values
  std::vector<std::string> metrics;    // "sinr" | "trd"
  int trials = 0;
  std::uint64_t seed = 0;
  int workers = 1;
  std::filesystem::path cache_dir;     // LR0 cache for EL selection
  bool allow_calibrate = true;         // false: missing cache is an error
  int lr0_trials = 2000;
};

// Per-trial seeds derive from (master seed, cell index, trial), so results
// are identical for any worker count. Estimator failures are recorded in the
// affected cell and do not abort the run.
std::vector<BenchmarkResult> run_benchmark(const BenchmarkPlan& plan);

// Resolves the expected-likelihood reference for (dim, samples) through the
// cache directory. With allow_calibrate=false a missing cache entry is a
// ConfigError telling the user to run the calibrate command.
LikelihoodRatioReference benchmark_reference(
    const std::filesystem::path& cache_dir, bool allow_calibrate, int dim,
    int samples, int lr0_trials, std::uint64_t seed, int workers = 1);

// Mean SINR loss over the preset's angle-Doppler grid: one result row per
// grid cell, averaged in dB across trials.
std::vector<BenchmarkResult> sinr_surface(const ScenarioPreset& preset,
                                          const EstimatorSpec& spec,
                                          int samples, int trials,
                                          std::uint64_t seed, int workers = 1,
                                          const LikelihoodRatioReference* ref = nullptr);

}  // namespace stap
