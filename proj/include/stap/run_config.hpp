#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stap/evaluation.hpp"
#include "stap/simulation.hpp"

namespace stap {

// Everything a command run needs, read from a JSON configuration file.
// Unknown keys are rejected with a diagnostic naming the key, so typos
// surface instead of silently falling back to defaults.
struct RunConfiguration {
  // Scenario: a preset name, an inline jammer definition, or several presets.
  std::vector<std::string> scenario_names;
  std::optional<JammerScenario> scenario_inline;

  std::vector<EstimatorSpec> estimators;
  std::vector<int> sample_counts;
  int trials = 100;
  std::uint64_t seed = 0;
  std::vector<std::string> metrics;

  std::filesystem::path output;
  std::filesystem::path cache_dir;
  int workers = 0;  // 0: library picks the hardware default
  int lr0_trials = 2000;
  bool no_calibrate = false;

  // Detection settings (pd-curve).
  std::string detector = "nmf";
  double pfa = 1e-2;
  int calibration_trials = 100000;
  std::vector<double> snr_grid_db;
  bool include_truth = true;

  // estimate command: optional training-set file (otherwise generated).
  std::optional<std::filesystem::path> training_path;

  // calibrate command: (dim, samples) pairs.
  std::vector<std::pair<int, int>> calibration_pairs;
};

// Parses a configuration file; throws ConfigError (bad content) or IoError
// (unreadable file).
RunConfiguration load_run_configuration(const std::filesystem::path& path);

// Resolves the configured scenario into a preset: looks up the named preset
// or builds one from the inline jammer definition (desk-scale evaluation
// grid, recommended rank from the truth spectrum).
ScenarioPreset scenario_from_config(const RunConfiguration& config,
                                    const std::string& name_or_empty = "");

// Writes benchmark rows as CSV with the fixed header
// scenario,estimator,K,metric,coord1,coord2,mean,stderr,trials,seed.
// Values are %.17g so reruns are byte-identical.
void write_results_csv(const std::filesystem::path& path,
                       const std::vector<BenchmarkResult>& rows);

}  // namespace stap
