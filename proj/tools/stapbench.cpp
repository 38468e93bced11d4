// stapbench: configuration-driven benchmarks for structured covariance
// estimation. Subcommands:
//   calibrate   build/refresh likelihood-ratio reference tables
//   estimate    run one estimator on one training set
//   benchmark   Monte Carlo metric sweep, one CSV per metric
//   pd-curve    detection probability versus SNR
//   sinr-curve  SINR loss over the scenario's angle-Doppler grid
//
// Exit codes: 0 ok, 1 configuration error, 2 numerical failure, 3 I/O error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stap/core.hpp"
#include "stap/estimators.hpp"
#include "stap/evaluation.hpp"
#include "stap/expected_likelihood.hpp"
#include "stap/matrix_io.hpp"
#include "stap/parallel.hpp"
#include "stap/rng.hpp"
#include "stap/run_config.hpp"
#include "stap/simulation.hpp"

namespace {

constexpr const char* kCacheEnvVar = "STAPBENCH_CACHE_DIR";

struct CliArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<int> workers;
  std::optional<std::string> cache_dir;
  std::optional<std::string> output;
  bool no_calibrate = false;
  // calibrate-only:
  std::optional<int> dim;
  std::optional<int> samples;
};

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Flag > config file > environment > built-in default.
stap::RunConfiguration effective_config(const CliArgs& args) {
  stap::RunConfiguration cfg;
  if (!args.config_path.empty())
    cfg = stap::load_run_configuration(args.config_path);
  if (args.seed) cfg.seed = *args.seed;
  if (args.trials) cfg.trials = *args.trials;
  if (args.workers) cfg.workers = *args.workers;
  if (args.output) cfg.output = *args.output;
  if (args.no_calibrate) cfg.no_calibrate = true;
  if (args.cache_dir) {
    cfg.cache_dir = *args.cache_dir;
  } else if (cfg.cache_dir.empty()) {
    const char* env = std::getenv(kCacheEnvVar);
    cfg.cache_dir = env != nullptr ? env : "lr0-cache";
  }
  if (cfg.workers <= 0) cfg.workers = stap::default_workers();
  return cfg;
}

const stap::ScenarioPreset& single_scenario(
    const stap::RunConfiguration& cfg, std::optional<stap::ScenarioPreset>& slot) {
  slot = stap::scenario_from_config(cfg);
  return *slot;
}

int first_sample_count(const stap::RunConfiguration& cfg) {
  if (cfg.sample_counts.empty())
    throw stap::ConfigError("config: 'sample_counts' needs at least one K");
  return cfg.sample_counts.front();
}

std::filesystem::path required_output(const stap::RunConfiguration& cfg) {
  if (cfg.output.empty())
    throw stap::ConfigError("config: 'output' is required (or pass --output)");
  return cfg.output;
}

std::optional<stap::LikelihoodRatioReference> reference_if_needed(
    const stap::RunConfiguration& cfg, const stap::EstimatorSpec& spec, int dim,
    int samples) {
  if (!(spec.el_rank || spec.el_noise || spec.el_condition)) return std::nullopt;
  return stap::benchmark_reference(cfg.cache_dir, !cfg.no_calibrate, dim,
                                   samples, cfg.lr0_trials, cfg.seed,
                                   cfg.workers);
}

int cmd_calibrate(const CliArgs& args) {
  stap::RunConfiguration cfg = effective_config(args);
  std::vector<std::pair<int, int>> pairs = cfg.calibration_pairs;
  if (args.dim || args.samples) {
    if (!args.dim || !args.samples)
      throw stap::ConfigError("calibrate: --dim and --samples go together");
    pairs.clear();
    pairs.emplace_back(*args.dim, *args.samples);
  }
  if (pairs.empty())
    throw stap::ConfigError(
        "calibrate: needs --dim/--samples or a 'calibrate' list of [N, K] "
        "pairs in the configuration");
  const int trials = args.trials ? *args.trials : cfg.lr0_trials;
  for (const auto& [n, k] : pairs) {
    stap::LikelihoodRatioReference ref = stap::calibrate_lr0_cached(
        cfg.cache_dir, n, k, trials, cfg.seed, cfg.workers);
    std::printf("N=%d K=%d trials=%d seed=%llu log_lr0=%s cache=%s\n", ref.dim,
                ref.samples, ref.trials,
                static_cast<unsigned long long>(ref.seed),
                format_double(ref.log_lr0).c_str(),
                stap::lr0_cache_path(cfg.cache_dir, n, k, trials, cfg.seed)
                    .string()
                    .c_str());
  }
  return 0;
}

int cmd_estimate(const CliArgs& args) {
  stap::RunConfiguration cfg = effective_config(args);
  if (cfg.estimators.size() != 1)
    throw stap::ConfigError("estimate: 'estimators' must hold exactly one entry");

  stap::TrainingSet z;
  stap::EstimatorSpec spec = cfg.estimators.front();
  if (cfg.training_path) {
    z = stap::read_training(*cfg.training_path);
  } else {
    std::optional<stap::ScenarioPreset> slot;
    const stap::ScenarioPreset& preset = single_scenario(cfg, slot);
    spec = stap::resolve_estimator_defaults(spec, preset);
    z = stap::sample_training(preset.truth, first_sample_count(cfg),
                              stap::mix_seed(cfg.seed, 1), cfg.workers);
  }

  const auto ref = reference_if_needed(cfg, spec, z.dim, z.count);
  const stap::CovarianceEstimate est =
      stap::estimate_with(spec, z, ref ? &*ref : nullptr);

  std::string log_lr = "nan";
  try {
    log_lr = format_double(
        stap::likelihood_ratio_log(est, stap::sample_covariance(z)));
  } catch (const stap::NumericError&) {
    // singular estimate: the log-LR is not defined; record nan
  }

  std::vector<std::pair<std::string, std::string>> meta;
  meta.emplace_back("estimator", est.tag);
  if (est.rank_used) meta.emplace_back("rank_used", std::to_string(*est.rank_used));
  if (est.noise_used) meta.emplace_back("noise_used", format_double(*est.noise_used));
  if (est.condition_number_used)
    meta.emplace_back("condition_number_used",
                      format_double(*est.condition_number_used));
  if (est.shrinkage_used)
    meta.emplace_back("shrinkage_used", format_double(*est.shrinkage_used));
  if (est.iterations > 0)
    meta.emplace_back("iterations", std::to_string(est.iterations));
  if (est.clip_violation > 0.0)
    meta.emplace_back("clip_violation", format_double(est.clip_violation));
  meta.emplace_back("log_lr", log_lr);

  stap::write_matrix(required_output(cfg), est.matrix, meta);
  for (const auto& [key, value] : meta)
    std::printf("%s %s\n", key.c_str(), value.c_str());
  return 0;
}

int cmd_benchmark(const CliArgs& args) {
  stap::RunConfiguration cfg = effective_config(args);

  stap::BenchmarkPlan plan;
  if (cfg.scenario_inline)
    plan.presets.push_back(stap::scenario_from_config(cfg));
  for (const std::string& name : cfg.scenario_names)
    plan.presets.push_back(stap::make_scenario(name));
  plan.estimators = cfg.estimators;
  plan.sample_counts = cfg.sample_counts;
  plan.metrics = cfg.metrics.empty() ? std::vector<std::string>{"sinr"}
                                     : cfg.metrics;
  plan.trials = cfg.trials;
  plan.seed = cfg.seed;
  plan.workers = cfg.workers;
  plan.cache_dir = cfg.cache_dir;
  plan.allow_calibrate = !cfg.no_calibrate;
  plan.lr0_trials = cfg.lr0_trials;

  const std::vector<stap::BenchmarkResult> rows = stap::run_benchmark(plan);

  std::filesystem::path stem = required_output(cfg);
  if (stem.extension() == ".csv") stem.replace_extension();
  for (const std::string& metric : plan.metrics) {
    std::vector<stap::BenchmarkResult> subset;
    for (const stap::BenchmarkResult& row : rows)
      if (row.metric == metric) subset.push_back(row);
    const std::filesystem::path path =
        stem.string() + "_" + metric + ".csv";
    stap::write_results_csv(path, subset);
    std::printf("wrote %s (%zu rows)\n", path.string().c_str(), subset.size());
  }
  return 0;
}

int cmd_pd_curve(const CliArgs& args) {
  stap::RunConfiguration cfg = effective_config(args);
  std::optional<stap::ScenarioPreset> slot;
  const stap::ScenarioPreset& preset = single_scenario(cfg, slot);
  if (cfg.estimators.empty())
    throw stap::ConfigError("pd-curve: 'estimators' is empty");
  if (cfg.snr_grid_db.empty())
    throw stap::ConfigError("pd-curve: 'snr_grid_db' is required");
  const int samples = first_sample_count(cfg);
  const stap::DetectorKind kind = stap::detector_from_name(cfg.detector);

  std::vector<stap::BenchmarkResult> rows;
  auto append = [&](const stap::CovarianceEstimate& est,
                    const std::string& label, std::uint64_t pd_seed) {
    std::vector<stap::BenchmarkResult> pd = stap::probability_of_detection(
        kind, preset.target, est, preset.truth, cfg.snr_grid_db, cfg.pfa,
        cfg.trials, pd_seed, samples, cfg.workers, cfg.calibration_trials);
    for (stap::BenchmarkResult& row : pd) {
      row.scenario = preset.name;
      row.estimator = label;
      row.samples = samples;
      rows.push_back(std::move(row));
    }
  };

  if (cfg.include_truth) {
    stap::CovarianceEstimate truth_est;
    truth_est.matrix = preset.truth;
    truth_est.tag = "truth";
    append(truth_est, "truth", stap::mix_seed(cfg.seed, 2, 0));
  }
  for (std::size_t ei = 0; ei < cfg.estimators.size(); ++ei) {
    stap::EstimatorSpec spec =
        stap::resolve_estimator_defaults(cfg.estimators[ei], preset);
    stap::TrainingSet z = stap::sample_training(
        preset.truth, samples, stap::mix_seed(cfg.seed, 1, ei), cfg.workers);
    const auto ref = reference_if_needed(cfg, spec, z.dim, z.count);
    const stap::CovarianceEstimate est =
        stap::estimate_with(spec, z, ref ? &*ref : nullptr);
    append(est, spec.label(), stap::mix_seed(cfg.seed, 2, ei + 1));
  }

  const std::filesystem::path path = required_output(cfg);
  stap::write_results_csv(path, rows);
  std::printf("wrote %s (%zu rows)\n", path.string().c_str(), rows.size());
  return 0;
}

int cmd_sinr_curve(const CliArgs& args) {
  stap::RunConfiguration cfg = effective_config(args);
  std::optional<stap::ScenarioPreset> slot;
  const stap::ScenarioPreset& preset = single_scenario(cfg, slot);
  if (cfg.estimators.empty())
    throw stap::ConfigError("sinr-curve: 'estimators' is empty");
  const int samples = first_sample_count(cfg);

  std::vector<stap::BenchmarkResult> rows;
  for (std::size_t ei = 0; ei < cfg.estimators.size(); ++ei) {
    const stap::EstimatorSpec& spec = cfg.estimators[ei];
    const auto ref = reference_if_needed(
        cfg, spec, static_cast<int>(preset.truth.rows()), samples);
    std::vector<stap::BenchmarkResult> surface = stap::sinr_surface(
        preset, spec, samples, cfg.trials, stap::mix_seed(cfg.seed, 3, ei),
        cfg.workers, ref ? &*ref : nullptr);
    for (stap::BenchmarkResult& row : surface) rows.push_back(std::move(row));
  }

  const std::filesystem::path path = required_output(cfg);
  stap::write_results_csv(path, rows);
  std::printf("wrote %s (%zu rows)\n", path.string().c_str(), rows.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"structured-covariance estimation benchmarks"};
  app.require_subcommand(1);

  CliArgs args;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", args.config_path, "JSON configuration file");
    cmd->add_option("--seed", args.seed, "master seed (overrides config)");
    cmd->add_option("--trials", args.trials, "trial count (overrides config)");
    cmd->add_option("--workers", args.workers, "worker threads (default: processors)");
    cmd->add_option("--cache-dir", args.cache_dir,
                    std::string("LR0 cache directory (overrides config and $") +
                        kCacheEnvVar + ")");
    cmd->add_option("--output", args.output, "output path (overrides config)");
    cmd->add_flag("--no-calibrate", args.no_calibrate,
                  "fail instead of computing missing LR0 references");
  };

  CLI::App* calibrate = app.add_subcommand(
      "calibrate", "build or refresh likelihood-ratio reference tables");
  add_common(calibrate);
  calibrate->add_option("--dim", args.dim, "matrix dimension N");
  calibrate->add_option("--samples", args.samples, "sample count K");

  CLI::App* estimate =
      app.add_subcommand("estimate", "run one estimator on one training set");
  add_common(estimate);
  CLI::App* benchmark =
      app.add_subcommand("benchmark", "Monte Carlo metric sweep (CSV per metric)");
  add_common(benchmark);
  CLI::App* pd = app.add_subcommand("pd-curve", "detection probability versus SNR");
  add_common(pd);
  CLI::App* sinr =
      app.add_subcommand("sinr-curve", "SINR loss over the angle-Doppler grid");
  add_common(sinr);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (calibrate->parsed()) return cmd_calibrate(args);
    if (estimate->parsed()) return cmd_estimate(args);
    if (benchmark->parsed()) return cmd_benchmark(args);
    if (pd->parsed()) return cmd_pd_curve(args);
    if (sinr->parsed()) return cmd_sinr_curve(args);
    std::fprintf(stderr, "error: no subcommand\n");
    return 1;
  } catch (const stap::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const stap::NumericError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 2;
  } catch (const stap::IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return 2;
  }
}
