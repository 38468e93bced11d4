#include "stap/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stap/cncml.hpp"
#include "stap/eastr.hpp"
#include "stap/estimators.hpp"
#include "stap/parallel.hpp"
#include "stap/rng.hpp"
#include "stap/stats.hpp"

namespace stap {

namespace {

constexpr double kPinvCutoff = 1e-10;  // relative singular-value cutoff

// Truth^{1/2} for H0/H1 sample draws; negative round-off floored at zero.
CMat truth_root(const HermitianMatrix& truth) {
  EigenSystem es = eig_hermitian(truth);
  RVec root = es.values.cwiseMax(0.0).cwiseSqrt();
  return es.vectors * root.asDiagonal() * es.vectors.adjoint();
}

// s^H R^{-1} s for a positive definite truth; throws when singular.
double whitened_energy(const HermitianMatrix& truth, const CVec& s) {
  Eigen::LLT<CMat> llt(truth);
  if (llt.info() != Eigen::Success)
    throw NumericError("evaluation: truth covariance is singular");
  return (s.adjoint() * llt.solve(s)).real()(0, 0);
}

double statistic_from_parts(DetectorKind kind, const CVec& qs, double sqs,
                            const CMat& qi, const CVec& e, int sample_count) {
  const Complex cross = qs.dot(e);  // s^H Q e (dot conjugates its left side)
  const double num = std::norm(cross);
  switch (kind) {
    case DetectorKind::AMF:
      if (sqs <= 0.0) throw NumericError("detector: degenerate steering");
      return num / sqs;
    case DetectorKind::NMF: {
      const double eqe = (e.adjoint() * qi * e).real()(0, 0);
      const double denom = sqs * eqe;
      if (denom <= 0.0) throw NumericError("detector: degenerate steering");
      return num / denom;
    }
    case DetectorKind::GLRT: {
      const double eqe = (e.adjoint() * qi * e).real()(0, 0);
      const double denom =
          sqs * (1.0 + eqe / static_cast<double>(sample_count));
      if (denom <= 0.0) throw NumericError("detector: degenerate steering");
      return num / denom;
    }
  }
  throw std::invalid_argument("detector: unknown kind");
}

// SINR loss in dB from precomputed pieces: qs = Q s, b = Q R Q applied form.
double sinr_db_from_parts(double sqs, double mid, double s_r_s) {
  const double eta = sqs * sqs / (std::abs(mid) * std::abs(s_r_s));
  return 10.0 * std::log10(eta);
}

// Aggregates a per-trial vector that may contain NaNs for failed trials.
void aggregate(const std::vector<double>& per_trial, double& mean_out,
               double& se_out, int& failures_out) {
  std::vector<double> ok;
  ok.reserve(per_trial.size());
  for (double v : per_trial)
    if (std::isfinite(v)) ok.push_back(v);
  failures_out = static_cast<int>(per_trial.size() - ok.size());
  if (ok.empty()) {
    mean_out = std::numeric_limits<double>::quiet_NaN();
    se_out = std::numeric_limits<double>::quiet_NaN();
    return;
  }
  mean_out = pairwise_mean(ok);
  se_out = standard_error(ok);
}

}  // namespace

EstimatorSpec resolve_estimator_defaults(const EstimatorSpec& spec,
                                         const ScenarioPreset& preset) {
  EstimatorSpec out = spec;
  if (!out.noise) out.noise = preset.noise_power;
  if (!out.rank) out.rank = std::max(1, preset.clutter_rank);
  if (!out.noise_lower_bound) out.noise_lower_bound = preset.noise_power;
  if (out.tag == "cncml" && !out.condition_number && !out.el_condition) {
    EigenSystem es = eig_hermitian(preset.truth);
    out.condition_number = es.values(0) / es.values(es.values.size() - 1);
  }
  return out;
}

CMat estimate_inverse(const CovarianceEstimate& estimate) {
  if (estimate.inverse.has_value()) return *estimate.inverse;
  EigenSystem es = eig_hermitian(estimate.matrix);
  const double cutoff = kPinvCutoff * std::max(es.values(0), 0.0);
  RVec inv = RVec::Zero(es.values.size());
  for (Eigen::Index i = 0; i < es.values.size(); ++i)
    if (es.values(i) > cutoff) inv(i) = 1.0 / es.values(i);
  return es.vectors * inv.asDiagonal() * es.vectors.adjoint();
}

double normalized_sinr_db(const CovarianceEstimate& estimate,
                          const HermitianMatrix& truth,
                          const SteeringVector& s) {
  if (s.entries.size() != truth.rows())
    throw std::invalid_argument("normalized_sinr_db: steering dimension mismatch");
  const CMat qi = estimate_inverse(estimate);
  const CVec w = qi * s.entries;
  const double sqs = (s.entries.adjoint() * w).real()(0, 0);
  const double mid = (w.adjoint() * truth * w).real()(0, 0);
  const double s_r_s = whitened_energy(truth, s.entries);
  return sinr_db_from_parts(sqs, mid, s_r_s);
}

double trd(const CovarianceEstimate& estimate, const HermitianMatrix& truth) {
  if (truth.rows() != estimate.matrix.rows())
    throw std::invalid_argument("trd: dimension mismatch");
  const CMat qi = estimate_inverse(estimate);
  const double whitened_trace = (truth * qi).trace().real();
  return std::abs(whitened_trace / static_cast<double>(truth.rows()) - 1.0);
}

std::string to_string(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::NMF: return "nmf";
    case DetectorKind::AMF: return "amf";
    case DetectorKind::GLRT: return "glrt";
  }
  return "?";
}

DetectorKind detector_from_name(const std::string& name) {
  if (name == "nmf") return DetectorKind::NMF;
  if (name == "amf") return DetectorKind::AMF;
  if (name == "glrt") return DetectorKind::GLRT;
  throw ConfigError("detector: unknown kind '" + name + "' (nmf|amf|glrt)");
}

double detector_statistic(DetectorKind kind, const SteeringVector& s,
                          const CovarianceEstimate& estimate,
                          const CVec& observation, int sample_count) {
  if (s.entries.size() != observation.size())
    throw std::invalid_argument("detector: steering/observation size mismatch");
  if (kind == DetectorKind::GLRT && sample_count < 1)
    throw std::invalid_argument("detector: GLRT needs the sample count K");
  const CMat qi = estimate_inverse(estimate);
  const CVec qs = qi * s.entries;
  const double sqs = (s.entries.adjoint() * qs).real()(0, 0);
  return statistic_from_parts(kind, qs, sqs, qi, observation, sample_count);
}

double calibrate_threshold(DetectorKind kind, const SteeringVector& s,
                           const CovarianceEstimate& estimate,
                           const HermitianMatrix& truth, double pfa,
                           int trials, std::uint64_t seed, int sample_count,
                           int workers) {
  if (!(pfa > 0.0) || !(pfa < 1.0))
    throw std::invalid_argument("calibrate_threshold: pfa must be in (0, 1)");
  if (static_cast<double>(trials) * pfa < 50.0)
    throw std::invalid_argument(
        "calibrate_threshold: needs trials * pfa >= 50 for a stable quantile");
  if (kind == DetectorKind::GLRT && sample_count < 1)
    throw std::invalid_argument("calibrate_threshold: GLRT needs the sample count K");

  const CMat qi = estimate_inverse(estimate);
  const CVec qs = qi * s.entries;
  const double sqs = (s.entries.adjoint() * qs).real()(0, 0);
  const CMat w = truth_root(truth);
  const int n = static_cast<int>(truth.rows());

  std::vector<double> stats(static_cast<std::size_t>(trials));
  parallel_for(stats.size(), workers, [&](std::size_t t) {
    std::mt19937_64 eng = rng_stream(seed, 0, t);
    CVec g(n);
    for (int i = 0; i < n; ++i) g(i) = complex_gaussian(eng);
    const CVec e = w * g;
    stats[t] = statistic_from_parts(kind, qs, sqs, qi, e, sample_count);
  });
  std::sort(stats.begin(), stats.end());
  return quantile_sorted(stats, 1.0 - pfa);
}

std::vector<BenchmarkResult> probability_of_detection(
    DetectorKind kind, const SteeringVector& s,
    const CovarianceEstimate& estimate, const HermitianMatrix& truth,
    const std::vector<double>& snr_grid_db, double pfa, int trials,
    std::uint64_t seed, int sample_count, int workers,
    int calibration_trials) {
  const int n = static_cast<int>(truth.rows());
  if (calibration_trials <= 0) calibration_trials = trials;
  const double threshold =
      calibrate_threshold(kind, s, estimate, truth, pfa, calibration_trials,
                          seed, sample_count, workers);

  const CMat qi = estimate_inverse(estimate);
  const CVec qs = qi * s.entries;
  const double sqs = (s.entries.adjoint() * qs).real()(0, 0);
  const CMat w = truth_root(truth);
  const double s_r_s = whitened_energy(truth, s.entries);

  std::vector<BenchmarkResult> out;
  for (std::size_t gi = 0; gi < snr_grid_db.size(); ++gi) {
    const double snr_linear = std::pow(10.0, snr_grid_db[gi] / 10.0);
    const double alpha = std::sqrt(snr_linear / s_r_s);

    BenchmarkResult row;
    row.estimator = estimate.tag;
    row.metric = "pd-" + to_string(kind);
    row.grid = {snr_grid_db[gi]};
    row.trials = trials;
    row.seed = seed;
    row.per_trial.assign(static_cast<std::size_t>(trials), 0.0);
    parallel_for(row.per_trial.size(), workers, [&](std::size_t t) {
      std::mt19937_64 eng = rng_stream(seed, 1 + gi, t);
      CVec g(n);
      for (int i = 0; i < n; ++i) g(i) = complex_gaussian(eng);
      const CVec e = alpha * s.entries + w * g;
      const double stat = statistic_from_parts(kind, qs, sqs, qi, e, sample_count);
      row.per_trial[t] = stat > threshold ? 1.0 : 0.0;
    });
    aggregate(row.per_trial, row.mean, row.standard_error, row.failures);
    out.push_back(std::move(row));
  }
  return out;
}

std::string EstimatorSpec::label() const {
  if (name) return *name;
  std::string out = tag;
  if (el_noise) out += "-el-rank-noise";
  else if (el_rank) out += "-el-rank";
  if (el_condition) out += "-el-cn";
  return out;
}

std::vector<std::string> estimator_tags() {
  return {"smi",  "fml",          "rcml", "rcml_lb", "wax_kailath",
          "looc", "eigencanceler", "itam", "eastr",   "cncml"};
}

CovarianceEstimate estimate_with(const EstimatorSpec& spec,
                                 const TrainingSet& z,
                                 const LikelihoodRatioReference* ref) {
  const bool wants_el = spec.el_rank || spec.el_noise || spec.el_condition;
  if (wants_el && ref == nullptr)
    throw ConfigError("estimator '" + spec.tag +
                      "': expected-likelihood selection needs a calibrated reference");

  auto need_noise = [&]() -> double {
    if (!spec.noise)
      throw ConfigError("estimator '" + spec.tag + "': missing parameter 'noise'");
    return *spec.noise;
  };
  auto need_rank = [&]() -> int {
    if (!spec.rank)
      throw ConfigError("estimator '" + spec.tag + "': missing parameter 'rank'");
    return *spec.rank;
  };

  const bool el_ok = spec.tag == "rcml" || spec.tag == "cncml";
  if (wants_el && !el_ok)
    throw ConfigError("estimator '" + spec.tag +
                      "': expected-likelihood selection applies to rcml and cncml only");

  if (spec.tag == "smi") return smi(sample_covariance(z));
  if (spec.tag == "looc") return looc(z);

  const HermitianMatrix s = sample_covariance(z);
  if (spec.tag == "fml") return fml(s, need_noise());
  if (spec.tag == "rcml") {
    if (spec.el_noise) {
      const ElSelection sel = select_rank_noise_el(s, need_rank(), *ref);
      return rcml(s, *sel.noise, *sel.rank);
    }
    if (spec.el_rank) {
      const double noise = need_noise();
      const ElSelection sel = select_rank_el(s, noise, need_rank(), *ref);
      return rcml(s, noise, *sel.rank);
    }
    return rcml(s, need_noise(), need_rank());
  }
  if (spec.tag == "rcml_lb") {
    if (!spec.noise_lower_bound)
      throw ConfigError("estimator 'rcml_lb': missing parameter 'noise_lower_bound'");
    return rcml_lb(s, *spec.noise_lower_bound, need_rank());
  }
  if (spec.tag == "wax_kailath") return wax_kailath(s, need_rank());
  if (spec.tag == "eigencanceler") return eigencanceler(s, need_noise(), need_rank());
  if (spec.tag == "itam") return itam(s, need_rank());
  if (spec.tag == "eastr") return eastr(s, need_noise(), need_rank());
  if (spec.tag == "cncml") {
    const double noise = need_noise();
    if (spec.el_condition) {
      const ElSelection sel = select_condition_number_el(s, noise, *ref);
      return cncml(s, noise, *sel.condition_number);
    }
    if (!spec.condition_number)
      throw ConfigError("estimator 'cncml': missing parameter 'condition_number'");
    return cncml(s, noise, *spec.condition_number);
  }
  throw ConfigError("estimator: unknown tag '" + spec.tag + "'");
}

LikelihoodRatioReference benchmark_reference(
    const std::filesystem::path& cache_dir, bool allow_calibrate, int dim,
    int samples, int lr0_trials, std::uint64_t seed, int workers) {
  if (cache_dir.empty())
    throw ConfigError(
        "benchmark: 'cache_dir' is required when expected-likelihood "
        "selection is enabled");
  if (allow_calibrate)
    return calibrate_lr0_cached(cache_dir, dim, samples, lr0_trials, seed,
                                workers);
  const auto path = lr0_cache_path(cache_dir, dim, samples, lr0_trials, seed);
  auto cached = load_lr0(path);
  if (!cached)
    throw ConfigError("benchmark: reference table " + path.string() +
                      " is missing; run the calibrate command first");
  return *cached;
}

std::vector<BenchmarkResult> run_benchmark(const BenchmarkPlan& plan) {
  if (plan.scenarios.empty() && plan.presets.empty())
    throw ConfigError("benchmark: 'scenarios' is empty");
  if (plan.estimators.empty()) throw ConfigError("benchmark: 'estimators' is empty");
  if (plan.sample_counts.empty())
    throw ConfigError("benchmark: 'sample_counts' is empty");
  if (plan.metrics.empty()) throw ConfigError("benchmark: 'metrics' is empty");
  if (plan.trials < 1) throw ConfigError("benchmark: 'trials' must be >= 1");
  const auto known = estimator_tags();
  for (const EstimatorSpec& spec : plan.estimators)
    if (std::find(known.begin(), known.end(), spec.tag) == known.end())
      throw ConfigError("benchmark: unknown estimator tag '" + spec.tag + "'");
  for (const std::string& metric : plan.metrics)
    if (metric != "sinr" && metric != "trd")
      throw ConfigError("benchmark: unknown metric '" + metric + "' (sinr|trd)");

  const int workers = std::max(1, plan.workers);
  const std::size_t n_est = plan.estimators.size();
  const std::size_t n_k = plan.sample_counts.size();

  std::vector<BenchmarkResult> results;
  std::vector<ScenarioPreset> presets = plan.presets;
  if (presets.empty())
    for (const std::string& name : plan.scenarios)
      presets.push_back(make_scenario(name));

  for (std::size_t si = 0; si < presets.size(); ++si) {
    const ScenarioPreset& preset = presets[si];
    for (std::size_t ei = 0; ei < n_est; ++ei) {
      const EstimatorSpec spec =
          resolve_estimator_defaults(plan.estimators[ei], preset);
      const bool wants_el = spec.el_rank || spec.el_noise || spec.el_condition;
      for (std::size_t ki = 0; ki < n_k; ++ki) {
        const int samples = plan.sample_counts[ki];
        const std::uint64_t cell = (si * n_est + ei) * n_k + ki;

        LikelihoodRatioReference ref;
        if (wants_el)
          ref = benchmark_reference(plan.cache_dir, plan.allow_calibrate,
                                    static_cast<int>(preset.truth.rows()),
                                    samples, plan.lr0_trials, plan.seed,
                                    workers);

        std::vector<std::vector<double>> values(
            plan.metrics.size(),
            std::vector<double>(static_cast<std::size_t>(plan.trials),
                                std::numeric_limits<double>::quiet_NaN()));
        parallel_for(static_cast<std::size_t>(plan.trials), workers,
                     [&](std::size_t t) {
                       const std::uint64_t tseed = mix_seed(plan.seed, cell, t);
                       try {
                         TrainingSet z =
                             sample_training(preset.truth, samples, tseed);
                         CovarianceEstimate est =
                             estimate_with(spec, z, wants_el ? &ref : nullptr);
                         for (std::size_t m = 0; m < plan.metrics.size(); ++m) {
                           if (plan.metrics[m] == "sinr")
                             values[m][t] = normalized_sinr_db(est, preset.truth,
                                                               preset.target);
                           else
                             values[m][t] = trd(est, preset.truth);
                         }
                       } catch (const NumericError&) {
                         // failed trial: slots stay NaN and count as failures
                       }
                     });

        for (std::size_t m = 0; m < plan.metrics.size(); ++m) {
          BenchmarkResult row;
          row.scenario = preset.name;
          row.estimator = spec.label();
          row.samples = samples;
          row.metric = plan.metrics[m];
          row.per_trial = std::move(values[m]);
          row.trials = plan.trials;
          row.seed = plan.seed;
          aggregate(row.per_trial, row.mean, row.standard_error, row.failures);
          results.push_back(std::move(row));
        }
      }
    }
  }
  return results;
}

std::vector<BenchmarkResult> sinr_surface(const ScenarioPreset& preset,
                                          const EstimatorSpec& spec_in,
                                          int samples, int trials,
                                          std::uint64_t seed, int workers,
                                          const LikelihoodRatioReference* ref) {
  if (trials < 1) throw ConfigError("sinr_surface: 'trials' must be >= 1");
  const EstimatorSpec spec = resolve_estimator_defaults(spec_in, preset);
  const bool wants_el = spec.el_rank || spec.el_noise || spec.el_condition;
  if (wants_el && ref == nullptr)
    throw ConfigError("sinr_surface: expected-likelihood selection needs a reference");

  const int n_angle = std::max(1, preset.angle_cells);
  const int n_doppler = std::max(1, preset.doppler_cells);
  const std::size_t n_cells =
      static_cast<std::size_t>(n_angle) * static_cast<std::size_t>(n_doppler);

  constexpr double kDegToRad = M_PI / 180.0;
  auto grid_coord = [](double lo, double hi, int cells, int i) {
    return cells <= 1 ? lo : lo + (hi - lo) * i / (cells - 1);
  };

  // Precompute per-cell steering vectors and their whitened energies.
  std::vector<CVec> steer(n_cells);
  std::vector<double> s_r_s(n_cells);
  std::vector<std::pair<double, double>> coords(n_cells);
  Eigen::LLT<CMat> truth_llt(preset.truth);
  if (truth_llt.info() != Eigen::Success)
    throw NumericError("sinr_surface: truth covariance is singular");
  for (int ai = 0; ai < n_angle; ++ai) {
    const double angle_deg =
        grid_coord(preset.angle_min_deg, preset.angle_max_deg, n_angle, ai);
    for (int di = 0; di < n_doppler; ++di) {
      const double doppler =
          grid_coord(preset.doppler_min_hz, preset.doppler_max_hz, n_doppler, di);
      const std::size_t c = static_cast<std::size_t>(ai) * n_doppler + di;
      steer[c] = steering_vector(angle_deg * kDegToRad, doppler, preset.prf_hz,
                                 preset.channels, preset.pulses,
                                 preset.spacing_over_wavelength)
                     .entries;
      s_r_s[c] = (steer[c].adjoint() * truth_llt.solve(steer[c])).real()(0, 0);
      coords[c] = {angle_deg, doppler};
    }
  }

  // values[cell][trial], filled trial-parallel with slot-indexed writes.
  std::vector<std::vector<double>> values(
      n_cells, std::vector<double>(static_cast<std::size_t>(trials),
                                   std::numeric_limits<double>::quiet_NaN()));
  parallel_for(static_cast<std::size_t>(trials), workers, [&](std::size_t t) {
    const std::uint64_t tseed = mix_seed(seed, 0, t);
    try {
      TrainingSet z = sample_training(preset.truth, samples, tseed);
      CovarianceEstimate est = estimate_with(spec, z, ref);
      const CMat qi = estimate_inverse(est);
      const CMat b = hermitize(qi * preset.truth * qi);
      for (std::size_t c = 0; c < n_cells; ++c) {
        const double sqs = (steer[c].adjoint() * qi * steer[c]).real()(0, 0);
        const double mid = (steer[c].adjoint() * b * steer[c]).real()(0, 0);
        values[c][t] = sinr_db_from_parts(sqs, mid, s_r_s[c]);
      }
    } catch (const NumericError&) {
      // failed trial: all cells stay NaN for this t
    }
  });

  std::vector<BenchmarkResult> out;
  out.reserve(n_cells);
  for (std::size_t c = 0; c < n_cells; ++c) {
    BenchmarkResult row;
    row.scenario = preset.name;
    row.estimator = spec.label();
    row.samples = samples;
    row.metric = "sinr";
    row.grid = {coords[c].first, coords[c].second};
    row.per_trial = std::move(values[c]);
    row.trials = trials;
    row.seed = seed;
    aggregate(row.per_trial, row.mean, row.standard_error, row.failures);
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace stap
