#include "stap/run_config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include <json.hpp>

namespace stap {

namespace {

using nlohmann::json;

[[noreturn]] void bad_key(const std::string& context, const std::string& message) {
  throw ConfigError("config: '" + context + "' " + message);
}

void reject_unknown_keys(const json& obj, const std::string& context,
                         const std::set<std::string>& known) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (known.find(it.key()) == known.end())
      throw ConfigError("config: unknown key '" + context + it.key() + "'");
}

double as_number(const json& v, const std::string& context) {
  if (!v.is_number()) bad_key(context, "must be a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& context) {
  if (!v.is_number_integer()) bad_key(context, "must be an integer");
  return v.get<int>();
}

bool as_bool(const json& v, const std::string& context) {
  if (!v.is_boolean()) bad_key(context, "must be true or false");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& context) {
  if (!v.is_string()) bad_key(context, "must be a string");
  return v.get<std::string>();
}

EstimatorSpec parse_estimator(const json& v, const std::string& context) {
  if (!v.is_object()) bad_key(context, "must be an object with a 'tag'");
  reject_unknown_keys(v, context + ".",
                      {"tag", "noise", "rank", "condition_number",
                       "noise_lower_bound", "el_rank", "el_noise",
                       "el_condition", "name"});
  EstimatorSpec spec;
  if (!v.contains("tag")) bad_key(context + ".tag", "is required");
  spec.tag = as_string(v["tag"], context + ".tag");
  if (v.contains("noise")) spec.noise = as_number(v["noise"], context + ".noise");
  if (v.contains("rank")) spec.rank = as_int(v["rank"], context + ".rank");
  if (v.contains("condition_number"))
    spec.condition_number = as_number(v["condition_number"], context + ".condition_number");
  if (v.contains("noise_lower_bound"))
    spec.noise_lower_bound =
        as_number(v["noise_lower_bound"], context + ".noise_lower_bound");
  if (v.contains("el_rank")) spec.el_rank = as_bool(v["el_rank"], context + ".el_rank");
  if (v.contains("el_noise")) spec.el_noise = as_bool(v["el_noise"], context + ".el_noise");
  if (v.contains("el_condition"))
    spec.el_condition = as_bool(v["el_condition"], context + ".el_condition");
  if (v.contains("name")) spec.name = as_string(v["name"], context + ".name");
  return spec;
}

JammerScenario parse_inline_scenario(const json& v) {
  reject_unknown_keys(v, "scenario.",
                      {"dim", "jammers", "noise_power", "label"});
  JammerScenario sc;
  if (!v.contains("dim")) bad_key("scenario.dim", "is required");
  sc.dim = as_int(v["dim"], "scenario.dim");
  if (v.contains("noise_power"))
    sc.noise_power = as_number(v["noise_power"], "scenario.noise_power");
  sc.label = v.contains("label") ? as_string(v["label"], "scenario.label") : "inline";
  if (v.contains("jammers")) {
    if (!v["jammers"].is_array()) bad_key("scenario.jammers", "must be an array");
    int idx = 0;
    for (const json& jv : v["jammers"]) {
      const std::string ctx = "scenario.jammers[" + std::to_string(idx++) + "]";
      if (!jv.is_object()) bad_key(ctx, "must be an object");
      reject_unknown_keys(jv, ctx + ".",
                          {"power_db", "phase_deg", "fractional_bandwidth"});
      Jammer j;
      if (jv.contains("power_db")) j.power_db = as_number(jv["power_db"], ctx + ".power_db");
      if (jv.contains("phase_deg")) j.phase_deg = as_number(jv["phase_deg"], ctx + ".phase_deg");
      if (jv.contains("fractional_bandwidth"))
        j.fractional_bandwidth =
            as_number(jv["fractional_bandwidth"], ctx + ".fractional_bandwidth");
      sc.jammers.push_back(j);
    }
  }
  return sc;
}

}  // namespace

RunConfiguration load_run_configuration(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open configuration file " + path.string());
  json root;
  try {
    root = json::parse(in, nullptr, true, true);  // allow // comments
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!root.is_object()) throw ConfigError("config: top level must be an object");

  reject_unknown_keys(root, "",
                      {"scenario", "scenarios", "estimators", "sample_counts",
                       "trials", "seed", "metrics", "output", "cache_dir",
                       "workers", "lr0_trials", "no_calibrate", "detector",
                       "pfa", "calibration_trials", "snr_grid_db",
                       "include_truth", "training", "calibrate"});

  RunConfiguration cfg;
  if (root.contains("scenario")) {
    const json& v = root["scenario"];
    if (v.is_string()) cfg.scenario_names.push_back(v.get<std::string>());
    else if (v.is_object()) cfg.scenario_inline = parse_inline_scenario(v);
    else bad_key("scenario", "must be a preset name or an inline object");
  }
  if (root.contains("scenarios")) {
    if (!root["scenarios"].is_array()) bad_key("scenarios", "must be an array of names");
    for (const json& v : root["scenarios"])
      cfg.scenario_names.push_back(as_string(v, "scenarios[]"));
  }
  if (root.contains("estimators")) {
    if (!root["estimators"].is_array()) bad_key("estimators", "must be an array");
    int idx = 0;
    for (const json& v : root["estimators"])
      cfg.estimators.push_back(
          parse_estimator(v, "estimators[" + std::to_string(idx++) + "]"));
  }
  if (root.contains("sample_counts")) {
    if (!root["sample_counts"].is_array()) bad_key("sample_counts", "must be an array");
    for (const json& v : root["sample_counts"])
      cfg.sample_counts.push_back(as_int(v, "sample_counts[]"));
  }
  if (root.contains("trials")) cfg.trials = as_int(root["trials"], "trials");
  if (root.contains("seed")) {
    if (!root["seed"].is_number_integer()) bad_key("seed", "must be an integer");
    cfg.seed = root["seed"].get<std::uint64_t>();
  }
  if (root.contains("metrics")) {
    if (!root["metrics"].is_array()) bad_key("metrics", "must be an array");
    for (const json& v : root["metrics"])
      cfg.metrics.push_back(as_string(v, "metrics[]"));
  }
  if (root.contains("output")) cfg.output = as_string(root["output"], "output");
  if (root.contains("cache_dir")) cfg.cache_dir = as_string(root["cache_dir"], "cache_dir");
  if (root.contains("workers")) cfg.workers = as_int(root["workers"], "workers");
  if (root.contains("lr0_trials"))
    cfg.lr0_trials = as_int(root["lr0_trials"], "lr0_trials");
  if (root.contains("no_calibrate"))
    cfg.no_calibrate = as_bool(root["no_calibrate"], "no_calibrate");
  if (root.contains("detector")) cfg.detector = as_string(root["detector"], "detector");
  if (root.contains("pfa")) cfg.pfa = as_number(root["pfa"], "pfa");
  if (root.contains("calibration_trials"))
    cfg.calibration_trials = as_int(root["calibration_trials"], "calibration_trials");
  if (root.contains("snr_grid_db")) {
    if (!root["snr_grid_db"].is_array()) bad_key("snr_grid_db", "must be an array");
    for (const json& v : root["snr_grid_db"])
      cfg.snr_grid_db.push_back(as_number(v, "snr_grid_db[]"));
  }
  if (root.contains("include_truth"))
    cfg.include_truth = as_bool(root["include_truth"], "include_truth");
  if (root.contains("training"))
    cfg.training_path = std::filesystem::path(as_string(root["training"], "training"));
  if (root.contains("calibrate")) {
    if (!root["calibrate"].is_array()) bad_key("calibrate", "must be an array of [N, K]");
    for (const json& v : root["calibrate"]) {
      if (!v.is_array() || v.size() != 2)
        bad_key("calibrate[]", "must be a [dim, samples] pair");
      cfg.calibration_pairs.emplace_back(as_int(v[0], "calibrate[][0]"),
                                         as_int(v[1], "calibrate[][1]"));
    }
  }
  return cfg;
}

ScenarioPreset scenario_from_config(const RunConfiguration& config,
                                    const std::string& name_or_empty) {
  if (!name_or_empty.empty()) return make_scenario(name_or_empty);
  if (config.scenario_inline) {
    const JammerScenario& sc = *config.scenario_inline;
    ScenarioPreset p;
    p.name = sc.label;
    p.truth = jammer_covariance(sc);
    p.noise_power = sc.noise_power;
    p.channels = sc.dim;
    p.pulses = 1;
    p.prf_hz = 1.0;
    p.spacing_over_wavelength = 0.5;
    EigenSystem es = eig_hermitian(p.truth);
    int rank = 0;
    while (rank < es.values.size() && es.values(rank) > 2.0 * sc.noise_power) ++rank;
    p.clutter_rank = std::max(1, rank);
    p.target = steering_vector(0.0, 0.0, p.prf_hz, p.channels, p.pulses,
                               p.spacing_over_wavelength);
    p.angle_cells = 32;
    p.doppler_cells = 32;
    p.angle_min_deg = -90.0;
    p.angle_max_deg = 90.0;
    p.doppler_min_hz = -0.5;
    p.doppler_max_hz = 0.5;
    return p;
  }
  if (config.scenario_names.empty())
    throw ConfigError("config: 'scenario' is required");
  return make_scenario(config.scenario_names.front());
}

void write_results_csv(const std::filesystem::path& path,
                       const std::vector<BenchmarkResult>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "scenario,estimator,K,metric,coord1,coord2,mean,stderr,trials,seed\n";
  char buf[40];
  auto fmt = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const BenchmarkResult& row : rows) {
    out << row.scenario << "," << row.estimator << "," << row.samples << ","
        << row.metric << ",";
    out << (row.grid.size() > 0 ? fmt(row.grid[0]) : "") << ",";
    out << (row.grid.size() > 1 ? fmt(row.grid[1]) : "") << ",";
    out << fmt(row.mean) << "," << fmt(row.standard_error) << "," << row.trials
        << "," << row.seed << "\n";
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace stap
