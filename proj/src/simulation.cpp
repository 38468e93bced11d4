#include "stap/simulation.hpp"

#include <cmath>
#include <numeric>

#include "stap/parallel.hpp"
#include "stap/rng.hpp"

namespace stap {

namespace {

// Normalized sinc: sin(pi x)/(pi x). This is the convention under which the
// wideband presets have exactly the advertised clutter rank (e.g. the
// three-jammer N=20 preset has seven eigenvalues above the noise floor).
double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(M_PI * x) / (M_PI * x); }

constexpr double kDegToRad = M_PI / 180.0;

void validate(const JammerScenario& sc) {
  if (sc.dim < 1) throw std::invalid_argument("jammer scenario: dim must be >= 1");
  if (!(sc.noise_power >= 0.0) || !std::isfinite(sc.noise_power))
    throw std::invalid_argument("jammer scenario: noise_power must be finite and >= 0");
  for (const Jammer& j : sc.jammers) {
    if (!std::isfinite(j.power_db) || !std::isfinite(j.phase_deg))
      throw std::invalid_argument("jammer scenario: non-finite jammer parameter");
    if (!(j.fractional_bandwidth >= 0.0) || j.fractional_bandwidth >= 1.0)
      throw std::invalid_argument("jammer scenario: fractional bandwidth not in [0, 1)");
  }
}

void validate(const SyntheticClutterScenario& sc) {
  if (sc.dim < 1)
    throw std::invalid_argument("clutter scenario: dim must be >= 1");
  if (sc.clutter_rank < 0 || sc.clutter_rank > sc.dim)
    throw std::invalid_argument("clutter scenario: rank must be in [0, N]");
  if (static_cast<int>(sc.clutter_eigenvalues.size()) != sc.clutter_rank)
    throw std::invalid_argument("clutter scenario: need one eigenvalue per rank");
  for (double p : sc.clutter_eigenvalues)
    if (!(p > 0.0) || !std::isfinite(p))
      throw std::invalid_argument("clutter scenario: eigenvalues must be positive");
  if (!(sc.noise_power >= 0.0) || !std::isfinite(sc.noise_power))
    throw std::invalid_argument("clutter scenario: noise_power must be finite and >= 0");
}

}  // namespace

HermitianMatrix jammer_covariance(const JammerScenario& sc) {
  validate(sc);
  const int n = sc.dim;

  // The model depends only on the lag n-m, so compute one value per lag and
  // fill the matrix Toeplitz-exactly.
  CVec lag_value = CVec::Zero(n);
  for (const Jammer& j : sc.jammers) {
    const double power = std::pow(10.0, j.power_db / 10.0);
    const double phase = j.phase_deg * kDegToRad;
    for (int k = 0; k < n; ++k) {
      const double envelope = sinc(0.5 * j.fractional_bandwidth * k * phase);
      lag_value(k) += power * envelope * std::polar(1.0, k * phase);
    }
  }
  lag_value(0) += sc.noise_power;

  HermitianMatrix r(n, n);
  for (int row = 0; row < n; ++row) {
    for (int col = 0; col <= row; ++col) {
      r(row, col) = lag_value(row - col);
      r(col, row) = std::conj(lag_value(row - col));
    }
  }
  return r;
}

HermitianMatrix synthetic_lowrank_covariance(const SyntheticClutterScenario& sc) {
  validate(sc);
  const int n = sc.dim;
  const int r = sc.clutter_rank;

  HermitianMatrix out =
      sc.noise_power * HermitianMatrix::Identity(n, n);
  if (r == 0) return out;

  std::mt19937_64 eng = rng_stream(sc.seed);
  CMat g = complex_gaussian_matrix(n, r, eng);
  Eigen::HouseholderQR<CMat> qr(g);
  CMat basis = qr.householderQ() * CMat::Identity(n, r);

  RVec p(r);
  for (int i = 0; i < r; ++i) p(i) = sc.clutter_eigenvalues[i];
  out += basis * p.asDiagonal() * basis.adjoint();
  return hermitize(out);
}

TrainingSet sample_training(const HermitianMatrix& truth, int count,
                            std::uint64_t seed, int workers) {
  if (count < 1) throw std::invalid_argument("sample_training: count must be >= 1");
  EigenSystem es = eig_hermitian(truth);
  RVec root = es.values.cwiseMax(0.0).cwiseSqrt();
  CMat w = es.vectors * root.asDiagonal() * es.vectors.adjoint();

  const int n = static_cast<int>(truth.rows());
  CMat g(n, count);
  parallel_for(static_cast<std::size_t>(count), workers, [&](std::size_t k) {
    std::mt19937_64 eng = rng_stream(seed, k);
    for (int row = 0; row < n; ++row) g(row, k) = complex_gaussian(eng);
  });

  TrainingSet z;
  z.dim = n;
  z.count = count;
  z.samples = w * g;
  return z;
}

TrainingSet inject_targets(const TrainingSet& z, const SteeringVector& s,
                           double amplitude, double fraction,
                           std::uint64_t seed) {
  if (fraction < 0.0 || fraction > 1.0)
    throw std::invalid_argument("inject_targets: fraction must be in [0, 1]");
  if (static_cast<int>(s.entries.size()) != z.dim)
    throw std::invalid_argument("inject_targets: steering dimension mismatch");

  TrainingSet out = z;
  const int corrupt = static_cast<int>(std::floor(fraction * z.count));
  if (corrupt == 0) return out;

  std::vector<int> order(z.count);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 eng = rng_stream(seed);
  for (int i = z.count - 1; i > 0; --i) {
    std::uniform_int_distribution<int> pick(0, i);
    std::swap(order[i], order[pick(eng)]);
  }
  for (int i = 0; i < corrupt; ++i)
    out.samples.col(order[i]) += amplitude * s.entries;
  return out;
}

namespace {

// Recommended clutter rank for a jammer preset: the number of truth
// eigenvalues at least 3 dB above the noise floor.
int strong_eigenvalue_count(const HermitianMatrix& truth, double noise) {
  EigenSystem es = eig_hermitian(truth);
  int count = 0;
  while (count < es.values.size() && es.values(count) > 2.0 * noise) ++count;
  return count;
}

ScenarioPreset jammer_preset(const std::string& name, int dim,
                             std::vector<Jammer> jammers,
                             int recommended_rank = 0) {
  JammerScenario sc;
  sc.dim = dim;
  sc.jammers = std::move(jammers);
  sc.noise_power = 1.0;
  sc.label = name;

  ScenarioPreset p;
  p.name = name;
  p.truth = jammer_covariance(sc);
  p.noise_power = sc.noise_power;
  p.channels = dim;  // spatial-only array: one pulse
  p.pulses = 1;
  p.prf_hz = 1.0;
  p.spacing_over_wavelength = 0.5;
  p.clutter_rank = recommended_rank > 0
                       ? recommended_rank
                       : strong_eigenvalue_count(p.truth, sc.noise_power);
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

ScenarioPreset kassper_preset() {
  SyntheticClutterScenario sc;
  sc.dim = 352;  // 11 channels x 32 pulses
  sc.clutter_rank = 42;
  sc.noise_power = 1.0;
  sc.seed = 0x5eed;
  sc.label = "kassper";
  // Clutter spectrum sweeping from 40 dB down to 10 dB above the noise.
  for (int i = 0; i < sc.clutter_rank; ++i) {
    const double db = 40.0 - 30.0 * i / (sc.clutter_rank - 1);
    sc.clutter_eigenvalues.push_back(std::pow(10.0, db / 10.0));
  }

  ScenarioPreset p;
  p.name = sc.label;
  p.truth = synthetic_lowrank_covariance(sc);
  p.noise_power = sc.noise_power;
  p.clutter_rank = sc.clutter_rank;
  p.channels = 11;
  p.pulses = 32;
  p.prf_hz = 1984.0;
  p.spacing_over_wavelength = 0.5;
  p.angle_cells = 91;
  p.doppler_cells = 128;
  p.angle_min_deg = 87.0;
  p.angle_max_deg = 267.0;
  p.doppler_min_hz = -992.0;
  p.doppler_max_hz = 992.0;
  p.target = steering_vector(177.0 * kDegToRad, 0.0, p.prf_hz, p.channels,
                             p.pulses, p.spacing_over_wavelength);
  return p;
}

}  // namespace

std::vector<std::string> scenario_names() {
  return {"fig-sinr-model", "cn-a", "cn-b", "cn-c", "cn-d", "cn-e", "kassper"};
}

ScenarioPreset make_scenario(const std::string& name) {
  if (name == "fig-sinr-model")
    return jammer_preset(name, 20,
                         {{10.0, 20.0, 0.2}, {20.0, 40.0, 0.0}, {30.0, 60.0, 0.3}},
                         7);
  if (name == "cn-a") return jammer_preset(name, 20, {{30.0, 20.0, 0.0}});
  if (name == "cn-b") return jammer_preset(name, 20, {{30.0, 20.0, 0.3}});
  if (name == "cn-c")
    return jammer_preset(name, 20,
                         {{30.0, 20.0, 0.0}, {30.0, 40.0, 0.0}, {30.0, 60.0, 0.0}});
  if (name == "cn-d")
    return jammer_preset(name, 20,
                         {{30.0, 20.0, 0.3}, {30.0, 40.0, 0.3}, {30.0, 60.0, 0.3}});
  if (name == "cn-e")
    return jammer_preset(name, 20,
                         {{10.0, 20.0, 0.2}, {20.0, 40.0, 0.0}, {30.0, 60.0, 0.3}});
  if (name == "kassper") return kassper_preset();
  throw ConfigError("scenario: unknown preset name '" + name + "'");
}

}  // namespace stap
