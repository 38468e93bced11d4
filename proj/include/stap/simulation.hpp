#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stap/core.hpp"

namespace stap {

// One interference source in the wideband-jammer disturbance model.
struct Jammer {
  double power_db = 0.0;              // sigma_i^2 in dB
  double phase_deg = 0.0;             // phi_i in degrees
  double fractional_bandwidth = 0.0;  // beta_i in [0, 1)
};

// Ground-truth disturbance scenario: J jammers plus white noise.
struct JammerScenario {
  int dim = 0;  // N
  std::vector<Jammer> jammers;
  double noise_power = 1.0;  // sigma_a^2, linear
  std::string label;
};

// Ground-truth low-rank clutter with a seeded random orthonormal basis;
// gives rank-recovery experiments an exactly known clutter rank.
struct SyntheticClutterScenario {
  int dim = 0;
  int clutter_rank = 0;
  std::vector<double> clutter_eigenvalues;  // length clutter_rank, positive
  double noise_power = 1.0;                 // sigma^2
  std::uint64_t seed = 0;
  std::string label;
};

// R(n,m) = sum_i sigma_i^2 sinc(0.5 beta_i (n-m) phi_i) e^{j(n-m) phi_i}
//        + sigma_a^2 delta(n-m),
// with phi_i in radians, powers converted from dB, and normalized
// sinc(x) = sin(pi x)/(pi x) (sinc(0) = 1). Hermitian Toeplitz by
// construction.
HermitianMatrix jammer_covariance(const JammerScenario& sc);

// sigma^2 I + V_r diag(p) V_r^H with V_r the first r columns of a seeded
// random unitary matrix.
HermitianMatrix synthetic_lowrank_covariance(const SyntheticClutterScenario& sc);

// K zero-mean circular complex Gaussian snapshots with covariance `truth`:
// Z = R^{1/2} G. The square root comes from the eigendecomposition with
// negative round-off eigenvalues floored at zero, so PSD-but-singular truths
// are sampleable. Column k draws from stream (seed, k), making the result
// independent of the worker count.
TrainingSet sample_training(const HermitianMatrix& truth, int count,
                            std::uint64_t seed, int workers = 1);

// Adds alpha*s to floor(fraction*K) columns chosen by a seeded shuffle;
// models target contamination of the training data.
TrainingSet inject_targets(const TrainingSet& z, const SteeringVector& s,
                           double amplitude, double fraction,
                           std::uint64_t seed);

// A named ground-truth setup bundled with everything the benchmark loop
// needs: the truth covariance, the nominal target steering vector, the
// recommended clutter rank, and the angle-Doppler evaluation grid.
struct ScenarioPreset {
  std::string name;
  HermitianMatrix truth;
  SteeringVector target;
  double noise_power = 1.0;
  int clutter_rank = 0;  // recommended rank for rank-constrained estimators
  int channels = 0;
  int pulses = 0;
  double prf_hz = 1.0;
  double spacing_over_wavelength = 0.5;
  // Uniform evaluation grid (inclusive endpoints) for angle-Doppler sweeps.
  int angle_cells = 0;
  int doppler_cells = 0;
  double angle_min_deg = 0.0;
  double angle_max_deg = 0.0;
  double doppler_min_hz = 0.0;
  double doppler_max_hz = 0.0;
};

// Registered preset names, in registration order.
std::vector<std::string> scenario_names();

// Builds a preset by name; throws ConfigError for unknown names.
ScenarioPreset make_scenario(const std::string& name);

}  // namespace stap
