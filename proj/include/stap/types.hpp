#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace stap {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

// Covariance carrier. Hermitian symmetry is a maintained convention, not a
// compile-time guarantee; is_hermitian() checks it where a contract requires.
using HermitianMatrix = CMat;

// Default comparison tolerance: |a - b| <= atol + rtol*|b|.
inline constexpr double kAtol = 1e-10;
inline constexpr double kRtol = 1e-8;

inline bool close(double a, double b, double atol = kAtol, double rtol = kRtol) {
  return std::abs(a - b) <= atol + rtol * std::abs(b);
}

// Eigendecomposition of a Hermitian matrix.
//   - values sorted descending,
//   - columns of vectors unitary,
//   - per-column phase fixed so the first entry with modulus > 1e-12 is real
//     and positive (makes repeated decompositions reproducible).
struct EigenSystem {
  CMat vectors;  // N x N, columns are eigenvectors
  RVec values;   // length N, descending
};

// K training snapshots of dimension N, stored column-wise.
struct TrainingSet {
  int dim = 0;    // N
  int count = 0;  // K
  CMat samples;   // N x K
};

// Spatio-temporal steering vector s = s_t (x) s_s for a uniform linear array.
struct SteeringVector {
  int channels = 0;  // J
  int pulses = 0;    // P
  CVec entries;      // length J*P, unit-modulus phasors
};

// Output of any covariance estimator.
struct CovarianceEstimate {
  HermitianMatrix matrix;                       // the estimate
  std::optional<CMat> inverse;                  // explicit inverse when that is
                                                // the estimator's natural output
  std::string tag;                              // "SMI", "FML", "RCML", ...
  std::optional<int> rank_used;                 // clutter rank actually used
  std::optional<double> noise_used;             // noise power actually used
  std::optional<double> condition_number_used;  // K_max actually used
  std::optional<double> shrinkage_used;         // LOOC's selected beta
  int iterations = 0;                           // iterative methods only
  double clip_violation = 0.0;                  // magnitude of any eigenvalue
                                                // clipping applied at assembly
};

// Thrown when a numerical step fails beyond tolerances (singular solve, ...).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown on malformed configuration; messages name the offending key.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a file cannot be read, parsed, or written.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace stap
