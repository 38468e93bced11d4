#include "stap/core.hpp"

#include <cmath>

namespace stap {

bool is_hermitian(const CMat& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

HermitianMatrix hermitize(const CMat& m) { return 0.5 * (m + m.adjoint()); }

HermitianMatrix sample_covariance(const TrainingSet& z) {
  if (z.count < 1 || z.samples.cols() != z.count || z.samples.rows() != z.dim)
    throw std::invalid_argument("sample_covariance: empty or inconsistent training set");
  CMat s = (z.samples * z.samples.adjoint()) / static_cast<double>(z.count);
  return hermitize(s);
}

EigenSystem eig_hermitian(const HermitianMatrix& m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("eig_hermitian: matrix not square");
  if (!is_hermitian(m, 1e-8))
    throw std::invalid_argument("eig_hermitian: matrix not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMat> solver(hermitize(m));
  if (solver.info() != Eigen::Success)
    throw NumericError("eig_hermitian: eigensolver failed");

  const int n = static_cast<int>(m.rows());
  EigenSystem out;
  out.vectors.resize(n, n);
  out.values.resize(n);
  // Eigen returns ascending order; flip to descending.
  for (int i = 0; i < n; ++i) {
    out.values(i) = solver.eigenvalues()(n - 1 - i);
    out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  // Phase convention: first entry with modulus > 1e-12 made real positive.
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      double mag = std::abs(out.vectors(k, i));
      if (mag > 1e-12) {
        out.vectors.col(i) *= std::conj(out.vectors(k, i)) / mag;
        break;
      }
    }
  }
  return out;
}

HermitianMatrix reconstruct(const CMat& v, const RVec& d) {
  if (v.cols() != d.size())
    throw std::invalid_argument("reconstruct: dimension mismatch");
  return hermitize(v * d.asDiagonal() * v.adjoint());
}

double toeplitz_deviation(const CMat& m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("toeplitz_deviation: matrix not square");
  const int n = static_cast<int>(m.rows());
  double worst = 0.0;
  for (int k = 0; k < n; ++k) {
    Complex mean(0.0, 0.0);
    for (int i = 0; i + k < n; ++i) mean += m(i + k, i);
    mean /= static_cast<double>(n - k);
    for (int i = 0; i + k < n; ++i)
      worst = std::max(worst, std::abs(m(i + k, i) - mean));
  }
  return worst;
}

HermitianMatrix toeplitz_average(const HermitianMatrix& m) {
  const int n = static_cast<int>(m.rows());
  CMat out(n, n);
  for (int k = 0; k < n; ++k) {
    Complex mean(0.0, 0.0);
    for (int i = 0; i + k < n; ++i) mean += m(i + k, i);
    mean /= static_cast<double>(n - k);
    if (k == 0) mean = Complex(mean.real(), 0.0);
    for (int i = 0; i + k < n; ++i) {
      out(i + k, i) = mean;
      out(i, i + k) = std::conj(mean);
    }
  }
  return out;
}

SteeringVector steering_vector(double azimuth_rad, double doppler_hz,
                               double prf_hz, int channels, int pulses,
                               double spacing_over_wavelength) {
  if (channels < 1 || pulses < 1)
    throw std::invalid_argument("steering_vector: channels and pulses must be >= 1");
  if (prf_hz <= 0.0) throw std::invalid_argument("steering_vector: prf must be > 0");

  const double two_pi = 2.0 * M_PI;
  const double spatial = two_pi * spacing_over_wavelength * std::sin(azimuth_rad);
  const double temporal = two_pi * doppler_hz / prf_hz;

  SteeringVector s;
  s.channels = channels;
  s.pulses = pulses;
  s.entries.resize(static_cast<Eigen::Index>(channels) * pulses);
  for (int m = 0; m < pulses; ++m)
    for (int n = 0; n < channels; ++n)
      s.entries(static_cast<Eigen::Index>(m) * channels + n) =
          std::polar(1.0, temporal * m + spatial * n);
  return s;
}

}  // namespace stap
