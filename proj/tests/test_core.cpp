// Core linear-algebra layer: sample covariance, Hermitian eigendecomposition,
// Toeplitz deviation, and steering vectors. Derived expectations are checked
// against the brute-force oracles defined at the top of this file; trivial
// expectations are asserted directly.
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "stap/core.hpp"
#include "stap/types.hpp"

using namespace stap;

namespace {

// ---------------------------------------------------------------------------
// Independent oracles (scalar loops, no Eigen products).
// ---------------------------------------------------------------------------

// Sample covariance as an explicit sum of outer products: (1/K) sum_k z_k z_k^H.
CMat oracle_sample_covariance(const CMat& z) {
  const int n = static_cast<int>(z.rows());
  const int k = static_cast<int>(z.cols());
  CMat s = CMat::Zero(n, n);
  for (int col = 0; col < k; ++col)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s(i, j) += z(i, col) * std::conj(z(j, col));
  return s / static_cast<double>(k);
}

// Toeplitz deviation by direct per-diagonal scan of the lower triangle.
double oracle_toeplitz_deviation(const CMat& m) {
  const int n = static_cast<int>(m.rows());
  double worst = 0.0;
  for (int off = 0; off < n; ++off) {
    Complex mean(0.0, 0.0);
    int count = 0;
    for (int i = off; i < n; ++i) {
      mean += m(i, i - off);
      ++count;
    }
    mean /= static_cast<double>(count);
    for (int i = off; i < n; ++i)
      worst = std::max(worst, std::abs(m(i, i - off) - mean));
  }
  return worst;
}

// Space-time steering entry by the scalar phasor formula: the temporal phasor
// z_t = exp(j 2 pi f_t / f_R) advances per pulse, the spatial phasor
// z_s = exp(j 2 pi (d / lambda) sin azimuth) per channel, spatial index fastest.
Complex oracle_steering_entry(double azimuth, double doppler, double prf,
                              double spacing, int pulse, int channel) {
  const Complex j(0.0, 1.0);
  Complex zt = std::exp(j * (2.0 * M_PI * doppler / prf));
  Complex zs = std::exp(j * (2.0 * M_PI * spacing * std::sin(azimuth)));
  Complex value(1.0, 0.0);
  for (int p = 0; p < pulse; ++p) value *= zt;
  for (int c = 0; c < channel; ++c) value *= zs;
  return value;
}

// ---------------------------------------------------------------------------
// Random input helpers (test drivers, not oracles).
// ---------------------------------------------------------------------------

CMat random_complex(int rows, int cols, unsigned long seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  CMat m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = Complex(gauss(eng), gauss(eng));
  return m;
}

HermitianMatrix random_hermitian(int n, unsigned long seed) {
  CMat a = random_complex(n, n, seed);
  return hermitize(a);
}

HermitianMatrix toeplitz_from_lags(const CVec& lags) {
  const int n = static_cast<int>(lags.size());
  CMat t(n, n);
  for (int i = 0; i < n; ++i) {
    t(i, i) = Complex(lags(0).real(), 0.0);
    for (int k = 1; i + k < n; ++k) {
      t(i + k, i) = lags(k);
      t(i, i + k) = std::conj(lags(k));
    }
  }
  return t;
}

}  // namespace

TEST_CASE("sample_covariance: rank-one column") {
  TrainingSet z;
  z.dim = 2;
  z.count = 1;
  z.samples.resize(2, 1);
  z.samples << Complex(1, 0), Complex(0, 0);
  HermitianMatrix s = sample_covariance(z);
  CHECK(std::abs(s(0, 0) - Complex(1, 0)) < 1e-15);
  CHECK(std::abs(s(0, 1)) < 1e-15);
  CHECK(std::abs(s(1, 0)) < 1e-15);
  CHECK(std::abs(s(1, 1)) < 1e-15);
}

TEST_CASE("sample_covariance: scaled identity training set") {
  const int n = 5;
  TrainingSet z;
  z.dim = n;
  z.count = n;
  z.samples = std::sqrt(static_cast<double>(n)) * CMat::Identity(n, n);
  HermitianMatrix s = sample_covariance(z);
  CHECK((s - CMat::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("sample_covariance: matches brute-force summation oracle") {
  TrainingSet z;
  z.dim = 4;
  z.count = 8;
  z.samples = random_complex(4, 8, 11);
  HermitianMatrix s = sample_covariance(z);
  CMat expect = oracle_sample_covariance(z.samples);
  CHECK((s - expect).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(is_hermitian(s, 1e-12));
}

TEST_CASE("sample_covariance: output is positive semi-definite") {
  for (unsigned long seed : {1ul, 2ul, 3ul}) {
    TrainingSet z;
    z.dim = 6;
    z.count = 3;  // rank deficient on purpose
    z.samples = random_complex(6, 3, seed);
    EigenSystem es = eig_hermitian(sample_covariance(z));
    CHECK(es.values(5) >= -1e-10 * es.values(0));
  }
}

TEST_CASE("sample_covariance: rejects empty training set") {
  TrainingSet z;
  z.dim = 3;
  z.count = 0;
  z.samples.resize(3, 0);
  CHECK_THROWS_AS(sample_covariance(z), std::invalid_argument);
}

TEST_CASE("eig_hermitian: diagonal matrix sorts descending") {
  CMat m = CMat::Zero(3, 3);
  m(0, 0) = 1.0;
  m(1, 1) = 3.0;
  m(2, 2) = 2.0;
  EigenSystem es = eig_hermitian(m);
  CHECK(es.values(0) == doctest::Approx(3.0));
  CHECK(es.values(1) == doctest::Approx(2.0));
  CHECK(es.values(2) == doctest::Approx(1.0));
  // Eigenvectors of a diagonal matrix with distinct entries are coordinate
  // vectors up to phase; the phase convention makes them exactly so.
  CMat expect(3, 3);
  expect.setZero();
  expect(1, 0) = 1.0;
  expect(2, 1) = 1.0;
  expect(0, 2) = 1.0;
  CHECK((es.vectors - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("eig_hermitian: scaled identity") {
  const double noise = 2.5;
  CMat m = noise * CMat::Identity(4, 4);
  EigenSystem es = eig_hermitian(m);
  for (int i = 0; i < 4; ++i) CHECK(es.values(i) == doctest::Approx(noise));
  CHECK((reconstruct(es.vectors, es.values) - m).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("eig_hermitian: reconstruction, orthonormality, phase convention") {
  for (int n : {2, 6, 16, 64}) {
    HermitianMatrix m = random_hermitian(n, 100 + static_cast<unsigned long>(n));
    EigenSystem es = eig_hermitian(m);

    double scale = m.norm();
    CHECK((reconstruct(es.vectors, es.values) - m).norm() < 1e-9 * scale);
    CHECK((es.vectors.adjoint() * es.vectors - CMat::Identity(n, n))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
    for (int i = 0; i + 1 < n; ++i) CHECK(es.values(i) >= es.values(i + 1));
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) {
        if (std::abs(es.vectors(k, i)) > 1e-12) {
          CHECK(es.vectors(k, i).real() > 0.0);
          CHECK(std::abs(es.vectors(k, i).imag()) < 1e-12);
          break;
        }
      }
    }
  }
}

TEST_CASE("eig_hermitian: rejects non-Hermitian input") {
  CMat m(2, 2);
  m << Complex(1, 0), Complex(2, 1), Complex(0, 0), Complex(1, 0);
  CHECK_THROWS_AS(eig_hermitian(m), std::invalid_argument);
}

TEST_CASE("eig_hermitian: determinism across repeated calls") {
  HermitianMatrix m = random_hermitian(8, 77);
  EigenSystem a = eig_hermitian(m);
  EigenSystem b = eig_hermitian(m);
  CHECK((a.vectors - b.vectors).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("reconstruct: rejects dimension mismatch") {
  CMat v = CMat::Identity(3, 3);
  RVec d(2);
  d << 1.0, 2.0;
  CHECK_THROWS_AS(reconstruct(v, d), std::invalid_argument);
}

TEST_CASE("toeplitz_deviation: exact Toeplitz and 1x1 give zero") {
  CMat one(1, 1);
  one(0, 0) = Complex(4.2, 0.0);
  CHECK(toeplitz_deviation(one) == 0.0);

  CVec lags(4);
  lags << Complex(3, 0), Complex(1, 0.5), Complex(-0.2, 0.1), Complex(0, -1);
  CHECK(toeplitz_deviation(toeplitz_from_lags(lags)) == 0.0);
}

TEST_CASE("toeplitz_deviation: unequal diagonal") {
  CMat m(2, 2);
  m << Complex(1, 0), Complex(0, 0), Complex(0, 0), Complex(2, 0);
  CHECK(toeplitz_deviation(m) == doctest::Approx(0.5));
}

TEST_CASE("toeplitz_deviation: matches per-diagonal scan oracle") {
  for (unsigned long seed : {5ul, 6ul}) {
    HermitianMatrix m = random_hermitian(7, seed);
    CHECK(toeplitz_deviation(m) ==
          doctest::Approx(oracle_toeplitz_deviation(m)).epsilon(1e-12));

    // Adding an exact Toeplitz matrix changes the deviation in a way the scan
    // oracle tracks exactly.
    CVec lags(7);
    for (int i = 0; i < 7; ++i)
      lags(i) = Complex(std::cos(1.7 * i), i == 0 ? 0.0 : std::sin(0.9 * i));
    CMat shifted = m + toeplitz_from_lags(lags);
    CHECK(toeplitz_deviation(shifted) ==
          doctest::Approx(oracle_toeplitz_deviation(shifted)).epsilon(1e-12));
  }
}

TEST_CASE("steering_vector: boresight zero-Doppler is all ones") {
  SteeringVector s = steering_vector(0.0, 0.0, 1000.0, 3, 4, 0.5);
  REQUIRE(s.entries.size() == 12);
  for (int i = 0; i < 12; ++i)
    CHECK(std::abs(s.entries(i) - Complex(1, 0)) < 1e-15);
}

TEST_CASE("steering_vector: half-PRF Doppler alternates sign") {
  SteeringVector s = steering_vector(0.0, 500.0, 1000.0, 1, 2, 0.5);
  REQUIRE(s.entries.size() == 2);
  CHECK(std::abs(s.entries(0) - Complex(1, 0)) < 1e-12);
  CHECK(std::abs(s.entries(1) - Complex(-1, 0)) < 1e-12);
}

TEST_CASE("steering_vector: generic angles match scalar-loop oracle") {
  const double az = 0.61, fd = 137.0, prf = 1200.0, spacing = 0.5;
  SteeringVector s = steering_vector(az, fd, prf, 2, 2, spacing);
  REQUIRE(s.entries.size() == 4);
  for (int p = 0; p < 2; ++p)
    for (int c = 0; c < 2; ++c) {
      Complex expect = oracle_steering_entry(az, fd, prf, spacing, p, c);
      CHECK(std::abs(s.entries(p * 2 + c) - expect) < 1e-12);
    }
}

TEST_CASE("steering_vector: entries have unit modulus") {
  SteeringVector s = steering_vector(-0.8, 321.7, 997.0, 4, 5, 0.47);
  for (Eigen::Index i = 0; i < s.entries.size(); ++i)
    CHECK(std::abs(std::abs(s.entries(i)) - 1.0) < 1e-14);
  CHECK(s.channels == 4);
  CHECK(s.pulses == 5);
}
