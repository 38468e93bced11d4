#pragma once

#include "stap/types.hpp"

namespace stap {

// True when max_ij |m(i,j) - conj(m(j,i))| <= tol.
bool is_hermitian(const CMat& m, double tol = 1e-12);

// Averages m with its conjugate transpose to remove round-off skew.
HermitianMatrix hermitize(const CMat& m);

// S = (1/K) Z Z^H. Hermitian PSD, rank <= min(N, K).
HermitianMatrix sample_covariance(const TrainingSet& z);

// Eigendecomposition with descending values and the fixed phase convention
// described on EigenSystem. Throws std::invalid_argument if the input departs
// from Hermitian symmetry by more than 1e-8.
EigenSystem eig_hermitian(const HermitianMatrix& m);

// V diag(d) V^H, Hermitian-symmetrized.
HermitianMatrix reconstruct(const CMat& v, const RVec& d);

// Max over sub-diagonal offsets 0..N-1 of the largest |entry - diagonal mean|
// along that diagonal. Zero exactly when every such diagonal is constant,
// i.e. the matrix is Toeplitz (for Hermitian inputs the conjugate upper
// diagonals follow automatically).
double toeplitz_deviation(const CMat& m);

// Nearest Toeplitz matrix in the per-diagonal-mean sense: every sub-diagonal
// is replaced by its mean and the upper triangle by the conjugate means.
HermitianMatrix toeplitz_average(const HermitianMatrix& m);

// Spatio-temporal steering vector for a J-channel, P-pulse uniform linear
// array: s = s_t (x) s_s with
//   s_s[n] = exp(j 2 pi (d/lambda) sin(azimuth) n),   n = 0..J-1
//   s_t[m] = exp(j 2 pi (doppler/prf) m),             m = 0..P-1
SteeringVector steering_vector(double azimuth_rad, double doppler_hz,
                               double prf_hz, int channels, int pulses,
                               double spacing_over_wavelength);

}  // namespace stap
