#pragma once

#include <cstdint>
#include <random>

#include "stap/types.hpp"

namespace stap {

// SplitMix64 step; used to derive well-separated engine seeds from
// (master seed, stream indices) so that parallel and serial runs agree.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derived scalar seed for a (master seed, a, b) stream; also usable as the
// master seed of a nested set of streams (e.g. per-trial, then per-column).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a = 0,
                              std::uint64_t b = 0) {
  std::uint64_t s = splitmix64(seed);
  s = splitmix64(s ^ splitmix64(a + 0x51ed270b1b0e24adULL));
  s = splitmix64(s ^ splitmix64(b + 0x2545f4914f6cdd1dULL));
  return s;
}

// Deterministic per-stream engine: the same (seed, a, b) always yields the
// same sequence, independent of which thread runs it.
inline std::mt19937_64 rng_stream(std::uint64_t seed, std::uint64_t a = 0,
                                  std::uint64_t b = 0) {
  return std::mt19937_64(mix_seed(seed, a, b));
}

// Standard circular complex Gaussian: re and im i.i.d. N(0, 1/2), so
// E|z|^2 = 1.
inline Complex complex_gaussian(std::mt19937_64& eng) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  double re = n(eng);
  double im = n(eng);
  return Complex(re, im);
}

// N x K matrix of i.i.d. standard complex Gaussians, filled column-major.
inline CMat complex_gaussian_matrix(int rows, int cols, std::mt19937_64& eng) {
  CMat g(rows, cols);
  for (int k = 0; k < cols; ++k)
    for (int n = 0; n < rows; ++n) g(n, k) = complex_gaussian(eng);
  return g;
}

}  // namespace stap
