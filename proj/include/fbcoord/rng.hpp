#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

#include "fbcoord/matrixkit.hpp"

namespace fbc {

/// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based child seed: folds each coordinate into the master seed in order.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> coords) {
  std::uint64_t s = mix64(master);
  for (std::uint64_t c : coords) s = mix64(s ^ mix64(c + 0x632be59bd9b4e019ULL));
  return s;
}

/// mt19937_64 with explicit uniform/normal transforms, so streams are the
/// same on every standard library (std distributions are not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal by Box-Muller; both outputs of a pair are used.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// CN(0, 1): real and imaginary parts each N(0, 1/2).
  cd complex_normal() {
    const double re = normal() * std::numbers::sqrt2 * 0.5;
    const double im = normal() * std::numbers::sqrt2 * 0.5;
    return {re, im};
  }

  CMat complex_normal_matrix(Index rows, Index cols) {
    CMat m(rows, cols);
    // Column-major fill keeps the draw order fixed.
    for (Index c = 0; c < cols; ++c)
      for (Index r = 0; r < rows; ++r) m(r, c) = complex_normal();
    return m;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fbc
