#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>

namespace lcmix {

/// splitmix64 scrambler; used to derive independent stream seeds so that
/// multi-start chains and simulator draws are reproducible regardless of
/// scheduling.
constexpr std::uint64_t split_mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seeded generator with hand-rolled distributions. std distributions are
/// implementation-defined; these are pinned so identical seeds give identical
/// draws everywhere.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(split_mix64(seed)) {}
  Rng(std::uint64_t seed, std::uint64_t stream)
      : engine_(split_mix64(split_mix64(seed) ^ split_mix64(stream + 1))) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (one variate per call).
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// Exponential(1).
  double exponential() { return -std::log(1.0 - uniform()); }

  int bernoulli(double p) { return uniform() < p ? 1 : 0; }

  /// Inverse-CDF draw from a probability vector (assumed to sum to ~1;
  /// any residual mass falls on the last category).
  int categorical(std::span<const double> probs) {
    const double u = uniform();
    double cum = 0.0;
    for (std::size_t k = 0; k + 1 < probs.size(); ++k) {
      cum += probs[k];
      if (u < cum) return static_cast<int>(k);
    }
    return static_cast<int>(probs.size()) - 1;
  }

private:
  std::mt19937_64 engine_;
};

}  // namespace lcmix
