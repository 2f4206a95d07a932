#pragma once

#include <cstdint>
#include <random>

namespace lyasim {

/// Mix a base seed with a stream index (SplitMix64 finalizer). Independent
/// streams for ensemble members, aliquots and bootstrap resamples are derived
/// as derive_seed(seed, index), so parallel generation stays reproducible.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// Seeded random source with the samplers the simulators need. All variates
/// are generated from explicit formulas on top of mt19937_64, so a given seed
/// yields the same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform double in [0, 1), 53 random bits.
  double uniform();

  /// Standard normal (Box-Muller, second value cached).
  double normal();

  /// Exponential waiting time with the given rate (> 0).
  double exponential(double rate);

  /// Poisson count with the given mean (>= 0). Exact inversion for small
  /// means, Atkinson's PA rejection for moderate ones, and a normal
  /// approximation once the relative skewness is below 1e-3.
  std::int64_t poisson(double mean);

 private:
  std::mt19937_64 gen_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace lyasim
