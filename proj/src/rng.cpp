#include "lyasim/rng.hpp"

#include <cmath>
#include <numbers>

#include "lyasim/errors.hpp"

namespace lyasim {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  // SplitMix64 finalizer over base + golden-ratio stride.
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  double u1 = uniform();
  double u2 = uniform();
  // log1p(-u1) is log of a value in (0, 1]; never -inf.
  double r = std::sqrt(-2.0 * std::log1p(-u1));
  double theta = 2.0 * std::numbers::pi * u2;
  spare_normal_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

double Rng::exponential(double rate) {
  if (!(rate > 0.0)) throw DomainError("exponential: rate must be > 0");
  return -std::log1p(-uniform()) / rate;
}

std::int64_t Rng::poisson(double mean) {
  if (!(mean >= 0.0)) throw DomainError("poisson: mean must be >= 0");
  if (mean == 0.0) return 0;

  if (mean < 30.0) {
    // Inversion by sequential search.
    double p = std::exp(-mean);
    double cdf = p;
    double u = uniform();
    std::int64_t n = 0;
    while (u > cdf) {
      ++n;
      p *= mean / static_cast<double>(n);
      cdf += p;
      if (n > 1000) break;  // cdf ~ 1 long before this
    }
    return n;
  }

  if (mean < 1e6) {
    // Atkinson's PA algorithm: logistic envelope, exact rejection.
    const double c = 0.767 - 3.36 / mean;
    const double beta = std::numbers::pi / std::sqrt(3.0 * mean);
    const double alpha = beta * mean;
    const double k = std::log(c) - mean - std::log(beta);
    const double log_mean = std::log(mean);
    for (;;) {
      double u1 = uniform();
      if (u1 <= 0.0 || u1 >= 1.0) continue;
      double x = (alpha - std::log((1.0 - u1) / u1)) / beta;
      double n = std::floor(x + 0.5);
      if (n < 0.0) continue;
      double u2 = uniform();
      if (u2 <= 0.0) continue;
      double y = alpha - beta * x;
      double t = 1.0 + std::exp(y);
      double lhs = y + std::log(u2 / (t * t));
      double rhs = k + n * log_mean - std::lgamma(n + 1.0);
      if (lhs <= rhs) return static_cast<std::int64_t>(n);
    }
  }

  // Relative skewness 1/sqrt(mean) <= 1e-3: normal approximation.
  double n = std::round(mean + std::sqrt(mean) * normal());
  if (n < 0.0) n = 0.0;
  return static_cast<std::int64_t>(n);
}

}  // namespace lyasim
