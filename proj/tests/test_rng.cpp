#include "lyasim/rng.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "lyasim/errors.hpp"

using namespace lyasim;

TEST_CASE("derived seeds differ per index and stay stable") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(123, 45) == derive_seed(123, 45));
}

TEST_CASE("uniform stays in [0,1) and is reproducible") {
  Rng a(9), b(9);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(u == b.uniform());
  }
}

TEST_CASE("normal and exponential moments") {
  Rng rng(314);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sum_sq += z * z;
  }
  CHECK(std::abs(sum / n) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(sum_sq / n - 1.0) < 0.02);

  double esum = 0.0;
  const double rate = 2.5;
  for (int i = 0; i < n; ++i) esum += rng.exponential(rate);
  CHECK(std::abs(esum / n - 1.0 / rate) < 0.01 / rate);
  CHECK_THROWS_AS(rng.exponential(0.0), DomainError);
}

TEST_CASE("poisson sampler matches its first two moments in every regime") {
  // Means chosen to hit the inversion, rejection and normal branches.
  Rng rng(2718);
  for (double mean : {0.5, 3.0, 40.0, 300.0, 20000.0, 2e7}) {
    const int n = 20000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = static_cast<double>(rng.poisson(mean));
      sum += x;
      sum_sq += x * x;
    }
    const double sample_mean = sum / n;
    const double sample_var = sum_sq / n - sample_mean * sample_mean;
    const double mean_tol = 5.0 * std::sqrt(mean / n);
    CHECK(std::abs(sample_mean - mean) <= mean_tol);
    CHECK(std::abs(sample_var - mean) <= 5.0 * mean * std::sqrt(2.0 / n) + mean_tol);
  }
  CHECK(rng.poisson(0.0) == 0);
  CHECK_THROWS_AS(rng.poisson(-1.0), DomainError);
}
