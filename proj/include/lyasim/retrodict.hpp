#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lyasim/assay.hpp"
#include "lyasim/kinetics.hpp"

namespace lyasim::retrodict {

/// Closed-form estimate from two measurements under the pseudo-first-order
/// model.
struct TwoPointEstimate {
  double rate = 0.0;  // S0 * k, s^-1
  double t0 = 0.0;    // s
};

/// Invert the pseudo-first-order relation from a pair of gel instants:
///   rate = ln[(P0 - ps1) / (P0 - ps2)] / (t2 - t1)
///   t0   = t1 + ln[(P0 - ps1) / P0] / rate
/// Requires t1 < t2 and both estimates in [0, P0); equal estimates carry no
/// rate information (EstimationError), estimates at or above P0 are saturated
/// (EstimationError). Noise-free inputs are recovered exactly up to rounding.
TwoPointEstimate two_point_estimate(const assay::AliquotMeasurement& m1,
                                    const assay::AliquotMeasurement& m2,
                                    double p0);

struct ParamInterval {
  double low = 0.0;
  double high = 0.0;
};

/// Result of an inverse fit. rate_hat is the pseudo-first-order S0*k; the
/// second-order model reports k_hat and s0_hat instead (s0_hat echoes the
/// known value when it was not fitted). residual_norm is the L2 norm of the
/// concentration residuals divided by p0. ci_t0 is present once a bootstrap
/// has been attached.
struct RetrodictionResult {
  kinetics::KineticsModel model = kinetics::KineticsModel::pseudo_first_order;
  bool s0_fitted = false;
  double p0 = 0.0;
  double t0_hat = 0.0;
  std::optional<double> rate_hat;
  std::optional<double> k_hat;
  std::optional<double> s0_hat;
  double residual_norm = 0.0;
  int n_points = 0;
  double confidence = 0.95;
  std::optional<ParamInterval> ci_t0;
};

/// Residual weighting for the least-squares fits. Poisson weighting scales
/// each residual by 1 / sqrt(max(ps_estimate, p0 * 1e-6)).
enum class Weighting { none, poisson };

struct FitOptions {
  double confidence = 0.95;     // recorded with the result
  int max_iterations = 100;
  double step_tolerance = 1e-10;  // relative step size that counts as converged
  Weighting weighting = Weighting::none;
};

/// Least-squares fit of (rate, t0) under the pseudo-first-order model by
/// damped Gauss-Newton, initialized from two_point_estimate on the first and
/// last usable points. Needs >= 2 measurements with distinct gel times.
/// Saturated points (ps >= p0) are kept in the fit but skipped by the
/// closed-form initializer. Throws FitError (with iteration trace) on
/// non-convergence or singular normal equations.
RetrodictionResult fit_pseudo_first(
    const std::vector<assay::AliquotMeasurement>& measurements, double p0,
    const FitOptions& options = {});

/// Same machinery on the exact second-order model. With s0 known the unknowns
/// are (k, t0) and >= 2 points are needed; with s0 unknown they are
/// (k, s0, t0) and >= 3 points are needed. Initialization comes from the
/// pseudo-first-order fit; an unknown s0 starts at twice the largest estimate.
RetrodictionResult fit_second_order(
    const std::vector<assay::AliquotMeasurement>& measurements, double p0,
    std::optional<double> s0, const FitOptions& options = {});

/// Trajectory value the fitted model predicts at a gel instant.
double predict_ps(const RetrodictionResult& fit, double gel_time);

using FitFunction =
    std::function<RetrodictionResult(const std::vector<assay::AliquotMeasurement>&)>;

struct BootstrapOptions {
  int n_resamples = 1000;   // >= 100
  double confidence = 0.95;
  std::uint64_t seed = 0;
};

/// Per-parameter confidence intervals for the base fit. rate covers rate_hat
/// for the pseudo-first-order model and k_hat for the second-order one; s0 is
/// present only when s0 was fitted.
struct BootstrapResult {
  ParamInterval t0;
  ParamInterval rate;
  std::optional<ParamInterval> s0;
  int n_failed = 0;
};

/// Parametric bootstrap around a base fit: regenerate Poisson band counts
/// from the fitted trajectory and the calibration counts_per_molar at each
/// gel instant, refit, and take empirical quantiles at (1 +- confidence) / 2.
/// Resample r uses the derived stream derive_seed(seed, r), so resamples are
/// independent and the whole procedure is deterministic per seed. More than
/// 20% failed refits aborts with EstimationError.
BootstrapResult bootstrap_ci(
    const std::vector<assay::AliquotMeasurement>& measurements,
    const RetrodictionResult& base_fit, const FitFunction& refit,
    double counts_per_molar, const BootstrapOptions& options);

}  // namespace lyasim::retrodict
