#include "lyasim/retrodict.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <sstream>

#include "lyasim/errors.hpp"
#include "lyasim/rng.hpp"

namespace lyasim::retrodict {

namespace {

void require_p0(double p0) {
  if (!(p0 > 0.0) || !std::isfinite(p0)) {
    throw DomainError("p0 must be positive and finite");
  }
}

bool usable_for_closed_form(const assay::AliquotMeasurement& m, double p0) {
  return std::isfinite(m.ps_estimate) && m.ps_estimate >= 0.0 &&
         m.ps_estimate < p0;
}

}  // namespace

TwoPointEstimate two_point_estimate(const assay::AliquotMeasurement& m1,
                                    const assay::AliquotMeasurement& m2,
                                    double p0) {
  require_p0(p0);
  if (!(m1.gel_time < m2.gel_time)) {
    throw InputError("two-point estimate needs m1.gel_time < m2.gel_time");
  }
  for (const auto* m : {&m1, &m2}) {
    if (!std::isfinite(m->ps_estimate) || m->ps_estimate < 0.0) {
      throw DomainError("complex estimates must be finite and >= 0");
    }
    if (m->ps_estimate >= p0) {
      throw EstimationError("saturated measurement: complex estimate reached p0");
    }
  }
  if (m1.ps_estimate == m2.ps_estimate) {
    throw EstimationError(
        "degenerate rate: the two instants have equal complex estimates");
  }

  // ln((p0 - ps) / p0), evaluated as log1p for small-signal accuracy.
  const double a1 = std::log1p(-m1.ps_estimate / p0);
  const double a2 = std::log1p(-m2.ps_estimate / p0);
  TwoPointEstimate est;
  est.rate = (a1 - a2) / (m2.gel_time - m1.gel_time);
  est.t0 = m1.gel_time + a1 / est.rate;
  return est;
}

// --------------------------------------------------------------------------
// Damped Gauss-Newton over <= 3 parameters.

namespace {

constexpr int kMaxParams = 3;

struct GnProblem {
  int n_params = 0;
  // Fill the residual vector at theta.
  std::function<void(std::span<const double>, std::vector<double>&)> residuals;
  // Fill the n x m Jacobian (row-major) at theta.
  std::function<void(std::span<const double>, std::vector<double>&)> jacobian;
  // Convergence scale per parameter (absolute step / scale < tol converges).
  std::array<double, kMaxParams> scales{1.0, 1.0, 1.0};
};

double sum_squares(const std::vector<double>& r) {
  double s = 0.0;
  for (double v : r) s += v * v;
  return s;
}

std::string format_trace(const std::vector<std::string>& lines) {
  std::ostringstream out;
  for (const auto& line : lines) out << line << '\n';
  return out.str();
}

// Solve the m x m system A x = b in place (partial pivoting). Returns false
// when a pivot collapses, which is how plateau data with a flat Jacobian
// shows up.
bool solve_normal_equations(std::array<std::array<double, kMaxParams>, kMaxParams>& a,
                            std::array<double, kMaxParams>& b, int m,
                            std::array<double, kMaxParams>& x) {
  double max_entry = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) max_entry = std::max(max_entry, std::abs(a[i][j]));
  if (!(max_entry > 0.0) || !std::isfinite(max_entry)) return false;
  const double pivot_tol = 1e-14 * max_entry;

  std::array<int, kMaxParams> perm{0, 1, 2};
  for (int col = 0; col < m; ++col) {
    int best = col;
    for (int row = col + 1; row < m; ++row) {
      if (std::abs(a[perm[row]][col]) > std::abs(a[perm[best]][col])) best = row;
    }
    std::swap(perm[col], perm[best]);
    const double pivot = a[perm[col]][col];
    if (std::abs(pivot) <= pivot_tol) return false;
    for (int row = col + 1; row < m; ++row) {
      const double f = a[perm[row]][col] / pivot;
      for (int j = col; j < m; ++j) a[perm[row]][j] -= f * a[perm[col]][j];
      b[perm[row]] -= f * b[perm[col]];
    }
  }
  for (int col = m - 1; col >= 0; --col) {
    double acc = b[perm[col]];
    for (int j = col + 1; j < m; ++j) acc -= a[perm[col]][j] * x[j];
    x[col] = acc / a[perm[col]][col];
  }
  return true;
}

std::vector<double> gauss_newton(const GnProblem& problem,
                                 std::vector<double> theta,
                                 const FitOptions& options) {
  const int m = problem.n_params;
  std::vector<double> residuals;
  std::vector<double> jac;
  std::vector<double> candidate(theta.size());
  std::vector<std::string> trace;

  problem.residuals(theta, residuals);
  double sse = sum_squares(residuals);
  const auto log_state = [&](int iter, double step_rel) {
    std::ostringstream line;
    line << "iter=" << iter << " sse=" << sse << " step=" << step_rel << " theta=";
    for (int j = 0; j < m; ++j) line << (j ? "," : "") << theta[j];
    trace.push_back(line.str());
  };
  log_state(0, 0.0);

  const std::size_t n = residuals.size();
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    problem.jacobian(theta, jac);

    std::array<std::array<double, kMaxParams>, kMaxParams> jtj{};
    std::array<double, kMaxParams> jtr{};
    for (std::size_t i = 0; i < n; ++i) {
      for (int p = 0; p < m; ++p) {
        const double jip = jac[i * m + p];
        jtr[p] += jip * residuals[i];
        for (int q = p; q < m; ++q) jtj[p][q] += jip * jac[i * m + q];
      }
    }
    for (int p = 0; p < m; ++p)
      for (int q = 0; q < p; ++q) jtj[p][q] = jtj[q][p];

    std::array<double, kMaxParams> step{};
    for (int p = 0; p < m; ++p) jtr[p] = -jtr[p];
    if (!solve_normal_equations(jtj, jtr, m, step)) {
      throw FitError(
          "indeterminate fit: singular normal equations (data may carry no "
          "timing information)",
          format_trace(trace));
    }

    // Backtracking damping: halve the step until the objective stops rising.
    double lambda = 1.0;
    bool accepted = false;
    double new_sse = sse;
    while (lambda >= 0x1.0p-40) {
      for (int p = 0; p < m; ++p) candidate[p] = theta[p] + lambda * step[p];
      problem.residuals(candidate, residuals);
      new_sse = sum_squares(residuals);
      if (new_sse <= sse && std::isfinite(new_sse)) {
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }

    double step_rel = 0.0;
    for (int p = 0; p < m; ++p) {
      const double scale = std::max(std::abs(theta[p]), problem.scales[p]);
      step_rel = std::max(step_rel, std::abs(lambda * step[p]) / scale);
    }

    if (!accepted) {
      // No downhill direction left at the smallest damping: either we are at
      // the optimum already or the landscape is hostile.
      if (step_rel < options.step_tolerance * 1e3) return theta;
      throw FitError("fit did not converge: backtracking stalled",
                     format_trace(trace));
    }

    theta = candidate;
    sse = new_sse;
    log_state(iter, step_rel);
    if (step_rel < options.step_tolerance) return theta;
  }
  throw FitError("fit did not converge within the iteration budget",
                 format_trace(trace));
}

// --------------------------------------------------------------------------
// Model plumbing shared by the two fitters.

struct Point {
  double t = 0.0;
  double ps = 0.0;
  double weight = 1.0;
};

std::vector<Point> prepare_points(
    const std::vector<assay::AliquotMeasurement>& measurements, double p0,
    std::size_t min_points, const FitOptions& options) {
  require_p0(p0);
  if (measurements.size() < min_points) {
    std::ostringstream msg;
    msg << "fit needs at least " << min_points << " measurements, got "
        << measurements.size();
    throw InputError(msg.str());
  }
  std::vector<Point> points;
  points.reserve(measurements.size());
  for (const auto& m : measurements) {
    if (!std::isfinite(m.gel_time) || !std::isfinite(m.ps_estimate)) {
      throw InputError("measurements must have finite gel times and estimates");
    }
    double w = 1.0;
    if (options.weighting == Weighting::poisson) {
      w = 1.0 / std::sqrt(std::max(m.ps_estimate, p0 * 1e-6));
    }
    points.push_back({m.gel_time, m.ps_estimate, w});
  }
  std::sort(points.begin(), points.end(),
            [](const Point& a, const Point& b) { return a.t < b.t; });
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (points[i].t == points[i + 1].t) {
      throw InputError("duplicate gel times in the measurement set");
    }
  }
  return points;
}

// Closed-form initializer: the first and last usable points, then any pair
// that produces a positive rate.
TwoPointEstimate initial_estimate(
    const std::vector<assay::AliquotMeasurement>& measurements, double p0) {
  std::vector<assay::AliquotMeasurement> usable;
  for (const auto& m : measurements) {
    if (usable_for_closed_form(m, p0)) usable.push_back(m);
  }
  std::sort(usable.begin(), usable.end(),
            [](const auto& a, const auto& b) { return a.gel_time < b.gel_time; });
  if (usable.size() >= 2) {
    try {
      auto est = two_point_estimate(usable.front(), usable.back(), p0);
      if (est.rate > 0.0 && std::isfinite(est.rate) && std::isfinite(est.t0)) {
        return est;
      }
    } catch (const EstimationError&) {
    }
    for (std::size_t i = 0; i < usable.size(); ++i) {
      for (std::size_t j = i + 1; j < usable.size(); ++j) {
        try {
          auto est = two_point_estimate(usable[i], usable[j], p0);
          if (est.rate > 0.0 && std::isfinite(est.rate) && std::isfinite(est.t0)) {
            return est;
          }
        } catch (const EstimationError&) {
        }
      }
    }
  }
  throw FitError(
      "cannot initialize fit: no pair of measurements yields a positive rate");
}

double pf_model(double p0, double rate, double t0, double t) {
  const double dt = t - t0;
  return dt <= 0.0 ? 0.0 : p0 * -std::expm1(-rate * dt);
}

double unweighted_residual_norm(const std::vector<Point>& points,
                                const std::function<double(double)>& model,
                                double p0) {
  double sse = 0.0;
  for (const auto& pt : points) {
    const double r = model(pt.t) - pt.ps;
    sse += r * r;
  }
  return std::sqrt(sse) / p0;
}

}  // namespace

RetrodictionResult fit_pseudo_first(
    const std::vector<assay::AliquotMeasurement>& measurements, double p0,
    const FitOptions& options) {
  if (!(options.confidence > 0.0) || !(options.confidence < 1.0)) {
    throw DomainError("confidence must lie in (0, 1)");
  }
  const auto points = prepare_points(measurements, p0, 2, options);
  const auto init = initial_estimate(measurements, p0);

  const double t_span =
      std::max(points.back().t - points.front().t, 1.0 / init.rate);

  // theta = (ln rate, t0); the log keeps the rate positive and makes its
  // convergence test a relative one.
  GnProblem problem;
  problem.n_params = 2;
  problem.scales = {1.0, t_span, 1.0};
  problem.residuals = [&points, p0](std::span<const double> theta,
                                    std::vector<double>& r) {
    const double rate = std::exp(theta[0]);
    r.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      r[i] = points[i].weight * (pf_model(p0, rate, theta[1], points[i].t) -
                                 points[i].ps);
    }
  };
  problem.jacobian = [&points, p0](std::span<const double> theta,
                                   std::vector<double>& jac) {
    const double rate = std::exp(theta[0]);
    const double t0 = theta[1];
    jac.assign(points.size() * 2, 0.0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double dt = points[i].t - t0;
      if (dt <= 0.0) continue;
      const double decay = std::exp(-rate * dt);
      // d model / d ln(rate) and d model / d t0
      jac[i * 2 + 0] = points[i].weight * p0 * rate * dt * decay;
      jac[i * 2 + 1] = points[i].weight * -p0 * rate * decay;
    }
  };

  const auto theta =
      gauss_newton(problem, {std::log(init.rate), init.t0}, options);

  RetrodictionResult result;
  result.model = kinetics::KineticsModel::pseudo_first_order;
  result.p0 = p0;
  result.rate_hat = std::exp(theta[0]);
  result.t0_hat = theta[1];
  result.n_points = static_cast<int>(points.size());
  result.confidence = options.confidence;
  result.residual_norm = unweighted_residual_norm(
      points,
      [&](double t) { return pf_model(p0, *result.rate_hat, result.t0_hat, t); },
      p0);
  return result;
}

RetrodictionResult fit_second_order(
    const std::vector<assay::AliquotMeasurement>& measurements, double p0,
    std::optional<double> s0, const FitOptions& options) {
  if (!(options.confidence > 0.0) || !(options.confidence < 1.0)) {
    throw DomainError("confidence must lie in (0, 1)");
  }
  const bool fit_s0 = !s0.has_value();
  if (!fit_s0 && (!(s0.value() > 0.0) || !std::isfinite(s0.value()))) {
    throw DomainError("known s0 must be positive and finite");
  }
  const auto points = prepare_points(measurements, p0, fit_s0 ? 3 : 2, options);

  // Start from the pseudo-first-order picture: rate = s0 * k.
  const auto pf = fit_pseudo_first(measurements, p0, options);
  double s0_init = s0.value_or(0.0);
  if (fit_s0) {
    double ps_max = 0.0;
    for (const auto& pt : points) ps_max = std::max(ps_max, pt.ps);
    if (!(ps_max > 0.0)) {
      throw FitError("cannot initialize s0: no bound signal in the data");
    }
    s0_init = 2.0 * ps_max;
  }
  const double k_init = *pf.rate_hat / s0_init;
  const double t_span =
      std::max(points.back().t - points.front().t, 1.0 / *pf.rate_hat);

  // theta = (ln k, t0) or (ln k, ln s0, t0).
  const int n_params = fit_s0 ? 3 : 2;
  const int t0_index = n_params - 1;
  const auto eval_model = [&, s0_known = s0.value_or(0.0)](
                              std::span<const double> theta, double t) {
    kinetics::ReactionParams rp;
    rp.p0 = p0;
    rp.k = std::exp(theta[0]);
    rp.s0 = fit_s0 ? std::exp(theta[1]) : s0_known;
    rp.t0 = theta[t0_index];
    return kinetics::ps_second_order_exact(rp, t);
  };

  GnProblem problem;
  problem.n_params = n_params;
  problem.scales = {1.0, fit_s0 ? 1.0 : t_span, t_span};
  problem.residuals = [&](std::span<const double> theta, std::vector<double>& r) {
    r.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      r[i] = points[i].weight * (eval_model(theta, points[i].t) - points[i].ps);
    }
  };
  // Central differences; log parameters make the steps naturally relative.
  problem.jacobian = [&](std::span<const double> theta, std::vector<double>& jac) {
    jac.assign(points.size() * n_params, 0.0);
    std::vector<double> lo(theta.begin(), theta.end());
    std::vector<double> hi(theta.begin(), theta.end());
    for (int p = 0; p < n_params; ++p) {
      const double h =
          p == t0_index ? 1e-6 * std::max(std::abs(theta[p]), t_span) : 1e-6;
      lo[p] = theta[p] - h;
      hi[p] = theta[p] + h;
      for (std::size_t i = 0; i < points.size(); ++i) {
        jac[i * n_params + p] = points[i].weight *
                                (eval_model(hi, points[i].t) -
                                 eval_model(lo, points[i].t)) /
                                (2.0 * h);
      }
      lo[p] = theta[p];
      hi[p] = theta[p];
    }
  };

  std::vector<double> theta0;
  theta0.push_back(std::log(k_init));
  if (fit_s0) theta0.push_back(std::log(s0_init));
  theta0.push_back(pf.t0_hat);

  const auto theta = gauss_newton(problem, theta0, options);

  RetrodictionResult result;
  result.model = kinetics::KineticsModel::second_order_exact;
  result.s0_fitted = fit_s0;
  result.p0 = p0;
  result.k_hat = std::exp(theta[0]);
  result.s0_hat = fit_s0 ? std::exp(theta[1]) : s0.value();
  result.t0_hat = theta[t0_index];
  result.n_points = static_cast<int>(points.size());
  result.confidence = options.confidence;
  result.residual_norm = unweighted_residual_norm(
      points, [&](double t) { return eval_model(theta, t); }, p0);
  return result;
}

double predict_ps(const RetrodictionResult& fit, double gel_time) {
  if (fit.model == kinetics::KineticsModel::pseudo_first_order) {
    return pf_model(fit.p0, fit.rate_hat.value(), fit.t0_hat, gel_time);
  }
  kinetics::ReactionParams rp;
  rp.p0 = fit.p0;
  rp.s0 = fit.s0_hat.value();
  rp.k = fit.k_hat.value();
  rp.t0 = fit.t0_hat;
  return kinetics::ps_second_order_exact(rp, gel_time);
}

namespace {

double empirical_quantile(std::vector<double>& sorted_values, double p) {
  const double h = p * static_cast<double>(sorted_values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted_values.size() - 1);
  const double frac = h - std::floor(h);
  return sorted_values[lo] + frac * (sorted_values[hi] - sorted_values[lo]);
}

ParamInterval interval_from_samples(std::vector<double>& samples,
                                    double confidence) {
  std::sort(samples.begin(), samples.end());
  const double alpha = (1.0 - confidence) / 2.0;
  return {empirical_quantile(samples, alpha),
          empirical_quantile(samples, 1.0 - alpha)};
}

}  // namespace

BootstrapResult bootstrap_ci(
    const std::vector<assay::AliquotMeasurement>& measurements,
    const RetrodictionResult& base_fit, const FitFunction& refit,
    double counts_per_molar, const BootstrapOptions& options) {
  if (options.n_resamples < 100) {
    throw InputError("bootstrap needs at least 100 resamples");
  }
  if (!(options.confidence > 0.0) || !(options.confidence < 1.0)) {
    throw DomainError("confidence must lie in (0, 1)");
  }
  if (!(counts_per_molar > 0.0) || !std::isfinite(counts_per_molar)) {
    throw DomainError("counts_per_molar must be positive and finite");
  }
  if (measurements.empty()) throw InputError("no measurements to resample");

  const double p0 = base_fit.p0;
  std::vector<double> t0_samples;
  std::vector<double> rate_samples;
  std::vector<double> s0_samples;
  t0_samples.reserve(options.n_resamples);
  rate_samples.reserve(options.n_resamples);

  int failed = 0;
  std::vector<assay::AliquotMeasurement> synthetic(measurements.size());
  for (int r = 0; r < options.n_resamples; ++r) {
    Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(r)));
    for (std::size_t i = 0; i < measurements.size(); ++i) {
      const double gel_time = measurements[i].gel_time;
      const double ps = std::clamp(predict_ps(base_fit, gel_time), 0.0, p0);
      assay::AliquotMeasurement& m = synthetic[i];
      m.gel_time = gel_time;
      m.bound_counts = rng.poisson(counts_per_molar * ps);
      m.unbound_counts = rng.poisson(counts_per_molar * (p0 - ps));
      m.p0_assumed = p0;
      const std::int64_t total = m.bound_counts + m.unbound_counts;
      m.ps_estimate =
          total > 0 ? assay::ps_from_counts(m.bound_counts, m.unbound_counts, p0)
                    : 0.0;
    }
    try {
      const RetrodictionResult fit = refit(synthetic);
      t0_samples.push_back(fit.t0_hat);
      rate_samples.push_back(fit.rate_hat ? *fit.rate_hat : fit.k_hat.value());
      if (base_fit.s0_fitted && fit.s0_hat) s0_samples.push_back(*fit.s0_hat);
    } catch (const std::exception&) {
      ++failed;
    }
  }

  if (failed * 5 > options.n_resamples) {
    std::ostringstream msg;
    msg << "uncertainty estimation failed: " << failed << " of "
        << options.n_resamples << " bootstrap refits failed";
    throw EstimationError(msg.str());
  }

  BootstrapResult result;
  result.n_failed = failed;
  result.t0 = interval_from_samples(t0_samples, options.confidence);
  result.rate = interval_from_samples(rate_samples, options.confidence);
  if (base_fit.s0_fitted && !s0_samples.empty()) {
    result.s0 = interval_from_samples(s0_samples, options.confidence);
  }
  return result;
}

}  // namespace lyasim::retrodict
