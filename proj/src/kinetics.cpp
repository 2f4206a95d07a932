#include "lyasim/kinetics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "lyasim/constants.hpp"
#include "lyasim/errors.hpp"
#include "lyasim/rng.hpp"

namespace lyasim::kinetics {

namespace {

// Relative concentration gap below which the integrated second-order form is
// treated as the equal-concentration branch.
constexpr double kEqualBranchTol = 1e-9;

double require_positive_finite(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    std::ostringstream msg;
    msg << "reaction parameter " << name << " must be positive and finite, got "
        << value;
    throw DomainError(msg.str());
  }
  return value;
}

}  // namespace

void validate(const ReactionParams& params) {
  require_positive_finite(params.p0, "p0");
  require_positive_finite(params.s0, "s0");
  require_positive_finite(params.k, "k");
  if (!std::isfinite(params.t0)) {
    throw DomainError("reaction parameter t0 must be finite");
  }
}

std::string to_tag(KineticsModel model) {
  switch (model) {
    case KineticsModel::pseudo_first_order: return "pseudo_first";
    case KineticsModel::second_order_exact: return "second_exact";
  }
  throw InputError("unrecognized kinetics model value");
}

KineticsModel model_from_tag(const std::string& tag) {
  if (tag == "pseudo_first") return KineticsModel::pseudo_first_order;
  if (tag == "second_exact") return KineticsModel::second_order_exact;
  throw InputError("unknown kinetics model tag '" + tag +
                   "' (expected pseudo_first or second_exact)");
}

double ps_pseudo_first_order(const ReactionParams& params, double t) {
  validate(params);
  if (!std::isfinite(t)) throw DomainError("time t must be finite");
  const double dt = t - params.t0;
  if (dt <= 0.0) return 0.0;
  // P0 (1 - e^{-S0 k dt}); -expm1 keeps precision when the exponent is tiny.
  return params.p0 * -std::expm1(-params.s0 * params.k * dt);
}

double ps_second_order_exact(const ReactionParams& params, double t) {
  validate(params);
  if (!std::isfinite(t)) throw DomainError("time t must be finite");
  const double dt = t - params.t0;
  if (dt <= 0.0) return 0.0;

  const double p0 = params.p0;
  const double s0 = params.s0;
  const double diff = p0 - s0;

  if (std::abs(diff) <= kEqualBranchTol * std::max(p0, s0)) {
    // Equal-concentration branch: PS = P0^2 k dt / (1 + P0 k dt).
    const double q = p0 * params.k * dt;
    return p0 * q / (1.0 + q);
  }

  const double x = diff * params.k * dt;
  if (x >= 0.0) {
    // p0 > s0: divide through by E so nothing overflows as x grows.
    //   PS = P0 S0 (1 - e^{-x}) / (P0 - S0 e^{-x})
    const double em = -std::expm1(-x);
    return p0 * s0 * em / (p0 - s0 * std::exp(-x));
  }
  // p0 < s0: P0 E - S0 = P0 expm1(x) + (P0 - S0), exact in the small-x limit.
  const double em = std::expm1(x);
  return p0 * s0 * em / (p0 * em + diff);
}

double elapsed_kt_from_ps(const ReactionParams& params, double ps) {
  validate(params);
  const double p0 = params.p0;
  const double s0 = params.s0;
  if (!(ps >= 0.0) || ps >= std::min(p0, s0)) {
    throw DomainError("ps must lie in [0, min(p0, s0)) to invert the rate relation");
  }
  const double diff = p0 - s0;
  if (std::abs(diff) <= kEqualBranchTol * std::max(p0, s0)) {
    // Inverse of the equal-concentration branch.
    return ps / (p0 * (p0 - ps));
  }
  // (P0 - S0)^-1 ln[ S0 (P0 - ps) / (P0 (S0 - ps)) ]
  return std::log((s0 * (p0 - ps)) / (p0 * (s0 - ps))) / diff;
}

double half_life_pseudo_first(double s0, double k) {
  require_positive_finite(s0, "s0");
  require_positive_finite(k, "k");
  return std::numbers::ln2 / (s0 * k);
}

namespace {

// d[PS]/dt = k (P0 - PS)(S0 - PS)
double rate_rhs(const ReactionParams& p, double ps) {
  return p.k * (p.p0 - ps) * (p.s0 - ps);
}

double rk4_step(const ReactionParams& p, double ps, double h) {
  const double k1 = rate_rhs(p, ps);
  const double k2 = rate_rhs(p, ps + 0.5 * h * k1);
  const double k3 = rate_rhs(p, ps + 0.5 * h * k2);
  const double k4 = rate_rhs(p, ps + h * k3);
  return ps + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Advance from t_a to t_b with step halving: each candidate step is taken
// once whole and twice halved; the step is accepted when the difference is
// within the local tolerance, and the Richardson-extrapolated value is kept.
double integrate_interval(const ReactionParams& p, double ps, double t_a,
                          double t_b, double rel_tol) {
  const double span = t_b - t_a;
  double t = t_a;
  double h = span;
  const double h_min = span * 1e-14;
  while (t < t_b) {
    h = std::min(h, t_b - t);
    const double full = rk4_step(p, ps, h);
    const double mid = rk4_step(p, ps, 0.5 * h);
    const double halved = rk4_step(p, mid, 0.5 * h);
    const double err = std::abs(halved - full);
    const double scale =
        std::max(std::abs(halved), std::numeric_limits<double>::min());
    if (err <= 0.25 * rel_tol * scale || h <= h_min) {
      ps = halved + (halved - full) / 15.0;
      t += h;
      if (err < 0.01 * rel_tol * scale) h *= 2.0;
    } else {
      h *= 0.5;
    }
  }
  return ps;
}

}  // namespace

std::vector<KineticsSample> integrate_ode(const ReactionParams& params,
                                          std::span<const double> t_grid,
                                          double rel_tol) {
  validate(params);
  if (!(rel_tol > 0.0) || rel_tol > 1e-2) {
    throw DomainError("rel_tol must lie in (0, 1e-2]");
  }
  for (std::size_t i = 0; i + 1 < t_grid.size(); ++i) {
    if (!(t_grid[i] < t_grid[i + 1])) {
      throw InputError("time grid must be strictly increasing");
    }
  }

  std::vector<KineticsSample> out;
  out.reserve(t_grid.size());
  double ps = 0.0;
  double t_prev = params.t0;
  for (double t : t_grid) {
    if (!std::isfinite(t)) throw InputError("time grid entries must be finite");
    if (t <= params.t0) {
      out.push_back({t, 0.0});
      continue;
    }
    ps = integrate_interval(params, ps, t_prev, t, rel_tol);
    t_prev = t;
    out.push_back({t, ps});
  }
  return out;
}

StochasticTrajectory gillespie_simulate(const ReactionParams& params,
                                        double volume, double t_end,
                                        std::uint64_t seed) {
  validate(params);
  if (!(volume > 0.0) || !std::isfinite(volume)) {
    throw DomainError("volume must be positive and finite");
  }

  const double n_enzyme_real = params.p0 * volume * avogadro;
  const double n_sites_real = params.s0 * volume * avogadro;
  auto rounded_count = [](double value, const char* name) {
    const double r = std::round(value);
    if (r < 1.0) {
      std::ostringstream msg;
      msg << "initial " << name << " count rounds to " << r
          << " molecules; increase the concentration or the volume";
      throw InputError(msg.str());
    }
    if (r > 1e7) {
      std::ostringstream msg;
      msg << "initial " << name << " count " << r
          << " is too large for an event-resolved simulation";
      throw InputError(msg.str());
    }
    return static_cast<std::int64_t>(r);
  };

  StochasticTrajectory traj;
  traj.volume = volume;
  traj.seed = seed;
  traj.n_enzyme = rounded_count(n_enzyme_real, "enzyme");
  traj.n_sites = rounded_count(n_sites_real, "binding-site");

  if (t_end <= params.t0) return traj;

  // Stochastic rate per reactant pair.
  const double c = params.k / (avogadro * volume);
  Rng rng(seed);
  double t = params.t0;
  std::int64_t n_p = traj.n_enzyme;
  std::int64_t n_s = traj.n_sites;
  std::int64_t bound = 0;
  const std::int64_t max_bound = std::min(n_p, n_s);
  traj.events.reserve(static_cast<std::size_t>(max_bound));
  while (bound < max_bound) {
    const double propensity =
        c * static_cast<double>(n_p) * static_cast<double>(n_s);
    t += rng.exponential(propensity);
    if (t > t_end) break;
    --n_p;
    --n_s;
    ++bound;
    traj.events.push_back({t, bound});
  }
  return traj;
}

}  // namespace lyasim::kinetics
