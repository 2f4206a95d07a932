#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lyasim::kinetics {

/// Parameters of the bimolecular binding reaction P + S -> PS with rate law
/// d[PS]/dt = k (P0 - [PS]) (S0 - [PS]) and onset instant t0. Concentrations
/// are molar, times are seconds, k is M^-1 s^-1 throughout; no unit
/// conversions happen inside the core.
struct ReactionParams {
  double p0 = 0.0;  // initial free enzyme concentration, M
  double s0 = 0.0;  // initial binding-site concentration, M
  double k = 0.0;   // second-order rate constant, M^-1 s^-1
  double t0 = 0.0;  // reaction onset, s; [PS](t) = 0 for t <= t0
};

/// Throws DomainError unless p0, s0, k are positive and finite and t0 is
/// finite.
void validate(const ReactionParams& params);

/// One point of a complex-concentration trajectory.
struct KineticsSample {
  double t = 0.0;   // s
  double ps = 0.0;  // [PS] at t, M
};

/// Which closed-form trajectory model to evaluate.
enum class KineticsModel { pseudo_first_order, second_order_exact };

/// Wire tags "pseudo_first" / "second_exact" used in configs and reports.
std::string to_tag(KineticsModel model);
KineticsModel model_from_tag(const std::string& tag);  // InputError on unknown tag

/// Pseudo-first-order trajectory, valid when S0 >> P0 so the free-site
/// concentration stays ~S0:
///   [PS](t) = P0 (1 - exp(-S0 k (t - t0))),  0 for t <= t0.
/// Evaluated with expm1 so tiny S0 k (t - t0) keeps full precision.
double ps_pseudo_first_order(const ReactionParams& params, double t);

/// Exact integrated second-order trajectory. For P0 != S0, with
/// E = exp((P0 - S0) k (t - t0)):
///   [PS](t) = P0 S0 (E - 1) / (P0 E - S0),
/// rearranged around expm1 so large and small exponents stay stable. When
/// |P0 - S0| <= 1e-9 max(P0, S0) that expression is 0/0-degenerate and the
/// equal-concentration form P0^2 k dt / (1 + P0 k dt) is used instead.
/// Strictly increasing in t past t0 with limit min(P0, S0).
double ps_second_order_exact(const ReactionParams& params, double t);

/// Inverse of ps_second_order_exact: the elapsed time k*(t - t0) implied by a
/// complex concentration. Used to check that trajectories satisfy the
/// integrated rate relation.
double elapsed_kt_from_ps(const ReactionParams& params, double ps);

/// Half-life of the pseudo-first-order process, ln2 / (s0 k).
double half_life_pseudo_first(double s0, double k);

/// Deterministic oracle: adaptive Runge-Kutta integration of the rate law
/// itself, with per-step halving until the local relative error estimate is
/// below rel_tol. The grid must be strictly increasing; rel_tol in (0, 1e-2].
/// Grid points at or before t0 report ps = 0.
std::vector<KineticsSample> integrate_ode(const ReactionParams& params,
                                          std::span<const double> t_grid,
                                          double rel_tol);

/// Discrete realization of the same reaction: molecule counts in a finite
/// volume advancing one binding event at a time.
struct StochasticTrajectory {
  double volume = 0.0;       // L
  std::uint64_t seed = 0;
  std::int64_t n_enzyme = 0;  // initial free-enzyme molecule count
  std::int64_t n_sites = 0;   // initial binding-site molecule count
  struct Event {
    double time = 0.0;        // s, strictly increasing, all > t0
    std::int64_t bound = 0;   // bound-complex count after this event
  };
  std::vector<Event> events;
};

/// Stochastic oracle (Gillespie direct method, single reaction channel).
/// Initial counts are round(c * V * N_A) for each species and must be >= 1;
/// the per-event propensity is a = (k / (N_A V)) * nP * nS. Waiting times are
/// exponential; the trajectory is a deterministic function of the seed.
/// t_end <= t0 yields an empty event list.
StochasticTrajectory gillespie_simulate(const ReactionParams& params,
                                        double volume, double t_end,
                                        std::uint64_t seed);

}  // namespace lyasim::kinetics
