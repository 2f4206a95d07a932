#pragma once

#include <cstdint>
#include <vector>

#include "lyasim/kinetics.hpp"

namespace lyasim::assay {

/// A full virtual gel experiment: withdraw aliquots at the given times, run
/// each through a gel gel_delay seconds later, and count the radiolabel in
/// the bound and unbound bands.
///
/// Binding keeps going until the aliquot hits the gel, so the operative
/// instant of a measurement is withdrawal time + gel_delay, and that is the
/// time recorded with it. Aliquots are assumed non-perturbative (the bulk is
/// not depleted) and band separation is perfect; the aliquot size and counter
/// efficiency are folded into the single calibration counts_per_molar.
struct AssayProtocol {
  kinetics::ReactionParams params;
  std::vector<double> withdrawal_times;  // s, strictly increasing
  double gel_delay = 0.0;                // s, >= 0, same for every aliquot
  double counts_per_molar = 0.0;         // expected counts per molar of enzyme
  std::uint64_t seed = 0;
};

/// One gel lane: observed radioactive counts in the two bands and the complex
/// concentration they imply.
struct AliquotMeasurement {
  double gel_time = 0.0;          // s, withdrawal + gel_delay
  std::int64_t bound_counts = 0;
  std::int64_t unbound_counts = 0;
  double ps_estimate = 0.0;       // M, p0 * bound / (bound + unbound)
  double p0_assumed = 0.0;        // M, the P0 used to scale the estimate
};

/// Concentration estimate from the two band counts: p0 * bound / total.
/// Throws EstimationError when both bands are empty (uninformative aliquot).
double ps_from_counts(std::int64_t bound, std::int64_t unbound, double p0);

/// Simulate the protocol under the chosen trajectory model. Expected counts
/// per band are counts_per_molar * [PS] and counts_per_molar * (P0 - [PS]) at
/// the gel-application instant; observed counts are independent Poisson draws
/// with those means, one derived rng stream per aliquot. Deterministic for a
/// given (protocol, seed).
std::vector<AliquotMeasurement> run_assay(const AssayProtocol& protocol,
                                          kinetics::KineticsModel model);

/// Place n withdrawal instants so that consecutive points are equally spaced
/// in the survival variable u = exp(-S0 k (t - t0)), covering
/// (t0, t0 + horizon_halflives * t_half]. Sampling is densest where the
/// trajectory moves fastest, which is where onset information lives. The
/// horizon must stay within (0, 5] half-lives, before the plateau; t0 itself
/// is never returned. Requires n >= 2.
std::vector<double> schedule_withdrawals(const kinetics::ReactionParams& params,
                                         int n, double horizon_halflives);

}  // namespace lyasim::assay
