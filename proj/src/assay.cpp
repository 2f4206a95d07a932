#include "lyasim/assay.hpp"

#include <cmath>
#include <sstream>

#include "lyasim/errors.hpp"
#include "lyasim/rng.hpp"

namespace lyasim::assay {

double ps_from_counts(std::int64_t bound, std::int64_t unbound, double p0) {
  if (bound < 0 || unbound < 0) {
    throw DomainError("band counts must be non-negative");
  }
  if (!(p0 > 0.0) || !std::isfinite(p0)) {
    throw DomainError("p0 must be positive and finite");
  }
  const std::int64_t total = bound + unbound;
  if (total == 0) {
    throw EstimationError("aliquot carries no counts in either band");
  }
  return p0 * static_cast<double>(bound) / static_cast<double>(total);
}

namespace {

void validate_protocol(const AssayProtocol& protocol) {
  kinetics::validate(protocol.params);
  if (protocol.withdrawal_times.empty()) {
    throw InputError("protocol needs at least one withdrawal time");
  }
  for (std::size_t i = 0; i + 1 < protocol.withdrawal_times.size(); ++i) {
    if (!(protocol.withdrawal_times[i] < protocol.withdrawal_times[i + 1])) {
      throw InputError("withdrawal times must be strictly increasing");
    }
  }
  if (!(protocol.gel_delay >= 0.0) || !std::isfinite(protocol.gel_delay)) {
    throw DomainError("gel_delay must be >= 0 and finite");
  }
  if (!(protocol.counts_per_molar > 0.0) ||
      !std::isfinite(protocol.counts_per_molar)) {
    throw DomainError("counts_per_molar must be positive and finite");
  }
  // Expected counts are sampled as int64; keep the means representable.
  if (protocol.counts_per_molar * protocol.params.p0 > 4e18) {
    throw DomainError("counts_per_molar * p0 exceeds the representable count range");
  }
}

}  // namespace

std::vector<AliquotMeasurement> run_assay(const AssayProtocol& protocol,
                                          kinetics::KineticsModel model) {
  validate_protocol(protocol);
  const double p0 = protocol.params.p0;

  std::vector<AliquotMeasurement> out;
  out.reserve(protocol.withdrawal_times.size());
  for (std::size_t i = 0; i < protocol.withdrawal_times.size(); ++i) {
    const double gel_time = protocol.withdrawal_times[i] + protocol.gel_delay;
    const double ps =
        model == kinetics::KineticsModel::pseudo_first_order
            ? kinetics::ps_pseudo_first_order(protocol.params, gel_time)
            : kinetics::ps_second_order_exact(protocol.params, gel_time);

    Rng rng(derive_seed(protocol.seed, i));
    AliquotMeasurement m;
    m.gel_time = gel_time;
    m.bound_counts = rng.poisson(protocol.counts_per_molar * ps);
    m.unbound_counts = rng.poisson(protocol.counts_per_molar * (p0 - ps));
    m.p0_assumed = p0;
    const std::int64_t total = m.bound_counts + m.unbound_counts;
    m.ps_estimate = total > 0 ? ps_from_counts(m.bound_counts, m.unbound_counts, p0)
                              : 0.0;
    out.push_back(m);
  }
  return out;
}

std::vector<double> schedule_withdrawals(const kinetics::ReactionParams& params,
                                         int n, double horizon_halflives) {
  kinetics::validate(params);
  if (n < 2) throw InputError("schedule needs at least 2 withdrawals");
  if (!(horizon_halflives > 0.0) || horizon_halflives > 5.0) {
    throw DomainError("horizon must lie in (0, 5] half-lives");
  }

  const double rate = params.s0 * params.k;
  // u = exp(-rate (t - t0)) runs from 1 at onset down to 2^-horizon.
  const double u_end = std::exp2(-horizon_halflives);
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) {
    const double u = 1.0 + (u_end - 1.0) * static_cast<double>(i) /
                               static_cast<double>(n);
    times.push_back(params.t0 - std::log(u) / rate);
  }
  return times;
}

}  // namespace lyasim::assay
