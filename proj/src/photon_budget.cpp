#include "lyasim/photon_budget.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lyasim/constants.hpp"
#include "lyasim/errors.hpp"

namespace lyasim::budget {

namespace {

double require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    std::ostringstream msg;
    msg << name << " must be positive and finite, got " << value;
    throw DomainError(msg.str());
  }
  return value;
}

double require_count(double value, const char* name) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    std::ostringstream msg;
    msg << name << " must be a non-negative finite count, got " << value;
    throw DomainError(msg.str());
  }
  return value;
}

double require_unit_fraction(double value, const char* name) {
  if (!(value > 0.0) || value > 1.0) {
    std::ostringstream msg;
    msg << name << " must lie in (0, 1], got " << value;
    throw DomainError(msg.str());
  }
  return value;
}

}  // namespace

double absorbance(const OpticalParams& optics) {
  require_positive(optics.epsilon, "epsilon");
  require_positive(optics.c_m, "molar concentration");
  require_positive(optics.path_length, "path length");
  return optics.epsilon * optics.c_m * optics.path_length;
}

double fraction_absorbed(double absorbance) {
  if (std::isnan(absorbance) || absorbance < 0.0) {
    throw DomainError("absorbance must be >= 0");
  }
  // 1 - 10^(-A) = -expm1(-A ln 10)
  return -std::expm1(-absorbance * ln10);
}

double uv_pulse_from_gamma(double gamma_count, double multiplication) {
  require_count(gamma_count, "gamma count");
  require_count(multiplication, "uv multiplication");
  return gamma_count * multiplication;
}

double dimer_sites(double dna_concentration, double volume,
                   double sites_per_molecule) {
  require_positive(dna_concentration, "DNA concentration");
  require_positive(volume, "volume");
  require_positive(sites_per_molecule, "sites per molecule");
  return std::round(dna_concentration * volume * avogadro * sites_per_molecule);
}

double required_photons(double total_sites, double fraction_absorbed,
                        double phi) {
  if (!(total_sites >= 1.0)) {
    throw DomainError("total_sites must be >= 1");
  }
  require_unit_fraction(fraction_absorbed, "fraction absorbed");
  require_unit_fraction(phi, "quantum yield");
  return std::ceil(total_sites / (fraction_absorbed * phi));
}

PhotonBudgetReport budget_report(const PhotonBudgetInput& input) {
  require_count(input.gamma_count, "gamma count");
  require_count(input.uv_multiplication, "uv multiplication");
  require_unit_fraction(input.quantum_yield, "quantum yield");

  PhotonBudgetReport report;
  report.absorbance = absorbance({input.epsilon, input.dna_concentration,
                                  input.path_length});
  report.fraction_absorbed = fraction_absorbed(report.absorbance);
  report.total_sites =
      dimer_sites(input.dna_concentration, input.volume, input.sites_per_molecule);
  report.required_photons = required_photons(
      report.total_sites, report.fraction_absorbed, input.quantum_yield);

  const double uv_count =
      uv_pulse_from_gamma(input.gamma_count, input.uv_multiplication);
  const double converting = uv_count * report.fraction_absorbed * input.quantum_yield;
  report.conversion_fraction = std::min(1.0, converting / report.total_sites);
  return report;
}

}  // namespace lyasim::budget
