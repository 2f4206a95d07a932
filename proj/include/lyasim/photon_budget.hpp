#pragma once

namespace lyasim::budget {

/// Optical description of the irradiated sample.
struct OpticalParams {
  double epsilon = 0.0;      // extinction coefficient, M^-1 cm^-1
  double c_m = 0.0;          // molar concentration, M
  double path_length = 0.0;  // cm
};

/// Decadic absorbance A = epsilon * c_m * L. All fields must be positive and
/// finite.
double absorbance(const OpticalParams& optics);

/// Fraction of incident photons absorbed by a sample of decadic absorbance A:
/// 1 - 10^(-A). Accurate for small A via expm1; A may be +inf (opaque limit).
double fraction_absorbed(double absorbance);

/// Size of the uv pulse produced when gamma photons strike the scintillator
/// crystal: gamma_count * multiplication. Counts are carried as doubles.
double uv_pulse_from_gamma(double gamma_count, double multiplication);

/// Number of potential dimer-formation sites in the sample,
/// round(c * V * N_A * sites_per_molecule).
double dimer_sites(double dna_concentration, double volume,
                   double sites_per_molecule);

/// Incident photons needed to convert every site, given the absorbed fraction
/// and the quantum yield phi (dimers formed per photon absorbed):
/// ceil(total_sites / (fraction_absorbed * phi)).
double required_photons(double total_sites, double fraction_absorbed,
                        double phi);

/// Everything the budget pipeline needs: the optical sample description, the
/// gamma pulse and its uv multiplication, the photochemical yield, and the
/// sample volume.
struct PhotonBudgetInput {
  double gamma_count = 0.0;
  double uv_multiplication = 1e6;  // uv photons per gamma photon
  double quantum_yield = 0.0;      // phi in (0, 1]
  double dna_concentration = 0.0;  // M; doubles as the optical molar concentration
  double volume = 0.0;             // L
  double sites_per_molecule = 1.0;
  double epsilon = 0.0;            // M^-1 cm^-1
  double path_length = 0.0;        // cm
};

struct PhotonBudgetReport {
  double absorbance = 0.0;
  double fraction_absorbed = 0.0;
  double total_sites = 0.0;
  double required_photons = 0.0;
  double conversion_fraction = 0.0;  // in [0, 1]
};

/// Compose the budget: absorbance and absorbed fraction from the optics,
/// site count from the volume, and the fraction of sites the gamma-induced
/// uv pulse can convert, min(1, uv * fraction * phi / sites). Conversion
/// results are advisory; they do not feed back into the kinetics parameters.
PhotonBudgetReport budget_report(const PhotonBudgetInput& input);

}  // namespace lyasim::budget
