// lyasim: forward simulation and onset-time retrodiction for the
// DNA-photolyase binding assay. Subcommands: simulate, budget, assay,
// retrodict. All inputs come from flat key=value config files; outputs are
// deterministic functions of (config bytes, seed).

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lyasim/assay.hpp"
#include "lyasim/config.hpp"
#include "lyasim/csv.hpp"
#include "lyasim/errors.hpp"
#include "lyasim/kinetics.hpp"
#include "lyasim/photon_budget.hpp"
#include "lyasim/retrodict.hpp"

namespace {

using lyasim::io::Config;

// Exit codes: 0 success, 2 config error, 3 data error, 4 fit failure.
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitFit = 4;

lyasim::kinetics::ReactionParams reaction_params_from(const Config& config) {
  lyasim::kinetics::ReactionParams params;
  params.p0 = config.get_double("p0_molar");
  params.s0 = config.get_double("s0_molar");
  params.k = config.get_double("k_per_molar_s");
  params.t0 = config.get_double("t0_s");
  lyasim::kinetics::validate(params);
  return params;
}

int cmd_simulate(const Config& config, const std::string& out_path) {
  config.require_keys(
      {"model", "p0_molar", "s0_molar", "k_per_molar_s", "t0_s", "grid_start_s",
       "grid_end_s", "grid_count"},
      {});
  const auto params = reaction_params_from(config);
  const auto model = lyasim::kinetics::model_from_tag(config.get_string("model"));

  const double start = config.get_double("grid_start_s");
  const double end = config.get_double("grid_end_s");
  const std::int64_t count = config.get_int("grid_count");
  if (count < 1) throw lyasim::InputError("grid_count must be >= 1 (empty grid)");
  if (count > 1 && !(end > start)) {
    throw lyasim::InputError("grid_end_s must exceed grid_start_s");
  }

  std::vector<lyasim::kinetics::KineticsSample> samples;
  samples.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    const double t =
        count == 1 ? start
                   : start + (end - start) * static_cast<double>(i) /
                                 static_cast<double>(count - 1);
    const double ps =
        model == lyasim::kinetics::KineticsModel::pseudo_first_order
            ? lyasim::kinetics::ps_pseudo_first_order(params, t)
            : lyasim::kinetics::ps_second_order_exact(params, t);
    samples.push_back({t, ps});
  }
  lyasim::io::write_file_atomic(out_path, lyasim::io::trajectory_csv(samples));
  return 0;
}

std::string budget_report_text(const lyasim::budget::PhotonBudgetReport& report) {
  using lyasim::io::format_double;
  std::ostringstream out;
  out << "# photon budget: pulse -> absorbed uv photons -> converted sites\n";
  out << "absorbance=" << format_double(report.absorbance) << '\n';
  out << "fraction_absorbed=" << format_double(report.fraction_absorbed) << '\n';
  out << "total_sites=" << format_double(report.total_sites) << '\n';
  out << "required_photons=" << format_double(report.required_photons) << '\n';
  out << "conversion_fraction=" << format_double(report.conversion_fraction)
      << '\n';
  return out.str();
}

int cmd_budget(const Config& config, const std::optional<std::string>& out_path) {
  config.require_keys(
      {"epsilon_per_molar_cm", "dna_concentration_molar", "path_length_cm",
       "volume_liters", "quantum_yield", "gamma_count"},
      {"uv_multiplication", "sites_per_molecule"});
  lyasim::budget::PhotonBudgetInput input;
  input.epsilon = config.get_double("epsilon_per_molar_cm");
  input.dna_concentration = config.get_double("dna_concentration_molar");
  input.path_length = config.get_double("path_length_cm");
  input.volume = config.get_double("volume_liters");
  input.quantum_yield = config.get_double("quantum_yield");
  input.gamma_count = config.get_double("gamma_count");
  input.uv_multiplication = config.get_double_or("uv_multiplication", 1e6);
  input.sites_per_molecule = config.get_double_or("sites_per_molecule", 1.0);

  const auto report = lyasim::budget::budget_report(input);
  const std::string text = budget_report_text(report);
  std::cout << text;
  if (out_path) lyasim::io::write_file_atomic(*out_path, text);
  return 0;
}

int cmd_assay(const Config& config, std::optional<std::uint64_t> seed_flag,
              const std::string& out_path) {
  config.require_keys(
      {"model", "p0_molar", "s0_molar", "k_per_molar_s", "t0_s",
       "counts_per_molar"},
      {"gel_delay_s", "seed", "withdrawal_times_s", "n_aliquots",
       "horizon_halflives"});

  lyasim::assay::AssayProtocol protocol;
  protocol.params = reaction_params_from(config);
  protocol.gel_delay = config.get_double_or("gel_delay_s", 0.0);
  protocol.counts_per_molar = config.get_double("counts_per_molar");
  protocol.seed = seed_flag.value_or(config.get_u64_or("seed", 0));

  const bool explicit_times = config.has("withdrawal_times_s");
  const bool scheduled = config.has("n_aliquots") || config.has("horizon_halflives");
  if (explicit_times == scheduled) {
    throw lyasim::InputError(
        "specify either withdrawal_times_s or n_aliquots + horizon_halflives");
  }
  if (explicit_times) {
    protocol.withdrawal_times = config.get_double_list("withdrawal_times_s");
  } else {
    const std::int64_t n = config.get_int("n_aliquots");
    const double horizon = config.get_double("horizon_halflives");
    protocol.withdrawal_times = lyasim::assay::schedule_withdrawals(
        protocol.params, static_cast<int>(n), horizon);
  }

  const auto model = lyasim::kinetics::model_from_tag(config.get_string("model"));
  const auto measurements = lyasim::assay::run_assay(protocol, model);
  lyasim::io::write_file_atomic(out_path,
                                lyasim::io::measurements_csv(measurements));
  return 0;
}

std::string fit_report_text(const lyasim::retrodict::RetrodictionResult& result,
                            const std::optional<lyasim::retrodict::BootstrapResult>&
                                bootstrap,
                            int n_resamples) {
  using lyasim::io::format_double;
  std::ostringstream out;
  out << "model=" << lyasim::kinetics::to_tag(result.model) << '\n';
  out << "n_points=" << result.n_points << '\n';
  out << "p0_molar=" << format_double(result.p0) << '\n';
  out << "t0_hat_s=" << format_double(result.t0_hat) << '\n';
  if (result.rate_hat) {
    out << "rate_hat_per_s=" << format_double(*result.rate_hat) << '\n';
  }
  if (result.k_hat) {
    out << "k_hat_per_molar_s=" << format_double(*result.k_hat) << '\n';
  }
  if (result.s0_hat) {
    out << "s0_hat_molar=" << format_double(*result.s0_hat) << '\n';
    out << "s0_fitted=" << (result.s0_fitted ? "yes" : "no") << '\n';
  }
  out << "residual_norm=" << format_double(result.residual_norm) << '\n';
  out << "confidence=" << format_double(result.confidence) << '\n';
  if (bootstrap) {
    out << "ci_t0_low_s=" << format_double(bootstrap->t0.low) << '\n';
    out << "ci_t0_high_s=" << format_double(bootstrap->t0.high) << '\n';
    out << "ci_rate_low=" << format_double(bootstrap->rate.low) << '\n';
    out << "ci_rate_high=" << format_double(bootstrap->rate.high) << '\n';
    if (bootstrap->s0) {
      out << "ci_s0_low_molar=" << format_double(bootstrap->s0->low) << '\n';
      out << "ci_s0_high_molar=" << format_double(bootstrap->s0->high) << '\n';
    }
    out << "n_resamples=" << n_resamples << '\n';
    out << "bootstrap_failures=" << bootstrap->n_failed << '\n';
  }
  return out.str();
}

int cmd_retrodict(const Config& config, const std::string& input_path,
                  std::optional<std::uint64_t> seed_flag,
                  const std::optional<std::string>& out_path) {
  config.require_keys({"estimator", "p0_molar"},
                      {"s0_molar", "confidence", "bootstrap", "n_resamples",
                       "counts_per_molar", "seed", "weights"});

  const double p0 = config.get_double("p0_molar");
  const auto measurements = lyasim::io::parse_measurements_csv(
      lyasim::io::read_file(input_path), p0, input_path);

  lyasim::retrodict::FitOptions fit_options;
  fit_options.confidence = config.get_double_or("confidence", 0.95);
  const std::string weights = config.get_string_or("weights", "none");
  if (weights == "poisson") {
    fit_options.weighting = lyasim::retrodict::Weighting::poisson;
  } else if (weights != "none") {
    throw lyasim::InputError("weights must be 'none' or 'poisson'");
  }

  const std::string estimator = config.get_string("estimator");
  lyasim::retrodict::FitFunction fit;
  if (estimator == "two_point") {
    fit = [p0, &fit_options](const std::vector<lyasim::assay::AliquotMeasurement>&
                                 data) {
      if (data.size() < 2) {
        throw lyasim::InputError("two_point estimator needs >= 2 measurements");
      }
      auto sorted = data;
      std::sort(sorted.begin(), sorted.end(),
                [](const auto& a, const auto& b) { return a.gel_time < b.gel_time; });
      const auto est =
          lyasim::retrodict::two_point_estimate(sorted.front(), sorted.back(), p0);
      lyasim::retrodict::RetrodictionResult result;
      result.model = lyasim::kinetics::KineticsModel::pseudo_first_order;
      result.p0 = p0;
      result.rate_hat = est.rate;
      result.t0_hat = est.t0;
      result.n_points = 2;
      result.confidence = fit_options.confidence;
      return result;
    };
  } else if (estimator == "pseudo_first") {
    fit = [p0, fit_options](const auto& data) {
      return lyasim::retrodict::fit_pseudo_first(data, p0, fit_options);
    };
  } else if (estimator == "second_order") {
    std::optional<double> s0;
    if (config.has("s0_molar")) s0 = config.get_double("s0_molar");
    fit = [p0, s0, fit_options](const auto& data) {
      return lyasim::retrodict::fit_second_order(data, p0, s0, fit_options);
    };
  } else {
    throw lyasim::InputError(
        "estimator must be two_point, pseudo_first or second_order");
  }

  const auto base = fit(measurements);

  std::optional<lyasim::retrodict::BootstrapResult> bootstrap;
  lyasim::retrodict::BootstrapOptions bs_options;
  bs_options.n_resamples = static_cast<int>(config.get_int_or("n_resamples", 1000));
  bs_options.confidence = fit_options.confidence;
  bs_options.seed = seed_flag.value_or(config.get_u64_or("seed", 0));
  if (config.get_on_off_or("bootstrap", true)) {
    const double counts_per_molar = config.get_double_or("counts_per_molar", 0.0);
    if (!(counts_per_molar > 0.0)) {
      throw lyasim::InputError(
          "bootstrap needs counts_per_molar (the assay calibration); "
          "set bootstrap=off to skip the confidence interval");
    }
    bootstrap = lyasim::retrodict::bootstrap_ci(measurements, base, fit,
                                                counts_per_molar, bs_options);
  }

  auto reported = base;
  if (bootstrap) reported.ci_t0 = bootstrap->t0;
  const std::string text =
      fit_report_text(reported, bootstrap, bs_options.n_resamples);
  std::cout << text;
  if (out_path) lyasim::io::write_file_atomic(*out_path, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Forward simulator and onset-time estimator for an enzyme-binding "
      "photon detection assay"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string input_path;
  std::optional<std::uint64_t> seed_flag;

  auto add_common = [&](CLI::App* sub, bool out_required) {
    sub->add_option("--config", config_path, "key=value config file")
        ->required();
    auto* out = sub->add_option("--out", out_path, "output file path");
    if (out_required) out->required();
    sub->add_option("--seed", seed_flag, "override the config seed");
  };

  auto* simulate =
      app.add_subcommand("simulate", "evaluate a binding trajectory, write CSV");
  add_common(simulate, true);
  auto* budget =
      app.add_subcommand("budget", "photon budget and conversion report");
  add_common(budget, false);
  auto* assay = app.add_subcommand(
      "assay", "simulate gel measurements with counting noise, write CSV");
  add_common(assay, true);
  auto* retrodict = app.add_subcommand(
      "retrodict", "estimate the reaction onset from a measurement CSV");
  add_common(retrodict, false);
  retrodict->add_option("--input", input_path, "measurement CSV to fit")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    const Config config = Config::load(config_path);
    if (simulate->parsed()) return cmd_simulate(config, out_path);
    if (budget->parsed()) {
      return cmd_budget(config, budget->count("--out") ? std::optional(out_path)
                                                       : std::nullopt);
    }
    if (assay->parsed()) return cmd_assay(config, seed_flag, out_path);
    if (retrodict->parsed()) {
      return cmd_retrodict(config, input_path, seed_flag,
                           retrodict->count("--out") ? std::optional(out_path)
                                                     : std::nullopt);
    }
    return kExitConfig;
  } catch (const lyasim::FitError& e) {
    std::cerr << "fit error: " << e.what() << '\n';
    if (!e.trace().empty()) std::cerr << e.trace();
    return kExitFit;
  } catch (const lyasim::EstimationError& e) {
    std::cerr << "estimation error: " << e.what() << '\n';
    return kExitFit;
  } catch (const lyasim::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const lyasim::DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const lyasim::InputError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
