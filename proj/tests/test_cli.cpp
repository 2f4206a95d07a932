// End-to-end checks of the lyasim binary: exit codes, file formats and
// determinism. The binary path comes from the build (LYASIM_CLI_PATH) and can
// be overridden with the LYASIM_CLI environment variable.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "doctest.h"
#include "lyasim/csv.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  if (const char* env = std::getenv("LYASIM_CLI")) return env;
  return LYASIM_CLI_PATH;
}

struct RunResult {
  int exit_code = -1;
  std::string stdout_text;
};

RunResult run_cli(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt";
  const std::string cmd =
      "'" + cli_path() + "' " + args + " > '" + out.string() + "' 2>/dev/null";
  const int status = std::system(cmd.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  if (fs::exists(out)) result.stdout_text = lyasim::io::read_file(out);
  return result;
}

void write(const fs::path& path, const std::string& content) {
  std::ofstream f(path);
  f << content;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("lyasim_cli_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int n = 0;
    return n;
  }
};

const std::string kAssayConfig =
    "model=pseudo_first\n"
    "p0_molar=1e-12\n"
    "s0_molar=1e-10\n"
    "k_per_molar_s=2e6\n"
    "t0_s=100\n"
    "counts_per_molar=1e18\n"
    "n_aliquots=10\n"
    "horizon_halflives=3\n"
    "seed=7\n";

const std::string kRetrodictConfig =
    "estimator=pseudo_first\n"
    "p0_molar=1e-12\n"
    "counts_per_molar=1e18\n"
    "n_resamples=200\n"
    "seed=9\n";

}  // namespace

TEST_CASE("simulate writes a monotone trajectory CSV") {
  TempDir dir;
  write(dir.path / "sim.cfg",
        "model=pseudo_first\n"
        "p0_molar=1e-12\n"
        "s0_molar=1e-10\n"
        "k_per_molar_s=1.4e6\n"
        "t0_s=0\n"
        "grid_start_s=0\n"
        "grid_end_s=24755\n"  // ~5 half-lives at rate 1.4e-4
        "grid_count=50\n");
  const auto out = (dir.path / "traj.csv").string();
  const auto r = run_cli("simulate --config '" + (dir.path / "sim.cfg").string() +
                             "' --out '" + out + "'",
                         dir.path);
  REQUIRE(r.exit_code == 0);

  std::ifstream csv(out);
  std::string line;
  REQUIRE(std::getline(csv, line));
  CHECK(line == "t_s,ps_molar");
  double prev = -1.0;
  double last = 0.0;
  int rows = 0;
  while (std::getline(csv, line)) {
    const auto comma = line.find(',');
    REQUIRE(comma != std::string::npos);
    last = std::stod(line.substr(comma + 1));
    CHECK(last >= prev);
    prev = last;
    ++rows;
  }
  CHECK(rows == 50);
  // Plateauing near p0 after 5 half-lives.
  CHECK(last > 0.95e-12);
  CHECK(last < 1e-12);
}

TEST_CASE("simulate rejects an empty grid and unknown keys") {
  TempDir dir;
  write(dir.path / "empty.cfg",
        "model=pseudo_first\np0_molar=1e-12\ns0_molar=1e-10\n"
        "k_per_molar_s=2e6\nt0_s=0\ngrid_start_s=0\ngrid_end_s=10\n"
        "grid_count=0\n");
  const auto r1 = run_cli("simulate --config '" +
                              (dir.path / "empty.cfg").string() + "' --out '" +
                              (dir.path / "o.csv").string() + "'",
                          dir.path);
  CHECK(r1.exit_code == 2);
  CHECK_FALSE(fs::exists(dir.path / "o.csv"));

  write(dir.path / "unknown.cfg", kAssayConfig + "mystery_key=1\n");
  const auto r2 = run_cli("assay --config '" +
                              (dir.path / "unknown.cfg").string() + "' --out '" +
                              (dir.path / "a.csv").string() + "'",
                          dir.path);
  CHECK(r2.exit_code == 2);
}

TEST_CASE("both models agree to 1% on the reference concentrations") {
  TempDir dir;
  const std::string base =
      "p0_molar=1e-12\ns0_molar=1e-10\nk_per_molar_s=2e6\nt0_s=0\n"
      "grid_start_s=100\ngrid_end_s=17000\ngrid_count=40\n";
  write(dir.path / "pf.cfg", "model=pseudo_first\n" + base);
  write(dir.path / "so.cfg", "model=second_exact\n" + base);
  const auto pf_out = (dir.path / "pf.csv").string();
  const auto so_out = (dir.path / "so.csv").string();
  REQUIRE(run_cli("simulate --config '" + (dir.path / "pf.cfg").string() +
                      "' --out '" + pf_out + "'",
                  dir.path)
              .exit_code == 0);
  REQUIRE(run_cli("simulate --config '" + (dir.path / "so.cfg").string() +
                      "' --out '" + so_out + "'",
                  dir.path)
              .exit_code == 0);

  std::ifstream pf(pf_out), so(so_out);
  std::string a, b;
  std::getline(pf, a);
  std::getline(so, b);
  double worst = 0.0;
  while (std::getline(pf, a) && std::getline(so, b)) {
    const double va = std::stod(a.substr(a.find(',') + 1));
    const double vb = std::stod(b.substr(b.find(',') + 1));
    if (vb > 0.0) worst = std::max(worst, std::abs(va - vb) / vb);
  }
  CHECK(worst <= 0.01);
}

TEST_CASE("budget subcommand reports the reference numbers") {
  TempDir dir;
  write(dir.path / "budget.cfg",
        "epsilon_per_molar_cm=1e5\n"
        "dna_concentration_molar=1e-10\n"
        "path_length_cm=10\n"
        "volume_liters=1e-4\n"
        "quantum_yield=0.015\n"
        "gamma_count=1e9\n");
  const auto r = run_cli(
      "budget --config '" + (dir.path / "budget.cfg").string() + "'", dir.path);
  REQUIRE(r.exit_code == 0);
  CHECK(r.stdout_text.find("absorbance=1.0000000000000000e-04") !=
        std::string::npos);
  CHECK(r.stdout_text.find("fraction_absorbed=2.302320018434") !=
        std::string::npos);
  CHECK(r.stdout_text.find("required_photons=1.743789079937") !=
        std::string::npos);
  CHECK(r.stdout_text.find("conversion_fraction=5.734638503619") !=
        std::string::npos);
}

TEST_CASE("assay and retrodict round trip with deterministic outputs") {
  TempDir dir;
  write(dir.path / "assay.cfg", kAssayConfig);
  write(dir.path / "fit.cfg", kRetrodictConfig);

  const auto csv1 = (dir.path / "m1.csv").string();
  const auto csv2 = (dir.path / "m2.csv").string();
  REQUIRE(run_cli("assay --config '" + (dir.path / "assay.cfg").string() +
                      "' --out '" + csv1 + "'",
                  dir.path)
              .exit_code == 0);
  REQUIRE(run_cli("assay --config '" + (dir.path / "assay.cfg").string() +
                      "' --out '" + csv2 + "'",
                  dir.path)
              .exit_code == 0);
  CHECK(lyasim::io::read_file(csv1) == lyasim::io::read_file(csv2));

  const auto fit1 = run_cli("retrodict --config '" +
                                (dir.path / "fit.cfg").string() + "' --input '" +
                                csv1 + "'",
                            dir.path);
  const auto fit2 = run_cli("retrodict --config '" +
                                (dir.path / "fit.cfg").string() + "' --input '" +
                                csv1 + "'",
                            dir.path);
  REQUIRE(fit1.exit_code == 0);
  CHECK(fit1.stdout_text == fit2.stdout_text);
  CHECK(fit1.stdout_text.find("t0_hat_s=") != std::string::npos);
  CHECK(fit1.stdout_text.find("ci_t0_low_s=") != std::string::npos);

  // The fitted onset should sit near the true 100 s at these statistics.
  const auto pos = fit1.stdout_text.find("t0_hat_s=");
  const double t0_hat = std::stod(fit1.stdout_text.substr(pos + 9));
  CHECK(std::abs(t0_hat - 100.0) < 100.0);
}

TEST_CASE("assay estimates track the analytic curve at heavy counting") {
  TempDir dir;
  write(dir.path / "assay.cfg", kAssayConfig);
  const auto out = (dir.path / "m.csv").string();
  REQUIRE(run_cli("assay --config '" + (dir.path / "assay.cfg").string() +
                      "' --out '" + out + "'",
                  dir.path)
              .exit_code == 0);
  const auto rows =
      lyasim::io::parse_measurements_csv(lyasim::io::read_file(out), 1e-12, out);
  REQUIRE(rows.size() == 10);
  for (const auto& m : rows) {
    // Pseudo-first-order curve with rate 2e-4, onset 100 s.
    const double truth = 1e-12 * -std::expm1(-2e-4 * (m.gel_time - 100.0));
    CHECK(std::abs(m.ps_estimate - truth) / truth <= 0.05);
  }
}

TEST_CASE("--seed overrides the config seed") {
  TempDir dir;
  write(dir.path / "assay.cfg", kAssayConfig);
  const auto a = (dir.path / "a.csv").string();
  const auto b = (dir.path / "b.csv").string();
  const auto c = (dir.path / "c.csv").string();
  const std::string base =
      "assay --config '" + (dir.path / "assay.cfg").string() + "'";
  REQUIRE(run_cli(base + " --out '" + a + "'", dir.path).exit_code == 0);
  REQUIRE(run_cli(base + " --seed 7 --out '" + b + "'", dir.path).exit_code == 0);
  REQUIRE(run_cli(base + " --seed 8 --out '" + c + "'", dir.path).exit_code == 0);
  // Config says seed=7, so an explicit --seed 7 reproduces it exactly.
  CHECK(lyasim::io::read_file(a) == lyasim::io::read_file(b));
  CHECK(lyasim::io::read_file(a) != lyasim::io::read_file(c));
}

TEST_CASE("assay before onset yields empty bound bands") {
  TempDir dir;
  write(dir.path / "early.cfg",
        "model=pseudo_first\np0_molar=1e-12\ns0_molar=1e-10\n"
        "k_per_molar_s=2e6\nt0_s=1e6\ncounts_per_molar=1e18\n"
        "withdrawal_times_s=100,200,300\nseed=1\n");
  const auto out = (dir.path / "early.csv").string();
  REQUIRE(run_cli("assay --config '" + (dir.path / "early.cfg").string() +
                      "' --out '" + out + "'",
                  dir.path)
              .exit_code == 0);
  std::ifstream csv(out);
  std::string line;
  std::getline(csv, line);
  while (std::getline(csv, line)) {
    const auto first_comma = line.find(',');
    const auto second_comma = line.find(',', first_comma + 1);
    CHECK(line.substr(first_comma + 1, second_comma - first_comma - 1) == "0");
  }
}

TEST_CASE("retrodict surfaces data errors with line numbers") {
  TempDir dir;
  write(dir.path / "fit.cfg", kRetrodictConfig);

  write(dir.path / "short.csv",
        "gel_time_s,bound_counts,unbound_counts,ps_estimate_molar\n"
        "1100.0,5,100,4.7e-14\n");
  const auto r1 = run_cli("retrodict --config '" +
                              (dir.path / "fit.cfg").string() + "' --input '" +
                              (dir.path / "short.csv").string() + "'",
                          dir.path);
  CHECK(r1.exit_code == 2);  // too few points is an input problem

  write(dir.path / "corrupt.csv",
        "gel_time_s,bound_counts,unbound_counts,ps_estimate_molar\n"
        "1100.0,5,100,4.7e-14\n"
        "2100.0,five,100,4.7e-14\n");
  const auto r2 = run_cli("retrodict --config '" +
                              (dir.path / "fit.cfg").string() + "' --input '" +
                              (dir.path / "corrupt.csv").string() + "'",
                          dir.path);
  CHECK(r2.exit_code == 3);

  const auto r3 = run_cli("retrodict --config '" +
                              (dir.path / "fit.cfg").string() + "' --input '" +
                              (dir.path / "nonexistent.csv").string() + "'",
                          dir.path);
  CHECK(r3.exit_code == 3);
}

TEST_CASE("retrodict flags uninformative data as a fit failure") {
  TempDir dir;
  write(dir.path / "fit.cfg", kRetrodictConfig);
  // Identical plateau estimates at every instant.
  write(dir.path / "plateau.csv",
        "gel_time_s,bound_counts,unbound_counts,ps_estimate_molar\n"
        "1000.0,1000,1,9.99e-13\n"
        "2000.0,1000,1,9.99e-13\n"
        "3000.0,1000,1,9.99e-13\n");
  const auto r = run_cli("retrodict --config '" +
                             (dir.path / "fit.cfg").string() + "' --input '" +
                             (dir.path / "plateau.csv").string() + "'",
                         dir.path);
  CHECK(r.exit_code == 4);
}

TEST_CASE("config errors carry exit code 2") {
  TempDir dir;
  const auto r = run_cli("simulate --config '" +
                             (dir.path / "missing.cfg").string() + "' --out '" +
                             (dir.path / "x.csv").string() + "'",
                         dir.path);
  CHECK(r.exit_code == 3);  // unreadable config file is a data problem

  write(dir.path / "bad.cfg", "model=warp_drive\np0_molar=1e-12\n");
  const auto r2 = run_cli("simulate --config '" +
                              (dir.path / "bad.cfg").string() + "' --out '" +
                              (dir.path / "x.csv").string() + "'",
                          dir.path);
  CHECK(r2.exit_code == 2);
}
