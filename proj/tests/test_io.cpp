#include <cstdint>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "lyasim/config.hpp"
#include "lyasim/csv.hpp"
#include "lyasim/errors.hpp"

using namespace lyasim;
using io::Config;

TEST_CASE("config parsing") {
  const std::string text =
      "# reaction\n"
      "p0_molar = 1e-12\n"
      "s0_molar=1e-10   # inline comment\n"
      "seed=42\n"
      "model=pseudo_first\n"
      "\n"
      "withdrawal_times_s=100, 200,300\n";
  const Config config = Config::parse(text, "test");
  CHECK(config.get_double("p0_molar") == 1e-12);
  CHECK(config.get_double("s0_molar") == 1e-10);
  CHECK(config.get_u64_or("seed", 0) == 42);
  CHECK(config.get_string("model") == "pseudo_first");
  const auto times = config.get_double_list("withdrawal_times_s");
  REQUIRE(times.size() == 3);
  CHECK(times[1] == 200.0);
  CHECK(config.get_double_or("gel_delay_s", 0.0) == 0.0);
  CHECK_FALSE(config.has("gel_delay_s"));
}

TEST_CASE("config rejects malformed input") {
  CHECK_THROWS_AS(Config::parse("just a line\n", "t"), InputError);
  CHECK_THROWS_AS(Config::parse("=5\n", "t"), InputError);
  CHECK_THROWS_AS(Config::parse("a=1\na=2\n", "t"), InputError);

  const Config config = Config::parse("p0_molar=abc\nn=1.5\n", "t");
  CHECK_THROWS_AS(config.get_double("p0_molar"), InputError);
  CHECK_THROWS_AS(config.get_int("n"), InputError);
  CHECK_THROWS_AS(config.get_double("missing"), InputError);
}

TEST_CASE("config key set enforcement names the offender") {
  const Config config = Config::parse("p0_molar=1\ntypo_key=2\n", "cfg");
  try {
    config.require_keys({"p0_molar"}, {});
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("typo_key") != std::string::npos);
  }
  try {
    Config::parse("a=1\n", "cfg").require_keys({"a", "b"}, {});
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("'b'") != std::string::npos);
  }
}

TEST_CASE("doubles round-trip through the 17-digit format") {
  for (double v : {1e-12, 2.3023200184341369e-4, 3465.735902799726,
                   -0.15817463559, 1.0 / 3.0}) {
    const std::string text = io::format_double(v);
    CHECK(std::stod(text) == v);
  }
}

TEST_CASE("measurement CSV round trip") {
  std::vector<assay::AliquotMeasurement> rows(2);
  rows[0] = {1100.0, 181, 819000, 1.8126924692201814e-13, 1e-12};
  rows[1] = {3100.0, 451, 548000, 4.5118836390597352e-13, 1e-12};
  const std::string csv = io::measurements_csv(rows);
  const auto parsed = io::parse_measurements_csv(csv, 1e-12, "mem");
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0].gel_time == rows[0].gel_time);
  CHECK(parsed[0].bound_counts == rows[0].bound_counts);
  CHECK(parsed[1].unbound_counts == rows[1].unbound_counts);
  CHECK(parsed[1].ps_estimate == rows[1].ps_estimate);
  CHECK(parsed[0].p0_assumed == 1e-12);
}

TEST_CASE("measurement CSV parse errors name the line") {
  const std::string header =
      "gel_time_s,bound_counts,unbound_counts,ps_estimate_molar\n";
  try {
    io::parse_measurements_csv(header + "1.0,2,3,4e-13\nx,2,3,4e-13\n", 1e-12,
                               "bad.csv");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string what = e.what();
    CHECK(what.find("bad.csv") != std::string::npos);
    CHECK(what.find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(io::parse_measurements_csv("wrong_header\n", 1e-12, "h"),
                  DataError);
  CHECK_THROWS_AS(io::parse_measurements_csv(header + "1.0,2,3\n", 1e-12, "f"),
                  DataError);
  CHECK_THROWS_AS(io::parse_measurements_csv(header + "1.0,-2,3,4e-13\n", 1e-12,
                                             "n"),
                  DataError);
  CHECK_THROWS_AS(io::parse_measurements_csv("", 1e-12, "e"), DataError);
}

TEST_CASE("atomic writes leave no temporary behind") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "lyasim_io_test";
  fs::create_directories(dir);
  const fs::path target = dir / "out.csv";
  io::write_file_atomic(target, "t_s,ps_molar\n");
  CHECK(fs::exists(target));
  CHECK_FALSE(fs::exists(dir / "out.csv.tmp"));
  CHECK(io::read_file(target) == "t_s,ps_molar\n");
  fs::remove_all(dir);
}
