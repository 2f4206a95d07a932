#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lyasim/assay.hpp"
#include "lyasim/kinetics.hpp"

namespace lyasim::io {

/// Doubles are written as decimal scientific notation with 17 significant
/// digits, which round-trips double precision exactly.
std::string format_double(double value);

/// Trajectory CSV, header "t_s,ps_molar".
std::string trajectory_csv(const std::vector<kinetics::KineticsSample>& samples);

/// Measurement CSV, header
/// "gel_time_s,bound_counts,unbound_counts,ps_estimate_molar". Counts are
/// written as plain integers (they are exact).
std::string measurements_csv(const std::vector<assay::AliquotMeasurement>& rows);

/// Parse a measurement CSV. The file does not carry the generator's P0, so
/// the caller supplies the value recorded into p0_assumed. Malformed content
/// raises DataError naming the line number.
std::vector<assay::AliquotMeasurement> parse_measurements_csv(
    const std::string& content, double p0, const std::string& source_name);

std::string read_file(const std::filesystem::path& path);  // DataError on failure

/// Write content to path via a temporary file in the same directory, renamed
/// into place on success, so a failed run never leaves a partial file behind.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

}  // namespace lyasim::io
