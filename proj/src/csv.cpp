#include "lyasim/csv.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "lyasim/errors.hpp"

namespace lyasim::io {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", value);
  return buf;
}

std::string trajectory_csv(const std::vector<kinetics::KineticsSample>& samples) {
  std::ostringstream out;
  out << "t_s,ps_molar\n";
  for (const auto& s : samples) {
    out << format_double(s.t) << ',' << format_double(s.ps) << '\n';
  }
  return out.str();
}

std::string measurements_csv(const std::vector<assay::AliquotMeasurement>& rows) {
  std::ostringstream out;
  out << "gel_time_s,bound_counts,unbound_counts,ps_estimate_molar\n";
  for (const auto& m : rows) {
    out << format_double(m.gel_time) << ',' << m.bound_counts << ','
        << m.unbound_counts << ',' << format_double(m.ps_estimate) << '\n';
  }
  return out.str();
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

[[noreturn]] void parse_fail(const std::string& source, std::size_t line_no,
                             const std::string& what) {
  std::ostringstream msg;
  msg << source << ": line " << line_no << ": " << what;
  throw DataError(msg.str());
}

double parse_double_field(const std::string& field, const std::string& source,
                          std::size_t line_no) {
  errno = 0;
  char* end = nullptr;
  const double value = std::strtod(field.c_str(), &end);
  if (end == field.c_str() || *end != '\0' || errno == ERANGE) {
    parse_fail(source, line_no, "expected a number, got '" + field + "'");
  }
  return value;
}

std::int64_t parse_count_field(const std::string& field,
                               const std::string& source, std::size_t line_no) {
  std::int64_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size() || value < 0) {
    parse_fail(source, line_no,
               "expected a non-negative integer count, got '" + field + "'");
  }
  return value;
}

}  // namespace

std::vector<assay::AliquotMeasurement> parse_measurements_csv(
    const std::string& content, double p0, const std::string& source_name) {
  std::istringstream in(content);
  std::string line;
  std::size_t line_no = 0;
  std::vector<assay::AliquotMeasurement> rows;

  if (!std::getline(in, line)) {
    throw DataError(source_name + ": empty measurement file");
  }
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "gel_time_s,bound_counts,unbound_counts,ps_estimate_molar") {
    parse_fail(source_name, line_no, "unexpected header '" + line + "'");
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 4) {
      parse_fail(source_name, line_no, "expected 4 comma-separated fields");
    }
    assay::AliquotMeasurement m;
    m.gel_time = parse_double_field(fields[0], source_name, line_no);
    m.bound_counts = parse_count_field(fields[1], source_name, line_no);
    m.unbound_counts = parse_count_field(fields[2], source_name, line_no);
    m.ps_estimate = parse_double_field(fields[3], source_name, line_no);
    m.p0_assumed = p0;
    rows.push_back(m);
  }
  return rows;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open '" + path.string() + "' for reading");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) {
    throw DataError("failed while reading '" + path.string() + "'");
  }
  return buf.str();
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw DataError("cannot open '" + tmp.string() + "' for writing");
    }
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw DataError("failed while writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw DataError("cannot move temporary output into '" + path.string() + "'");
  }
}

}  // namespace lyasim::io
