#include "lyasim/config.hpp"

#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <sstream>

#include "lyasim/csv.hpp"
#include "lyasim/errors.hpp"

namespace lyasim::io {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

Config Config::parse(const std::string& content, const std::string& source_name) {
  Config config;
  config.source_ = source_name;
  std::istringstream in(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      std::ostringstream msg;
      msg << source_name << ": line " << line_no
          << ": expected key=value, got '" << line << "'";
      throw InputError(msg.str());
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      std::ostringstream msg;
      msg << source_name << ": line " << line_no << ": empty key";
      throw InputError(msg.str());
    }
    if (!config.values_.emplace(key, value).second) {
      std::ostringstream msg;
      msg << source_name << ": line " << line_no << ": duplicate key '" << key
          << "'";
      throw InputError(msg.str());
    }
  }
  return config;
}

Config Config::load(const std::filesystem::path& path) {
  return parse(read_file(path), path.string());
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

namespace {

[[noreturn]] void key_fail(const std::string& source, const std::string& key,
                           const std::string& what) {
  throw InputError(source + ": key '" + key + "': " + what);
}

}  // namespace

double Config::get_double(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) key_fail(source_, key, "required but missing");
  errno = 0;
  char* end = nullptr;
  const double value = std::strtod(it->second.c_str(), &end);
  if (end == it->second.c_str() || *end != '\0' || errno == ERANGE) {
    key_fail(source_, key, "expected a number, got '" + it->second + "'");
  }
  return value;
}

double Config::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

std::int64_t Config::get_int(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) key_fail(source_, key, "required but missing");
  std::int64_t value = 0;
  const auto& text = it->second;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    key_fail(source_, key, "expected an integer, got '" + text + "'");
  }
  return value;
}

std::int64_t Config::get_int_or(const std::string& key, std::int64_t fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::uint64_t Config::get_u64_or(const std::string& key,
                                 std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const auto it = values_.find(key);
  std::uint64_t value = 0;
  const auto& text = it->second;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    key_fail(source_, key, "expected an unsigned integer, got '" + text + "'");
  }
  return value;
}

std::string Config::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) key_fail(source_, key, "required but missing");
  return it->second;
}

std::string Config::get_string_or(const std::string& key,
                                  std::string fallback) const {
  return has(key) ? get_string(key) : fallback;
}

bool Config::get_on_off_or(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string value = get_string(key);
  if (value == "on") return true;
  if (value == "off") return false;
  key_fail(source_, key, "expected 'on' or 'off', got '" + value + "'");
}

std::vector<double> Config::get_double_list(const std::string& key) const {
  const std::string text = get_string(key);
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    const std::string field = trim(text.substr(start, comma - start));
    if (field.empty()) {
      key_fail(source_, key, "empty element in comma-separated list");
    }
    errno = 0;
    char* end = nullptr;
    const double value = std::strtod(field.c_str(), &end);
    if (end == field.c_str() || *end != '\0' || errno == ERANGE) {
      key_fail(source_, key, "expected a number, got '" + field + "'");
    }
    values.push_back(value);
    start = comma + 1;
  }
  return values;
}

void Config::require_keys(const std::set<std::string>& required,
                          const std::set<std::string>& optional) const {
  for (const auto& [key, value] : values_) {
    if (!required.count(key) && !optional.count(key)) {
      throw InputError(source_ + ": unknown key '" + key + "'");
    }
  }
  for (const auto& key : required) {
    if (!has(key)) {
      throw InputError(source_ + ": required key '" + key + "' is missing");
    }
  }
}

}  // namespace lyasim::io
