#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace lyasim::io {

/// Flat key=value run configuration. One assignment per line, '#' starts a
/// comment, blank lines ignored, no nesting, duplicate keys rejected.
/// Subcommands validate the key set up front (unknown keys are errors) so a
/// typo never silently falls back to a default.
class Config {
 public:
  static Config parse(const std::string& content, const std::string& source_name);
  static Config load(const std::filesystem::path& path);

  bool has(const std::string& key) const;

  /// Typed accessors; missing keys or unparseable values raise InputError
  /// naming the key.
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int_or(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_u64_or(const std::string& key, std::uint64_t fallback) const;
  std::string get_string(const std::string& key) const;
  std::string get_string_or(const std::string& key, std::string fallback) const;
  bool get_on_off_or(const std::string& key, bool fallback) const;
  std::vector<double> get_double_list(const std::string& key) const;

  /// Reject unknown keys and report missing required ones, naming offenders.
  void require_keys(const std::set<std::string>& required,
                    const std::set<std::string>& optional) const;

 private:
  std::string source_;
  std::map<std::string, std::string> values_;
};

}  // namespace lyasim::io
