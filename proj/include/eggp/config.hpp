#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "eggp/simulate.hpp"

namespace eggp::config {

// Scalar or flat homogeneous array.
using Value = std::variant<bool, std::int64_t, double, std::string,
                           std::vector<std::int64_t>, std::vector<double>,
                           std::vector<std::string>>;

// One [section] of key = value pairs. Getters record which keys were read so
// finish() can reject typos.
class Section {
 public:
  Section() = default;
  Section(std::string name, std::string origin)
      : name_(std::move(name)), origin_(std::move(origin)) {}

  const std::string& name() const { return name_; }
  bool has(const std::string& key) const { return values_.count(key) > 0; }

  bool get_bool(const std::string& key, bool fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::string get_string(const std::string& key, std::string fallback) const;
  // Required variants throw ConfigError when the key is absent.
  std::int64_t require_int(const std::string& key) const;
  double require_double(const std::string& key) const;
  std::string require_string(const std::string& key) const;
  std::vector<std::int64_t> get_int_array(const std::string& key) const;
  std::vector<double> get_double_array(const std::string& key) const;
  std::vector<std::string> get_string_array(const std::string& key) const;

  // Throws ConfigError naming any key that was never read.
  void finish() const;

 private:
  friend class Table;
  const Value* find(const std::string& key) const;
  [[noreturn]] void fail(const std::string& key, const std::string& why) const;

  std::string name_;
  std::string origin_;
  std::map<std::string, Value> values_;
  mutable std::set<std::string> consumed_;
};

// A parsed config file: named sections plus a root section for keys that
// appear before any [section] header.
class Table {
 public:
  static Table parse(const std::string& text, const std::string& origin);
  static Table parse_file(const std::string& path);

  bool has_section(const std::string& name) const;
  // Missing sections come back empty, so defaults apply uniformly.
  const Section& section(const std::string& name) const;
  std::vector<std::string> section_names() const;

  // finish() on every section and reject sections that were never requested.
  void finish() const;

 private:
  std::string origin_;
  std::map<std::string, Section> sections_;
  mutable std::set<std::string> requested_;
  mutable std::map<std::string, Section> empty_;
};

GiConfig gi_config_from(const Section& s);
EisConfig eis_config_from(const Section& s);

}  // namespace eggp::config
