#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace repdyn {

using ConfigValue = std::variant<bool, std::int64_t, double, std::string, std::vector<double>>;
using ConfigRecord = std::vector<std::pair<std::string, ConfigValue>>;

/// key=value overrides as given on the command line.
using Overrides = std::map<std::string, std::string>;

/// A tunable field of an experiment config, bound by pointer so the same
/// list serves override parsing and the config record.
struct Param {
  std::string key;
  std::variant<bool*, int*, std::uint64_t*, double*, std::string*, std::vector<double>*> target;
};

/// Applies overrides to the bound fields. Throws ConfigurationError on
/// unknown keys or unparsable values. Lists are comma separated.
void apply_overrides(const std::vector<Param>& params, const Overrides& overrides);

ConfigRecord make_record(const std::vector<Param>& params);

struct Check {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  std::string comparator;  // one of <, <=, >, >=, ==
  double threshold = 0.0;
  std::string table;  // the table the measurement is derived from
};

/// True iff `measured comparator threshold`; NaN never passes.
bool compare(double measured, const std::string& comparator, double threshold);

struct ReportBundle {
  std::string name;
  ConfigRecord config;
  std::vector<std::pair<std::string, std::string>> tables;   // name -> CSV
  std::vector<std::pair<std::string, std::string>> figures;  // name -> SVG
  std::vector<Check> checks;

  const Check& add_check(std::string check_name, double measured, std::string comparator, double threshold,
                         std::string table_name);
  void add_table(std::string table_name, std::string csv) { tables.emplace_back(std::move(table_name), std::move(csv)); }
  void add_figure(std::string figure_name, std::string svg) {
    figures.emplace_back(std::move(figure_name), std::move(svg));
  }
  const std::string* table(const std::string& table_name) const;
  bool all_passed() const;
};

std::string config_to_json(const ReportBundle& bundle);
std::string checks_to_json(const ReportBundle& bundle);

/// Writes config.json, tables/<name>.csv, figures/<name>.svg and checks.json
/// under `dir` (created if absent). Each file is written to a temporary name
/// and renamed into place. Throws ConfigurationError if a check refers to a
/// missing table.
void write_bundle(const ReportBundle& bundle, const std::filesystem::path& dir);

/// Writes `content` to `path` via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace repdyn
