#include "repdyn/report.hpp"

#include "repdyn/csv.hpp"
#include "repdyn/errors.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace repdyn {
namespace {

using Json = nlohmann::ordered_json;

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigurationError("override " + key + ": '" + text + "' is not a number");
  }
  return v;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& text) {
  // Accept integral values in scientific notation such as 1e4.
  const double v = parse_double(key, text);
  if (v != std::floor(v) || v < static_cast<double>(std::numeric_limits<Int>::lowest()) ||
      v > static_cast<double>(std::numeric_limits<Int>::max())) {
    throw ConfigurationError("override " + key + ": '" + text + "' is not an integer in range");
  }
  return static_cast<Int>(v);
}

Json value_to_json(const ConfigValue& v) {
  return std::visit(
      [](const auto& x) -> Json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, double>) {
          if (!std::isfinite(x)) return format_double(x);
        }
        return Json(x);
      },
      v);
}

Json check_to_json(const Check& c) {
  Json j;
  j["name"] = c.name;
  j["passed"] = c.passed;
  j["measured"] = std::isfinite(c.measured) ? Json(c.measured) : Json(format_double(c.measured));
  j["comparator"] = c.comparator;
  j["threshold"] = c.threshold;
  j["table"] = c.table;
  return j;
}

}  // namespace

void apply_overrides(const std::vector<Param>& params, const Overrides& overrides) {
  for (const auto& [key, text] : overrides) {
    const Param* param = nullptr;
    for (const auto& p : params)
      if (p.key == key) param = &p;
    if (!param) {
      std::string known;
      for (const auto& p : params) known += (known.empty() ? "" : ", ") + p.key;
      throw ConfigurationError("unknown override key '" + key + "' (known: " + known + ")");
    }
    std::visit(
        [&](auto* target) {
          using T = std::remove_pointer_t<decltype(target)>;
          if constexpr (std::is_same_v<T, bool>) {
            if (text == "true" || text == "1") *target = true;
            else if (text == "false" || text == "0") *target = false;
            else throw ConfigurationError("override " + key + ": expected true or false");
          } else if constexpr (std::is_same_v<T, int>) {
            *target = parse_int<int>(key, text);
          } else if constexpr (std::is_same_v<T, std::uint64_t>) {
            *target = parse_int<std::uint64_t>(key, text);
          } else if constexpr (std::is_same_v<T, double>) {
            *target = parse_double(key, text);
          } else if constexpr (std::is_same_v<T, std::string>) {
            *target = text;
          } else {
            std::vector<double> values;
            std::istringstream in(text);
            for (std::string item; std::getline(in, item, ',');) values.push_back(parse_double(key, item));
            if (values.empty()) throw ConfigurationError("override " + key + ": empty list");
            *target = std::move(values);
          }
        },
        param->target);
  }
}

ConfigRecord make_record(const std::vector<Param>& params) {
  ConfigRecord out;
  for (const auto& p : params) {
    std::visit(
        [&](auto* target) {
          using T = std::remove_pointer_t<decltype(target)>;
          if constexpr (std::is_same_v<T, int> || std::is_same_v<T, std::uint64_t>) {
            out.emplace_back(p.key, static_cast<std::int64_t>(*target));
          } else {
            out.emplace_back(p.key, *target);
          }
        },
        p.target);
  }
  return out;
}

bool compare(double measured, const std::string& comparator, double threshold) {
  if (std::isnan(measured)) return false;
  if (comparator == "<") return measured < threshold;
  if (comparator == "<=") return measured <= threshold;
  if (comparator == ">") return measured > threshold;
  if (comparator == ">=") return measured >= threshold;
  if (comparator == "==") return measured == threshold;
  throw ConfigurationError("unknown comparator '" + comparator + "'");
}

const Check& ReportBundle::add_check(std::string check_name, double measured, std::string comparator,
                                     double threshold, std::string table_name) {
  const bool passed = compare(measured, comparator, threshold);
  checks.push_back({std::move(check_name), passed, measured, std::move(comparator), threshold, std::move(table_name)});
  return checks.back();
}

const std::string* ReportBundle::table(const std::string& table_name) const {
  for (const auto& [n, csv] : tables)
    if (n == table_name) return &csv;
  return nullptr;
}

bool ReportBundle::all_passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

std::string config_to_json(const ReportBundle& bundle) {
  Json j;
  j["experiment"] = bundle.name;
  Json cfg = Json::object();
  for (const auto& [k, v] : bundle.config) cfg[k] = value_to_json(v);
  j["config"] = std::move(cfg);
  return j.dump(2) + "\n";
}

std::string checks_to_json(const ReportBundle& bundle) {
  Json j = Json::array();
  for (const auto& c : bundle.checks) j.push_back(check_to_json(c));
  return j.dump(2) + "\n";
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigurationError("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw ConfigurationError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_bundle(const ReportBundle& bundle, const std::filesystem::path& dir) {
  for (const auto& c : bundle.checks) {
    if (!bundle.table(c.table)) {
      throw ConfigurationError("check '" + c.name + "' refers to missing table '" + c.table + "'");
    }
  }
  std::filesystem::create_directories(dir / "tables");
  std::filesystem::create_directories(dir / "figures");
  write_file_atomic(dir / "config.json", config_to_json(bundle));
  for (const auto& [name, csv] : bundle.tables) write_file_atomic(dir / "tables" / (name + ".csv"), csv);
  for (const auto& [name, svg] : bundle.figures) write_file_atomic(dir / "figures" / (name + ".svg"), svg);
  write_file_atomic(dir / "checks.json", checks_to_json(bundle));
}

}  // namespace repdyn
