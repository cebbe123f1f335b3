#pragma once

// Check reports and their JSON/CSV forms.

#include "homharm/io.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace homharm {

struct CheckResult {
  std::string name;
  double measured_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::uint64_t seed = 0;
  double wall_time_ms = 0.0;
  std::vector<std::pair<std::string, double>> details;  // extra measurements, informational
  std::string error;                                      // set when the check threw
};

struct SuiteConfig {
  int bandwidth = 8;
  std::uint64_t seed = 42;
  int trials = 20;
  double oversample = 2.0;
  int threads = 1;
  bool timings = false;
  std::map<std::string, double> tolerance_overrides;
};

struct CheckReport {
  std::string suite;
  SuiteConfig config;
  std::vector<int> orders;
  std::vector<CheckResult> checks;

  bool all_passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
  std::size_t failed() const {
    std::size_t n = 0;
    for (const auto& c : checks) n += c.passed ? 0 : 1;
    return n;
  }
};

inline json to_json(const CheckReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) {
    json j{{"name", c.name},
           {"measured_error", c.measured_error},
           {"tolerance", c.tolerance},
           {"passed", c.passed},
           {"seed", c.seed},
           {"wall_time_ms", c.wall_time_ms}};
    if (!c.details.empty()) {
      json d = json::object();
      for (const auto& [k, v] : c.details) d[k] = v;
      j["details"] = std::move(d);
    }
    if (!c.error.empty()) j["error"] = c.error;
    checks.push_back(std::move(j));
  }
  json overrides = json::object();
  for (const auto& [k, v] : r.config.tolerance_overrides) overrides[k] = v;
  return {{"suite", r.suite},
          {"config",
           {{"bandwidth", r.config.bandwidth},
            {"seed", r.config.seed},
            {"trials", r.config.trials},
            {"oversample", r.config.oversample},
            {"threads", r.config.threads},
            {"orders", r.orders},
            {"tolerance_overrides", std::move(overrides)}}},
          {"summary",
           {{"total", r.checks.size()},
            {"passed", r.checks.size() - r.failed()},
            {"failed", r.failed()}}},
          {"checks", std::move(checks)}};
}

inline CheckReport report_from_json(const json& j) {
  CheckReport r;
  const json& suite = detail::member(j, "suite", "report");
  if (!suite.is_string()) throw FormatError("report: field 'suite' must be a string");
  r.suite = suite.get<std::string>();
  const json& cfg = detail::member(j, "config", "report");
  r.config.bandwidth = detail::get_int(cfg, "bandwidth", "report config");
  r.config.seed = detail::member(cfg, "seed", "report config").get<std::uint64_t>();
  r.config.trials = detail::get_int(cfg, "trials", "report config");
  r.config.oversample = detail::get_real(detail::member(cfg, "oversample", "report config"), "report config 'oversample'");
  r.config.threads = detail::get_int(cfg, "threads", "report config");
  r.orders = detail::member(cfg, "orders", "report config").get<std::vector<int>>();
  for (const auto& [k, v] : detail::member(cfg, "tolerance_overrides", "report config").items())
    r.config.tolerance_overrides[k] = v.get<double>();
  const json& checks = detail::member(j, "checks", "report");
  if (!checks.is_array()) throw FormatError("report: field 'checks' must be an array");
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const json& c = checks[i];
    const std::string w = "report 'checks[" + std::to_string(i) + "]'";
    CheckResult res;
    res.name = detail::member(c, "name", w).get<std::string>();
    const json& me = detail::member(c, "measured_error", w);
    res.measured_error = me.is_null() ? std::numeric_limits<double>::quiet_NaN() : me.get<double>();
    res.tolerance = detail::get_real(detail::member(c, "tolerance", w), w);
    res.passed = detail::member(c, "passed", w).get<bool>();
    res.seed = detail::member(c, "seed", w).get<std::uint64_t>();
    res.wall_time_ms = detail::get_real(detail::member(c, "wall_time_ms", w), w);
    if (c.contains("details"))
      for (const auto& [k, v] : c["details"].items())
        res.details.emplace_back(k, v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>());
    if (c.contains("error")) res.error = c["error"].get<std::string>();
    r.checks.push_back(std::move(res));
  }
  return r;
}

/// One header line plus one row per check.
inline std::string report_to_csv(const CheckReport& r) {
  std::string out = "suite,name,measured_error,tolerance,passed,seed,wall_time_ms\n";
  for (const auto& c : r.checks)
    out += r.suite + "," + c.name + "," + detail::format_double(c.measured_error) + "," +
           detail::format_double(c.tolerance) + "," + (c.passed ? "true" : "false") + "," +
           std::to_string(c.seed) + "," + detail::format_double(c.wall_time_ms) + "\n";
  return out;
}

inline std::string report_to_string(const CheckReport& r, const std::string& format) {
  if (format == "json") return to_json(r).dump(2) + "\n";
  if (format == "csv") return report_to_csv(r);
  throw std::invalid_argument("unknown report format '" + format + "' (expected json or csv)");
}

inline void emit_report(const CheckReport& r, const std::string& path, const std::string& format) {
  detail::write_text(path, report_to_string(r, format));
}

}  // namespace homharm
