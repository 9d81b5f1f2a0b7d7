#include "undistort/fixtures.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "undistort/report.h"
#include "undistort/scenario.h"

namespace undistort {

namespace {

using nlohmann::json;

json ReadJson(const std::string& path) {
  if (!std::filesystem::exists(path)) throw FixtureError(path + ": missing");
  std::ifstream in(path);
  if (!in) throw FixtureError(path + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FixtureError(path + ": " + e.what());
  }
}

std::vector<double> Column(const RunReport& report, const std::string& column) {
  std::vector<double> v;
  for (const PairRow& row : report.rows) {
    if (!row.ok) continue;
    const double x = column_value(row, column);
    if (!std::isnan(x)) v.push_back(x);
  }
  return v;
}

double Mean(const std::vector<double>& v, bool absolute) {
  if (v.empty()) return NAN;
  double s = 0.0;
  for (double x : v) s += absolute ? std::abs(x) : x;
  return s / static_cast<double>(v.size());
}

std::optional<double> OptionalNumber(const json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  if (!j[key].is_number()) throw FixtureError(std::string("'") + key + "' must be a number");
  return j[key].get<double>();
}

}  // namespace

std::string MetricCheck::describe() const {
  std::ostringstream out;
  out << metric;
  if (pair) out << "[pair " << *pair << "]";
  out << " = " << format_number(actual) << " (expected";
  if (value) out << " " << format_number(*value) << " +- " << format_number(tol.value_or(0.0));
  if (min) out << " >= " << format_number(*min);
  if (max) out << " <= " << format_number(*max);
  out << ") " << (skipped ? "skipped" : passed ? "ok" : "FAIL");
  return out.str();
}

bool FixtureReport::passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const MetricCheck& c) { return c.skipped || c.passed; });
}

std::vector<std::string> FixtureReport::failures() const {
  std::vector<std::string> names;
  for (const MetricCheck& c : checks) {
    if (c.skipped || c.passed) continue;
    names.push_back(c.pair ? c.metric + "[pair " + std::to_string(*c.pair) + "]" : c.metric);
  }
  return names;
}

double evaluate_metric(const RunReport& report, const std::string& metric,
                       std::optional<int> pair) {
  const RunSummary s = report.summary();
  if (metric == "rows") return s.rows;
  if (metric == "errors") return s.errors;
  if (metric == "infeasible") return s.infeasible;
  if (metric == "objective_increases") return s.objective_increases;

  const auto colon = metric.find(':');
  if (colon == std::string::npos) {
    if (!pair) throw FixtureError("metric '" + metric + "' needs a pair index");
    auto it = std::find_if(report.rows.begin(), report.rows.end(),
                           [&](const PairRow& r) { return r.pair == *pair; });
    if (it == report.rows.end()) {
      throw FixtureError("metric '" + metric + "': no pair " + std::to_string(*pair));
    }
    try {
      return column_value(*it, metric);
    } catch (const std::invalid_argument& e) {
      throw FixtureError(e.what());
    }
  }

  const std::string op = metric.substr(0, colon);
  const std::string arg = metric.substr(colon + 1);
  if (op == "termination") {
    auto it = s.terminations.find(arg);
    return it == s.terminations.end() ? 0.0 : it->second;
  }
  try {
    if (op == "mean") return Mean(Column(report, arg), false);
    if (op == "mean_abs") return Mean(Column(report, arg), true);
    if (op == "max" || op == "min") {
      const auto v = Column(report, arg);
      if (v.empty()) return NAN;
      return op == "max" ? *std::max_element(v.begin(), v.end())
                         : *std::min_element(v.begin(), v.end());
    }
    if (op == "reduction" || op == "abs_reduction") {
      const bool a = op == "abs_reduction";
      const double before = Mean(Column(report, arg + "_before"), a);
      const double after = Mean(Column(report, arg + "_after"), a);
      return 1.0 - after / before;
    }
  } catch (const std::invalid_argument& e) {
    throw FixtureError("metric '" + metric + "': " + e.what());
  }
  throw FixtureError("unknown metric '" + metric + "'");
}

std::vector<MetricCheck> load_expected(const std::string& path) {
  const json doc = ReadJson(path);
  std::vector<MetricCheck> checks;
  try {
    if (doc.value("schema_version", 0) != 1) throw FixtureError("schema_version must be 1");
    if (!doc.contains("checks") || !doc["checks"].is_array() || doc["checks"].empty()) {
      throw FixtureError("'checks' must be a nonempty array");
    }
    for (const json& j : doc["checks"]) {
      MetricCheck c;
      c.metric = j.at("metric").get<std::string>();
      if (j.contains("pair")) c.pair = j["pair"].get<int>();
      c.value = OptionalNumber(j, "value");
      c.tol = OptionalNumber(j, "tol");
      c.min = OptionalNumber(j, "min");
      c.max = OptionalNumber(j, "max");
      if (!c.value && !c.min && !c.max) {
        throw FixtureError("check '" + c.metric + "' has no value or bounds");
      }
      if (c.value && !c.tol) throw FixtureError("check '" + c.metric + "' has a value but no tol");
      const json& prov = j.at("provenance");
      c.provenance = prov.at("kind").get<std::string>();
      if (c.provenance != "derived" && c.provenance != "trivial") {
        throw FixtureError("check '" + c.metric + "': provenance kind must be derived or trivial");
      }
      c.oracle = prov.at("oracle").get<std::string>();
      c.seed_specific = j.value("seed_specific", false);
      checks.push_back(std::move(c));
    }
  } catch (const json::exception& e) {
    throw FixtureError(path + ": " + e.what());
  } catch (const FixtureError& e) {
    throw FixtureError(path + ": " + e.what());
  }
  return checks;
}

FixtureReport verify_fixture(const std::string& dir, const VerifyOptions& options) {
  const std::string scenario_path = dir + "/scenario.json";
  const std::string expected_path = dir + "/expected.json";
  if (!std::filesystem::exists(scenario_path)) throw FixtureError(scenario_path + ": missing");
  FixtureReport report;
  report.checks = load_expected(expected_path);
  const json expected = ReadJson(expected_path);
  report.fixture = expected.value("fixture", std::filesystem::path(dir).filename().string());
  report.description = expected.value("description", std::string());

  const Scenario scenario = load_scenario(scenario_path);
  RunOptions run_options;
  run_options.seed = options.seed;
  report.run = run_scenario(scenario, run_options);

  const bool foreign_seed = options.seed && scenario.random_pairs &&
                            *options.seed != scenario.random_pairs->seed;
  for (MetricCheck& c : report.checks) {
    if (foreign_seed && c.seed_specific) {
      c.skipped = true;
      continue;
    }
    c.actual = evaluate_metric(report.run, c.metric, c.pair);
    bool ok = !std::isnan(c.actual);
    if (c.value) ok = ok && std::abs(c.actual - *c.value) <= *c.tol;
    if (c.min) ok = ok && c.actual >= *c.min;
    if (c.max) ok = ok && c.actual <= *c.max;
    c.passed = ok;
  }
  return report;
}

}  // namespace undistort
