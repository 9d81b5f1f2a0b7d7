#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "undistort/experiments.h"

namespace undistort {

/// Missing or malformed fixture files.
class FixtureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One entry of expected.json after evaluation.
struct MetricCheck {
  std::string metric;
  std::optional<int> pair;
  std::optional<double> value;
  std::optional<double> tol;
  std::optional<double> min;
  std::optional<double> max;
  /// "derived" or "trivial", with the oracle that produced the value.
  std::string provenance;
  std::string oracle;
  bool seed_specific{false};
  double actual{NAN};
  bool skipped{false};
  bool passed{false};

  /// e.g. "mean:rel_error_after = 0.0767 (expected 0.0767 +- 1e-06) ok".
  std::string describe() const;
};

struct FixtureReport {
  std::string fixture;
  std::string description;
  std::vector<MetricCheck> checks;
  RunReport run;

  bool passed() const;
  /// Names of failing metrics.
  std::vector<std::string> failures() const;
};

struct VerifyOptions {
  /// Overrides the random-pair seed. Checks marked seed_specific are
  /// skipped when this differs from the scenario's own seed.
  std::optional<std::uint64_t> seed;
};

/// Metric grammar:
///   <column>            with pair set: that row's value
///   mean:<column>       mean over ok rows (NaN entries ignored)
///   mean_abs:<column>
///   max:<column>, min:<column>
///   reduction:<base>      1 - mean(<base>_after) / mean(<base>_before)
///   abs_reduction:<base>  same with absolute values
///   rows, errors, infeasible, objective_increases, termination:<name>
double evaluate_metric(const RunReport& report, const std::string& metric,
                       std::optional<int> pair = std::nullopt);

/// Runs <dir>/scenario.json and compares against <dir>/expected.json.
FixtureReport verify_fixture(const std::string& dir,
                             const VerifyOptions& options = {});

/// Parsed check list of an expected.json file (values not evaluated).
std::vector<MetricCheck> load_expected(const std::string& path);

}  // namespace undistort
