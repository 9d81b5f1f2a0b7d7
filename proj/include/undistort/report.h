#pragma once

#include <string>
#include <vector>

#include "undistort/experiments.h"
#include "undistort/scenario.h"

namespace undistort {

/// Column order of the main report.
const std::vector<std::string>& csv_columns();

/// 9 significant digits; "nan" for missing values.
std::string format_number(double value);

/// Numeric value of a report column for one row (NaN when not applicable).
/// Throws std::invalid_argument for unknown or non-numeric columns.
double column_value(const PairRow& row, const std::string& column);

/// Deterministic report: header plus one row per pair. Wall-clock timings
/// are kept out of it (see timing_csv).
std::string to_csv(const RunReport& report);

/// pair, plan_s, refine_s, retime_s.
std::string timing_csv(const RunReport& report);

/// Writes `path` and `path` + ".timing.csv".
void write_report(const RunReport& report, const std::string& path);

void write_histogram_svg(const std::vector<std::vector<double>>& series,
                         const std::vector<std::string>& labels,
                         const std::string& title, const std::string& path,
                         int bins = 20);

/// Sets plus before/after paths; only for 2-D configuration spaces.
void write_overlay_svg(const Scenario& scenario, const RunReport& report,
                       const std::string& path);

/// Writes whichever plots apply to the scenario into `dir`; returns the
/// file names.
std::vector<std::string> write_plots(const Scenario& scenario,
                                     const RunReport& report,
                                     const std::string& dir);

}  // namespace undistort
