#include "undistort/report.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace undistort {

namespace {

std::string Quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

void WriteFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot write");
  out << text;
  if (!out) throw std::runtime_error(path + ": write failed");
}

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

// Vertices of a bounded 2-D polytope in counterclockwise order.
std::vector<Eigen::Vector2d> PolygonVertices(const Polytope& P) {
  std::vector<Eigen::Vector2d> pts;
  const int m = P.num_inequalities();
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      Eigen::Matrix2d M;
      M << P.A().row(i), P.A().row(j);
      if (std::abs(M.determinant()) < 1e-12) continue;
      const Eigen::Vector2d v = M.inverse() * Eigen::Vector2d(P.b()[i], P.b()[j]);
      if (contains(P, v, 1e-9)) pts.push_back(v);
    }
  }
  if (pts.empty()) return pts;
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  std::sort(pts.begin(), pts.end(), [&](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return std::atan2(a.y() - c.y(), a.x() - c.x()) < std::atan2(b.y() - c.y(), b.x() - c.x());
  });
  return pts;
}

}  // namespace

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> columns = {
      "pair",           "status",           "num_sets",         "surrogate_cost",
      "initial_objective", "refined_objective", "length_before", "length_after",
      "duration_before", "duration_after",  "imbalance_before", "imbalance_after",
      "rel_error_before", "rel_error_after", "pgd_iterations",  "termination",
      "qp_projections", "affine_projections", "feasible",       "error"};
  return columns;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

double column_value(const PairRow& row, const std::string& column) {
  if (column == "pair") return row.pair;
  if (column == "num_sets") return row.num_sets;
  if (column == "surrogate_cost") return row.surrogate_cost;
  if (column == "initial_objective") return row.initial_objective;
  if (column == "refined_objective") return row.refined_objective;
  if (column == "length_before") return row.length_before;
  if (column == "length_after") return row.length_after;
  if (column == "duration_before") return row.duration_before;
  if (column == "duration_after") return row.duration_after;
  if (column == "imbalance_before") return row.imbalance_before;
  if (column == "imbalance_after") return row.imbalance_after;
  if (column == "rel_error_before") return row.rel_error_before;
  if (column == "rel_error_after") return row.rel_error_after;
  if (column == "pgd_iterations") return row.ok ? row.pgd_iterations : NAN;
  if (column == "qp_projections") return row.ok ? row.qp_projections : NAN;
  if (column == "affine_projections") return row.ok ? row.affine_projections : NAN;
  if (column == "feasible") return row.ok ? (row.feasible ? 1.0 : 0.0) : NAN;
  throw std::invalid_argument("unknown numeric column '" + column + "'");
}

std::string to_csv(const RunReport& report) {
  std::ostringstream out;
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  for (const PairRow& row : report.rows) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const std::string& c = cols[i];
      if (i) out << ",";
      if (c == "pair") {
        out << row.pair;
      } else if (c == "status") {
        out << (row.ok ? "ok" : "error");
      } else if (c == "termination") {
        out << (row.ok ? row.termination : "");
      } else if (c == "error") {
        out << Quote(row.error);
      } else if (c == "num_sets" || c == "pgd_iterations" || c == "qp_projections" ||
                 c == "affine_projections" || c == "feasible") {
        const double v = column_value(row, c);
        if (std::isnan(v)) out << "nan";
        else out << static_cast<long long>(v);
      } else {
        out << format_number(column_value(row, c));
      }
    }
    out << "\n";
  }
  return out.str();
}

std::string timing_csv(const RunReport& report) {
  std::ostringstream out;
  out << "pair,plan_s,refine_s,retime_s\n";
  for (const PairRow& row : report.rows) {
    out << row.pair << "," << format_number(row.timings.plan) << ","
        << format_number(row.timings.refine) << "," << format_number(row.timings.retime)
        << "\n";
  }
  return out.str();
}

void write_report(const RunReport& report, const std::string& path) {
  WriteFile(path, to_csv(report));
  WriteFile(path + ".timing.csv", timing_csv(report));
}

void write_histogram_svg(const std::vector<std::vector<double>>& series,
                         const std::vector<std::string>& labels, const std::string& title,
                         const std::string& path, int bins) {
  if (series.size() != labels.size()) {
    throw std::invalid_argument("write_histogram_svg: series and labels differ in length");
  }
  if (bins < 1) throw std::invalid_argument("write_histogram_svg: bins must be >= 1");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : series) {
    for (double v : s) {
      if (!std::isfinite(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
  if (hi - lo < 1e-12) hi = lo + 1.0;
  std::vector<std::vector<int>> counts(series.size(), std::vector<int>(bins, 0));
  int peak = 1;
  for (std::size_t s = 0; s < series.size(); ++s) {
    for (double v : series[s]) {
      if (!std::isfinite(v)) continue;
      const int b = std::min(bins - 1, static_cast<int>((v - lo) / (hi - lo) * bins));
      peak = std::max(peak, ++counts[s][b]);
    }
  }
  const double W = 640, H = 400, left = 50, right = 20, top = 40, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;
  const double bw = pw / bins / static_cast<double>(series.size());
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
      << Escape(title) << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    for (int b = 0; b < bins; ++b) {
      const double h = ph * counts[s][b] / peak;
      svg << "<rect x=\"" << left + (b * series.size() + s) * bw << "\" y=\""
          << top + ph - h << "\" width=\"" << bw << "\" height=\"" << h << "\" fill=\""
          << kPalette[s % 4] << "\"/>\n";
    }
    svg << "<text x=\"" << W - right - 150 << "\" y=\"" << top + 16 * (s + 1)
        << "\" font-size=\"12\" fill=\"" << kPalette[s % 4] << "\">" << Escape(labels[s])
        << "</text>\n";
  }
  svg << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw
      << "\" y2=\"" << top + ph << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << left << "\" y=\"" << H - 20 << "\" font-size=\"12\">"
      << format_number(lo) << "</text>\n"
      << "<text x=\"" << left + pw << "\" y=\"" << H - 20
      << "\" font-size=\"12\" text-anchor=\"end\">" << format_number(hi) << "</text>\n"
      << "<text x=\"8\" y=\"" << top + 10 << "\" font-size=\"12\">" << peak << "</text>\n"
      << "</svg>\n";
  WriteFile(path, svg.str());
}

void write_overlay_svg(const Scenario& scenario, const RunReport& report,
                       const std::string& path) {
  if (scenario.dim_q != 2) {
    throw std::invalid_argument("write_overlay_svg: needs a 2-D configuration space");
  }
  std::vector<std::vector<Eigen::Vector2d>> polys;
  Eigen::Vector2d lo = Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector2d hi = -lo;
  for (const Polytope& P : scenario.sets) {
    polys.push_back(PolygonVertices(P));
    for (const auto& v : polys.back()) {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
  }
  if (!lo.allFinite()) throw std::invalid_argument("write_overlay_svg: sets are unbounded");
  const double W = 600, H = 600, pad = 30;
  const double scale = std::min((W - 2 * pad) / (hi - lo).x(), (H - 2 * pad) / (hi - lo).y());
  const auto X = [&](const Eigen::VectorXd& p) { return pad + (p[0] - lo.x()) * scale; };
  const auto Y = [&](const Eigen::VectorXd& p) { return H - pad - (p[1] - lo.y()) * scale; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto& poly : polys) {
    svg << "<polygon fill=\"#dde8f4\" fill-opacity=\"0.6\" stroke=\"#6a8caf\" points=\"";
    for (const auto& v : poly) svg << X(v) << "," << Y(v) << " ";
    svg << "\"/>\n";
  }
  const auto polyline = [&](const CompositePath& path, const char* color, const char* dash) {
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\""
        << (dash[0] ? std::string(" stroke-dasharray=\"") + dash + "\"" : std::string())
        << " points=\"";
    for (const PathSample& s : sample_path(path, 30)) svg << X(s.point) << "," << Y(s.point) << " ";
    svg << "\"/>\n";
  };
  for (const PairRow& row : report.rows) {
    if (!row.ok) continue;
    polyline(*row.path_before, kPalette[0], "6,4");
    polyline(*row.path_after, kPalette[1], "");
  }
  svg << "<text x=\"" << pad << "\" y=\"20\" font-size=\"13\" fill=\"" << kPalette[0]
      << "\">before (dashed)</text>\n<text x=\"" << pad + 140 << "\" y=\"20\" font-size=\"13\" fill=\""
      << kPalette[1] << "\">after</text>\n</svg>\n";
  WriteFile(path, svg.str());
}

std::vector<std::string> write_plots(const Scenario& scenario, const RunReport& report,
                                     const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;
  const auto collect = [&](const std::string& column) {
    std::vector<double> v;
    for (const PairRow& row : report.rows) {
      if (row.ok) v.push_back(column_value(row, column));
    }
    return v;
  };
  const std::string base = dir + "/" + scenario.name;
  if (scenario.parametrization.id == "euler_xyz") {
    write_histogram_svg({collect("rel_error_before"), collect("rel_error_after")},
                        {"before refinement", "after refinement"},
                        "relative error vs SLERP", base + "_rel_error.svg");
    written.push_back(base + "_rel_error.svg");
  }
  if (scenario.imbalance) {
    write_histogram_svg({collect("imbalance_before"), collect("imbalance_after")},
                        {"before refinement", "after refinement"}, "imbalance",
                        base + "_imbalance.svg");
    written.push_back(base + "_imbalance.svg");
  }
  write_histogram_svg({collect("length_before"), collect("length_after")},
                      {"before refinement", "after refinement"}, "path length in C",
                      base + "_length.svg");
  written.push_back(base + "_length.svg");
  if (scenario.dim_q == 2) {
    write_overlay_svg(scenario, report, base + "_paths.svg");
    written.push_back(base + "_paths.svg");
  }
  return written;
}

}  // namespace undistort
