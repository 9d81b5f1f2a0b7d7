#include "undistort/bezier.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace undistort {

BezierSegment::BezierSegment(Eigen::MatrixXd control_points)
    : control_points_(std::move(control_points)) {
  if (control_points_.cols() < 1 || control_points_.rows() < 1) {
    throw std::invalid_argument("BezierSegment: no control points");
  }
}

Eigen::VectorXd BezierSegment::eval(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::out_of_range("BezierSegment::eval: t = " + std::to_string(t) +
                            " outside [0, 1]");
  }
  Eigen::MatrixXd work = control_points_;
  for (int level = degree(); level > 0; --level) {
    for (int j = 0; j < level; ++j) {
      work.col(j) = (1.0 - t) * work.col(j) + t * work.col(j + 1);
    }
  }
  return work.col(0);
}

BezierSegment BezierSegment::derivative() const {
  const int d = degree();
  if (d < 1) {
    throw std::invalid_argument("BezierSegment::derivative: degree 0");
  }
  Eigen::MatrixXd hodograph(dimension(), d);
  for (int j = 0; j < d; ++j) {
    hodograph.col(j) =
        d * (control_points_.col(j + 1) - control_points_.col(j));
  }
  return BezierSegment(std::move(hodograph));
}

Eigen::VectorXd bernstein(int degree, double t) {
  Eigen::VectorXd basis = Eigen::VectorXd::Zero(degree + 1);
  basis[0] = 1.0;
  for (int level = 1; level <= degree; ++level) {
    for (int j = level; j >= 0; --j) {
      const double left = j > 0 ? basis[j - 1] : 0.0;
      basis[j] = (1.0 - t) * basis[j] + t * left;
    }
  }
  return basis;
}

CompositePath::CompositePath(std::vector<BezierSegment> segments)
    : segments_(std::move(segments)) {
  if (segments_.empty()) {
    throw std::invalid_argument("CompositePath: no segments");
  }
  const int d = segments_.front().degree();
  const int n = segments_.front().dimension();
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (segments_[i].degree() != d || segments_[i].dimension() != n) {
      throw std::invalid_argument(
          "CompositePath: segments differ in degree or dimension");
    }
    if (i + 1 < segments_.size()) {
      const double gap = (segments_[i].control_points().col(d) -
                          segments_[i + 1].control_points().col(0))
                             .cwiseAbs()
                             .maxCoeff();
      if (gap > 1e-8) {
        throw std::invalid_argument(
            "CompositePath: segments " + std::to_string(i) + " and " +
            std::to_string(i + 1) + " are not C0-continuous");
      }
    }
  }
}

CompositePath CompositePath::FromStacked(const ControlLayout& layout,
                                         const Eigen::VectorXd& x) {
  if (x.size() != layout.size()) {
    throw std::invalid_argument("CompositePath::FromStacked: size mismatch");
  }
  std::vector<BezierSegment> segments;
  segments.reserve(layout.num_segments);
  for (int s = 0; s < layout.num_segments; ++s) {
    Eigen::MatrixXd points(layout.dim, layout.points_per_segment());
    for (int j = 0; j < layout.points_per_segment(); ++j) {
      points.col(j) = x.segment(layout.offset(s, j), layout.dim);
    }
    segments.emplace_back(std::move(points));
  }
  return CompositePath(std::move(segments));
}

ControlLayout CompositePath::layout() const {
  return {num_segments(), degree(), dimension()};
}

Eigen::VectorXd CompositePath::stacked() const {
  const ControlLayout l = layout();
  Eigen::VectorXd x(l.size());
  for (int s = 0; s < l.num_segments; ++s) {
    for (int j = 0; j < l.points_per_segment(); ++j) {
      x.segment(l.offset(s, j), l.dim) = segments_[s].control_points().col(j);
    }
  }
  return x;
}

CompositePath CompositePath::ElevateLinear(int degree) const {
  if (degree < 1) {
    throw std::invalid_argument("ElevateLinear: degree must be >= 1");
  }
  std::vector<BezierSegment> out;
  for (const auto& seg : segments_) {
    const Eigen::VectorXd p0 = seg.control_points().col(0);
    const Eigen::VectorXd p1 = seg.control_points().col(seg.degree());
    Eigen::MatrixXd points(dimension(), degree + 1);
    for (int j = 0; j <= degree; ++j) {
      const double s = static_cast<double>(j) / degree;
      points.col(j) = (1.0 - s) * p0 + s * p1;
    }
    out.emplace_back(std::move(points));
  }
  return CompositePath(std::move(out));
}

std::vector<PathSample> sample_path(const CompositePath& path, int k) {
  if (k < 2) {
    throw std::invalid_argument("sample_path: need k >= 2 samples");
  }
  std::vector<PathSample> samples;
  samples.reserve(path.num_segments() * (k - 1) + 1);
  for (int s = 0; s < path.num_segments(); ++s) {
    for (int j = (s == 0 ? 0 : 1); j < k; ++j) {
      const double t = static_cast<double>(j) / (k - 1);
      samples.push_back({s, t, path.segments()[s].eval(t)});
    }
  }
  return samples;
}

double polyline_length(const std::vector<PathSample>& samples) {
  double length = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    length += (samples[i].point - samples[i - 1].point).norm();
  }
  return length;
}

}  // namespace undistort
