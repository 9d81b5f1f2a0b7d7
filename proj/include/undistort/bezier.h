#pragma once

#include <vector>

#include <Eigen/Dense>

namespace undistort {

/// Bezier curve segment; control points are the columns of a (n x d+1)
/// matrix, t runs over [0, 1].
class BezierSegment {
 public:
  explicit BezierSegment(Eigen::MatrixXd control_points);

  int degree() const { return static_cast<int>(control_points_.cols()) - 1; }
  int dimension() const { return static_cast<int>(control_points_.rows()); }
  const Eigen::MatrixXd& control_points() const { return control_points_; }

  /// de Casteljau evaluation. Throws for t outside [0, 1].
  Eigen::VectorXd eval(double t) const;

  /// Hodograph: degree d-1 segment with control points d (p_{j+1} - p_j).
  /// A degree-0 segment has no derivative segment and throws.
  BezierSegment derivative() const;

 private:
  Eigen::MatrixXd control_points_;
};

/// Bernstein basis values B_{j,d}(t), j = 0..d.
Eigen::VectorXd bernstein(int degree, double t);

/// Shape of the stacked decision vector: segment-major, then control point,
/// then coordinate.
struct ControlLayout {
  int num_segments{1};
  int degree{1};
  int dim{1};

  int points_per_segment() const { return degree + 1; }
  int size() const { return num_segments * (degree + 1) * dim; }
  int offset(int segment, int point) const {
    return (segment * (degree + 1) + point) * dim;
  }
  bool operator==(const ControlLayout&) const = default;
};

/// Composite Bezier path; consecutive segments are C0-continuous.
class CompositePath {
 public:
  explicit CompositePath(std::vector<BezierSegment> segments);

  /// Unpacks a stacked control-point vector.
  static CompositePath FromStacked(const ControlLayout& layout,
                                   const Eigen::VectorXd& x);

  const std::vector<BezierSegment>& segments() const { return segments_; }
  int num_segments() const { return static_cast<int>(segments_.size()); }
  int degree() const { return segments_.front().degree(); }
  int dimension() const { return segments_.front().dimension(); }

  ControlLayout layout() const;
  Eigen::VectorXd stacked() const;

  /// Replaces each segment by a degree-`degree` segment whose control points
  /// are evenly spaced along the chord. Only meaningful for degree-1 paths,
  /// where it preserves the traced curve.
  CompositePath ElevateLinear(int degree) const;

 private:
  std::vector<BezierSegment> segments_;
};

struct PathSample {
  int segment;
  double t;
  Eigen::VectorXd point;
};

/// k samples per segment at t = j / (k - 1); the junction shared by
/// consecutive segments appears once.
std::vector<PathSample> sample_path(const CompositePath& path, int k);

/// Sum of Euclidean distances between consecutive sample points.
double polyline_length(const std::vector<PathSample>& samples);

}  // namespace undistort
