#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "undistort/convex_solver.h"
#include "undistort/gcs_lite.h"
#include "undistort/objectives.h"
#include "undistort/polytope.h"

namespace undistort {

struct PGDConfig {
  int max_iters{70};
  int window{5};
  double rel_tol{0.005};
  double armijo_c{1e-4};
  double backtrack_factor{0.5};
  /// Upper bound on the step tried at every iteration; 1 / (1 + |g0|) when
  /// unset.
  std::optional<double> initial_step;
  int max_backtracks{30};
  double feas_tol{kDefaultFeasibilityTol};

  /// Throws std::invalid_argument on out-of-range values.
  void Validate() const;
};

enum class Termination { kConverged, kMaxIters, kLineSearchStall };
std::string to_string(Termination termination);

struct PGDResult {
  Eigen::VectorXd x_best;
  /// cost_trace[0] is the cost of the (projected) starting point, then one
  /// entry per accepted iterate.
  std::vector<double> cost_trace;
  int iterations{0};
  Termination termination{Termination::kMaxIters};
  int qp_projections{0};
  int affine_only_projections{0};
  double wall_time{0.0};
};

/// Moving-average stopping rule over a cost trace.
///
/// avg_t is the mean of the last `window` costs. The rule fires once the
/// trace holds window + 1 entries and
///   |avg_t - avg_{t-1}| / max(|avg_{t-1}|, 1e-12) < rel_tol.
class ConvergenceMonitor {
 public:
  ConvergenceMonitor(int window, double rel_tol);
  /// Appends a cost; returns true when the rule fires.
  bool Push(double cost);
  const std::vector<double>& trace() const { return trace_; }

 private:
  double Average(std::size_t end) const;

  int window_;
  double rel_tol_;
  std::vector<double> trace_;
};

struct ProjectionResult {
  Eigen::VectorXd point;
  bool used_qp;
};

/// Affine pre-projection; when inequalities remain violated beyond feas_tol
/// the original point is projected onto the whole polytope by a QP.
ProjectionResult projection(const StackedFeasibleSet& feasible,
                            const AffineSubspace& hull,
                            const Eigen::VectorXd& x, double feas_tol);

/// The same operation with the QP factorization cached across calls.
class FeasibleProjector {
 public:
  FeasibleProjector(const StackedFeasibleSet& feasible, AffineSubspace hull,
                    double feas_tol);
  ProjectionResult operator()(const Eigen::VectorXd& x);

 private:
  const Polytope& polytope_;
  AffineSubspace hull_;
  double feas_tol_;
  std::unique_ptr<PolytopeProjector> qp_;
};

/// Projected gradient descent with projected backtracking.
///
/// A step s is accepted when the projected candidate x+ satisfies
///   f(x+) <= f(x) - armijo_c * g'(x - x+),
/// which reduces to f(x) - armijo_c * s |g|^2 when the projection is
/// inactive. The best feasible iterate is returned.
PGDResult pgd_solve(const Objective& objective,
                    const StackedFeasibleSet& feasible,
                    const AffineSubspace& hull, const Eigen::VectorXd& x0,
                    const PGDConfig& config = {});

}  // namespace undistort
