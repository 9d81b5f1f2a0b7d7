#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "undistort/bezier.h"
#include "undistort/convex_solver.h"
#include "undistort/polytope.h"

namespace undistort {

/// Undirected graph over convex sets; an edge joins two sets whose
/// intersection is nonempty.
struct SetGraph {
  std::vector<Polytope> vertices;
  std::vector<Eigen::VectorXd> centers;
  std::vector<std::pair<int, int>> edges;  // i < j
  std::vector<double> edge_weights;

  std::vector<std::vector<std::pair<int, double>>> Adjacency() const;
};

/// Tolerance used to decide whether two sets intersect.
inline constexpr double kEdgeTol = 1e-7;

SetGraph build_graph(const std::vector<Polytope>& sets);

/// Minimum-weight vertex sequence from a set containing `start` to a set
/// containing `goal`. Throws if either point is uncovered or no path exists.
std::vector<int> discrete_path(const SetGraph& graph,
                               const Eigen::VectorXd& start,
                               const Eigen::VectorXd& goal);

struct RestrictionProblem {
  std::vector<Polytope> sequence;
  Eigen::VectorXd start;
  Eigen::VectorXd goal;
  int degree{3};
  int continuity_order{1};
};

/// The feasible set of all control points of a fixed set sequence.
struct StackedFeasibleSet {
  Polytope polytope;
  ControlLayout layout;
};

StackedFeasibleSet stack_feasible(const RestrictionProblem& problem);

/// Hessian of sum ||x_{ij} - x_{i,j-1}||^2 over the stacked vector, so the
/// surrogate equals 0.5 x' H x.
Eigen::MatrixXd surrogate_hessian(const ControlLayout& layout);

struct RestrictionResult {
  CompositePath path;
  double cost;
  SolveReport report;
};

/// Minimizes the control-point surrogate over the stacked feasible set.
RestrictionResult convex_restriction(const RestrictionProblem& problem);

/// Control points evenly spaced on the start-goal chord, per segment.
Eigen::VectorXd straight_line_initialization(const RestrictionProblem& problem);

}  // namespace undistort
