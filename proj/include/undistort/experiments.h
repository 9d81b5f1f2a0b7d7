#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "undistort/bezier.h"
#include "undistort/gcs_lite.h"
#include "undistort/objectives.h"
#include "undistort/pgd.h"
#include "undistort/scenario.h"

namespace undistort {

/// Command-line overrides applied on top of a scenario.
struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<int> pairs;
  std::optional<int> max_iters;
  std::optional<int> k_samples;
};

struct PairTimings {
  double plan{0.0};
  double refine{0.0};
  double retime{0.0};
};

/// One start/goal pair. Metrics that do not apply are NaN.
struct PairRow {
  int pair{0};
  bool ok{false};
  std::string error;
  Eigen::VectorXd start;
  Eigen::VectorXd goal;
  int num_sets{0};
  double surrogate_cost{NAN};
  double initial_objective{NAN};
  double refined_objective{NAN};
  double length_before{NAN};
  double length_after{NAN};
  double duration_before{NAN};
  double duration_after{NAN};
  double imbalance_before{NAN};
  double imbalance_after{NAN};
  double rel_error_before{NAN};
  double rel_error_after{NAN};
  int pgd_iterations{0};
  std::string termination;
  int qp_projections{0};
  int affine_projections{0};
  bool feasible{false};
  PairTimings timings;
  std::optional<CompositePath> path_before;
  std::optional<CompositePath> path_after;
};

struct RunSummary {
  int rows{0};
  int errors{0};
  std::map<std::string, int> terminations;
  int infeasible{0};
  int objective_increases{0};
};

struct RunReport {
  std::string scenario;
  std::vector<PairRow> rows;
  RunSummary summary() const;
};

/// Everything needed to refine one pair; exposed for tests and oracles.
struct PairPlan {
  std::vector<int> set_indices;
  RestrictionProblem plan_problem;
  RestrictionResult restriction;
  RestrictionProblem refine_problem;
  StackedFeasibleSet feasible;
  AffineSubspace hull;
  /// Restriction solution in the refinement layout.
  Eigen::VectorXd x0;
};

/// Explicit pairs (truncated by options.pairs) or deterministic random pairs.
std::vector<StartGoal> resolve_pairs(const Scenario& scenario,
                                     const RunOptions& options = {});

PairPlan plan_pair(const Scenario& scenario, const SetGraph& graph,
                   const Eigen::VectorXd& start, const Eigen::VectorXd& goal);

/// The scenario's true objective on `layout`.
Objective build_objective(const Scenario& scenario,
                          const ParametrizationPtr& param,
                          const ControlLayout& layout, int k);

/// Length in C of the path sampled at k points per segment.
double cspace_length(const CompositePath& path, const Parametrization& param,
                     int k);

/// Points alpha(path(t)) sampled at k points per segment.
std::vector<Eigen::VectorXd> cspace_samples(const CompositePath& path,
                                            const Parametrization& param,
                                            int k);

/// (d_s - d_c) / (d_s + d_c) over polyline lengths of the coordinate groups;
/// 0 when nothing moves.
double imbalance(const std::vector<Eigen::VectorXd>& path_c,
                 const ImbalanceSplit& split);

/// (path_len - d*) / d* with d* the quaternion distance.
double relative_error_slerp(double path_len, const Eigen::Vector4d& q_start,
                            const Eigen::Vector4d& q_goal);

RunReport run_scenario(const Scenario& scenario, const RunOptions& options = {});

Scenario gen_so3_scenario(std::uint64_t seed, int pairs);

enum class RationalRegime { kNearLimit, kNearOrigin };
Scenario gen_rational_scenario(std::uint64_t seed,
                               RationalRegime regime = RationalRegime::kNearLimit);

Scenario gen_bimanual_scenario(std::uint64_t seed, int pairs = 20);

/// Number of random points per set checked for IK reachability.
inline constexpr int kBimanualValidationSamples = 10000;

/// Throws ScenarioError if alpha fails anywhere on `samples` uniform points
/// of the bounding box of each (box) set.
void validate_reachability(const Scenario& scenario, int samples,
                           std::uint64_t seed);

/// Deterministic uniform double in [0, 1) independent of the standard
/// library's distribution implementation.
class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed);
  double Next();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Next(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace undistort
