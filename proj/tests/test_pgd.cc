#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "undistort/pgd.h"

namespace undistort {
namespace {

StackedFeasibleSet BoxSet(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  return {Polytope::Box(lo, hi), ControlLayout{1, 0, static_cast<int>(lo.size())}};
}

Objective Quadratic(const Eigen::MatrixXd& Q, const Eigen::VectorXd& c) {
  return Objective(
      "quadratic", {},
      [Q, c](const Eigen::VectorXd& x) { return 0.5 * x.dot(Q * x) + c.dot(x); },
      [Q, c](const Eigen::VectorXd& x) { return Eigen::VectorXd(Q * x + c); });
}

TEST(ConvergenceMonitorTest, NeedsWindowPlusOneEntries) {
  ConvergenceMonitor m(5, 0.005);
  for (int i = 0; i < 5; ++i) EXPECT_FALSE(m.Push(1.0)) << i;
  EXPECT_TRUE(m.Push(1.0));
}

TEST(ConvergenceMonitorTest, ThresholdIsStrict) {
  // Window 1 reduces the rule to the relative change of consecutive costs.
  ConvergenceMonitor below(1, 0.005);
  below.Push(100.0);
  EXPECT_TRUE(below.Push(99.6));
  ConvergenceMonitor above(1, 0.005);
  above.Push(100.0);
  EXPECT_FALSE(above.Push(99.4));
}

TEST(ConvergenceMonitorTest, MovingAverageOfFive) {
  // Costs 10, 9, ..., then flat: averages over 5 entries.
  ConvergenceMonitor m(5, 0.005);
  const std::vector<double> trace = {10, 9, 8, 7, 6, 5, 5, 5, 5, 5, 5};
  std::vector<bool> fired;
  for (double c : trace) fired.push_back(m.Push(c));
  // avg windows: [10..6]=8, [9..5]=7, [8,7,6,5,5]=6.2, [7,6,5,5,5]=5.6,
  // [6,5,5,5,5]=5.2, [5]*5=5 (rel 0.038), then 5 vs 5 (rel 0).
  const std::vector<bool> expected = {false, false, false, false, false, false,
                                      false, false, false, false, true};
  EXPECT_EQ(fired, expected);
}

TEST(ConvergenceMonitorTest, AlternatingNeverConverges) {
  // Odd window: averages alternate between 1.4 and 1.6.
  ConvergenceMonitor m(5, 0.005);
  for (int i = 0; i < 100; ++i) EXPECT_FALSE(m.Push(i % 2 == 0 ? 1.0 : 2.0));
}

TEST(ProjectionTest, Examples) {
  Eigen::MatrixXd E(1, 2);
  E << 1, -1;
  const Polytope P(Polytope::Box(Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 1)).A(),
                   Eigen::VectorXd::Ones(4), E, Eigen::VectorXd::Zero(1));
  const StackedFeasibleSet F{P, ControlLayout{1, 0, 2}};
  const AffineSubspace hull = affine_hull(P);

  const ProjectionResult inside = projection(F, hull, Eigen::Vector2d(0.3, 0.3), 1e-6);
  EXPECT_FALSE(inside.used_qp);
  EXPECT_LE((inside.point - Eigen::Vector2d(0.3, 0.3)).norm(), 1e-12);

  const ProjectionResult eq_only = projection(F, hull, Eigen::Vector2d(0.2, 0.4), 1e-6);
  EXPECT_FALSE(eq_only.used_qp);
  EXPECT_LE((eq_only.point - Eigen::Vector2d(0.3, 0.3)).norm(), 1e-12);

  const ProjectionResult box = projection(F, hull, Eigen::Vector2d(3, 1), 1e-6);
  EXPECT_TRUE(box.used_qp);
  EXPECT_LE((box.point - Eigen::Vector2d(1, 1)).norm(), 1e-6);
}

TEST(PgdTest, BoundaryStationaryPointConverges) {
  const StackedFeasibleSet F = BoxSet(Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 1));
  const Objective f = Quadratic(2 * Eigen::Matrix2d::Identity(), Eigen::Vector2d(-4, 0));
  const Eigen::Vector2d x0(1, 0);
  const PGDResult r = pgd_solve(f, F, affine_hull(F.polytope), x0);
  EXPECT_EQ(r.termination, Termination::kConverged);
  EXPECT_LE(r.iterations, 6);
  EXPECT_LE((r.x_best - x0).norm(), 1e-8);
}

TEST(PgdTest, UnconstrainedQuadraticIsMonotone) {
  const StackedFeasibleSet F =
      BoxSet(Eigen::Vector3d::Constant(-1e6), Eigen::Vector3d::Constant(1e6));
  Eigen::Matrix3d Q;
  Q << 3, 1, 0, 1, 2, 0, 0, 0, 1;
  const Objective f = Quadratic(Q, Eigen::Vector3d(1, -2, 0.5));
  const PGDResult r = pgd_solve(f, F, affine_hull(F.polytope), Eigen::Vector3d(5, 5, 5));
  for (std::size_t i = 1; i < r.cost_trace.size(); ++i) {
    EXPECT_LE(r.cost_trace[i], r.cost_trace[i - 1]);
  }
  EXPECT_EQ(r.qp_projections, 0);
  EXPECT_LE(f.value(r.x_best), r.cost_trace[0]);
}

TEST(PgdTest, OscillatingObjectiveHitsIterationCap) {
  // f = x2^2 - x1 with unit steps: x2 flips sign every iteration while the
  // cost falls by one, so the moving average never settles.
  const StackedFeasibleSet F =
      BoxSet(Eigen::Vector2d::Constant(-1e6), Eigen::Vector2d::Constant(1e6));
  const Objective f(
      "zigzag", {},
      [](const Eigen::VectorXd& x) { return x[1] * x[1] - x[0]; },
      [](const Eigen::VectorXd& x) { return Eigen::Vector2d(-1.0, 2.0 * x[1]).eval(); });
  PGDConfig cfg;
  cfg.initial_step = 1.0;
  const PGDResult r = pgd_solve(f, F, affine_hull(F.polytope), Eigen::Vector2d(0, 1), cfg);
  EXPECT_EQ(r.termination, Termination::kMaxIters);
  EXPECT_EQ(r.iterations, 70);
  EXPECT_EQ(r.cost_trace.size(), 71u);
}

TEST(PgdTest, SurrogateMatchesConvexRestriction) {
  RestrictionProblem problem{
      {Polytope::Box(Eigen::Vector2d(0, 0), Eigen::Vector2d(3, 1)),
       Polytope::Box(Eigen::Vector2d(2, 0), Eigen::Vector2d(3, 3))},
      Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(2.5, 2.5), 3, 1};
  const StackedFeasibleSet F = stack_feasible(problem);
  const RestrictionResult qp = convex_restriction(problem);
  const PGDResult r = pgd_solve(surrogate_length(F.layout), F, affine_hull(F.polytope),
                                straight_line_initialization(problem));
  const double cost = surrogate_length(F.layout).value(r.x_best);
  EXPECT_LE(std::abs(cost - qp.cost) / qp.cost, 1e-4)
      << cost << " vs " << qp.cost << " after " << r.iterations << " "
      << to_string(r.termination);
  EXPECT_TRUE(contains(F.polytope, r.x_best, 1e-6));
  EXPECT_EQ(r.qp_projections + r.affine_only_projections > 0, true);
}

TEST(PgdTest, DeterministicAndFeasible) {
  RestrictionProblem problem{
      {Polytope::Box(Eigen::Vector2d(0, 0), Eigen::Vector2d(3, 1)),
       Polytope::Box(Eigen::Vector2d(2, 0), Eigen::Vector2d(3, 3))},
      Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(2.5, 2.5), 3, 1};
  const StackedFeasibleSet F = stack_feasible(problem);
  const Objective f = weighted_sum(
      {undistorted_length(rational_param(2), F.layout), curvature_softmax(F.layout)},
      {1.0, 0.01});
  const Eigen::VectorXd x0 = convex_restriction(problem).path.stacked();
  const PGDResult a = pgd_solve(f, F, affine_hull(F.polytope), x0);
  const PGDResult b = pgd_solve(f, F, affine_hull(F.polytope), x0);
  EXPECT_EQ(a.cost_trace, b.cost_trace);
  EXPECT_TRUE(contains(F.polytope, a.x_best, 1e-6));
  EXPECT_LE(f.value(a.x_best), a.cost_trace[0]);
}

TEST(PgdTest, ConfigValidation) {
  PGDConfig cfg;
  cfg.backtrack_factor = 1.0;
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
  cfg = PGDConfig{};
  cfg.window = 0;
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
}

}  // namespace
}  // namespace undistort
