#include <random>

#include <gtest/gtest.h>

#include "undistort/convex_solver.h"

namespace undistort {
namespace {

Polytope UnitBox2() {
  return Polytope::Box(Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 1));
}

TEST(QuadProgramTest, RejectsBadHessians) {
  Eigen::Matrix2d asym;
  asym << 1, 2, 0, 1;
  EXPECT_THROW(solve(QuadProgram::Unconstrained(asym, Eigen::Vector2d::Zero())),
               std::invalid_argument);
  Eigen::Matrix2d indefinite;
  indefinite << 1, 0, 0, -1;
  EXPECT_THROW(
      solve(QuadProgram::Unconstrained(indefinite, Eigen::Vector2d::Zero())),
      std::invalid_argument);
}

TEST(SolveTest, ActiveScalarBound) {
  QuadProgram prog = QuadProgram::Unconstrained(
      2.0 * Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1));
  prog.A = -Eigen::MatrixXd::Identity(1, 1);
  prog.b = -Eigen::VectorXd::Ones(1);
  const SolveReport r = solve(prog);
  ASSERT_EQ(r.status, SolveStatus::kOptimal);
  EXPECT_NEAR(r.x_opt[0], 1.0, 1e-6);
  EXPECT_LE(r.primal_residual, 1e-6);
  EXPECT_LE(r.dual_residual, 1e-6);
}

TEST(SolveTest, FaceProjectionAndLpVertex) {
  const Polytope box = UnitBox2();
  QuadProgram prog{2.0 * Eigen::MatrixXd::Identity(2, 2),
                   Eigen::Vector2d(-4, 0), box.A(), box.b(), box.E(), box.f()};
  SolveReport r = solve(prog);
  ASSERT_EQ(r.status, SolveStatus::kOptimal);
  EXPECT_NEAR(r.x_opt[0], 1.0, 1e-6);
  EXPECT_NEAR(r.x_opt[1], 0.0, 1e-6);

  prog.Q.setZero();
  prog.c = Eigen::Vector2d(1, 1);
  r = solve(prog);
  ASSERT_EQ(r.status, SolveStatus::kOptimal);
  EXPECT_NEAR(r.x_opt[0], -1.0, 1e-6);
  EXPECT_NEAR(r.x_opt[1], -1.0, 1e-6);
  EXPECT_NEAR(r.objective, -2.0, 1e-6);
}

TEST(SolveTest, Certificates) {
  Eigen::MatrixXd A(2, 1);
  A << 1, -1;
  QuadProgram infeasible{Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1),
                         A, Eigen::Vector2d(-1, -1), Eigen::MatrixXd::Zero(0, 1),
                         Eigen::VectorXd::Zero(0)};
  EXPECT_EQ(solve(infeasible).status, SolveStatus::kInfeasible);

  QuadProgram unbounded = QuadProgram::Unconstrained(
      Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Ones(1));
  EXPECT_EQ(solve(unbounded).status, SolveStatus::kUnbounded);
}

TEST(SolveTest, EqualityQpMatchesKkt) {
  std::mt19937 rng(17);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 6;
    const int p = 2;
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < M.size(); ++i) M.data()[i] = g(rng);
    const Eigen::MatrixXd Q =
        M.transpose() * M + 0.5 * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd c(n);
    for (int i = 0; i < n; ++i) c[i] = g(rng);
    Eigen::MatrixXd E(p, n);
    for (int i = 0; i < E.size(); ++i) E.data()[i] = g(rng);
    Eigen::VectorXd f(p);
    for (int i = 0; i < p; ++i) f[i] = g(rng);

    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + p, n + p);
    K.topLeftCorner(n, n) = Q;
    K.topRightCorner(n, p) = E.transpose();
    K.bottomLeftCorner(p, n) = E;
    Eigen::VectorXd rhs(n + p);
    rhs << -c, f;
    const Eigen::VectorXd kkt = K.fullPivLu().solve(rhs);

    QuadProgram prog{Q, c, Eigen::MatrixXd::Zero(0, n), Eigen::VectorXd::Zero(0),
                     E, f};
    const SolveReport r = solve(prog);
    ASSERT_EQ(r.status, SolveStatus::kOptimal);
    EXPECT_LE((r.x_opt - kkt.head(n)).norm(),
              1e-6 * std::max(1.0, kkt.head(n).norm()));
  }
}

TEST(ProjectTest, Examples) {
  const Polytope box = UnitBox2();
  const Eigen::Vector2d inside(0.3, -0.2);
  EXPECT_EQ(project_polytope(box, inside), inside);
  const Eigen::VectorXd corner = project_polytope(box, Eigen::Vector2d(2, 2));
  EXPECT_NEAR(corner[0], 1.0, 1e-6);
  EXPECT_NEAR(corner[1], 1.0, 1e-6);

  Eigen::MatrixXd A(1, 2);
  A << 1, 0;
  const Eigen::VectorXd facet =
      project_polytope(Polytope(A, Eigen::VectorXd::Zero(1)), Eigen::Vector2d(3, 4));
  EXPECT_NEAR(facet[0], 0.0, 1e-6);
  EXPECT_NEAR(facet[1], 4.0, 1e-6);

  Eigen::MatrixXd B(2, 1);
  B << 1, -1;
  EXPECT_THROW(project_polytope(Polytope(B, Eigen::Vector2d(-1, -1)),
                                Eigen::VectorXd::Zero(1)),
               std::runtime_error);
}

TEST(ProjectTest, ProjectorReusesFactorization) {
  PolytopeProjector projector(UnitBox2());
  for (double x = 1.5; x < 4.0; x += 0.5) {
    const Eigen::VectorXd p = projector.Project(Eigen::Vector2d(x, -x));
    EXPECT_NEAR(p[0], 1.0, 1e-6);
    EXPECT_NEAR(p[1], -1.0, 1e-6);
  }
}

}  // namespace
}  // namespace undistort
