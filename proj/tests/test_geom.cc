#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "undistort/polytope.h"

namespace undistort {
namespace {

Polytope Interval(double lo, double hi) {
  return Polytope::Box(Eigen::VectorXd::Constant(1, lo),
                       Eigen::VectorXd::Constant(1, hi));
}

Polytope UnitBox2() {
  return Polytope::Box(Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 1));
}

TEST(PolytopeTest, ConstructorValidatesShapes) {
  EXPECT_THROW(Polytope(Eigen::MatrixXd::Zero(2, 2), Eigen::VectorXd::Zero(3)),
               std::invalid_argument);
  EXPECT_THROW(Polytope(Eigen::MatrixXd::Zero(2, 2), Eigen::VectorXd::Zero(2),
                        Eigen::MatrixXd::Zero(1, 3), Eigen::VectorXd::Zero(1)),
               std::invalid_argument);
  const Polytope P(Eigen::MatrixXd::Zero(2, 3), Eigen::VectorXd::Zero(2));
  EXPECT_EQ(P.num_equalities(), 0);
  EXPECT_EQ(P.E().cols(), 3);
}

TEST(PolytopeTest, Contains) {
  const Polytope box = UnitBox2();
  EXPECT_TRUE(contains(box, Eigen::Vector2d(0, 0), 0.0));
  EXPECT_FALSE(contains(box, Eigen::Vector2d(1 + 1e-3, 0), 1e-6));
  EXPECT_TRUE(contains(box, Eigen::Vector2d(1, 1), 0.0));
  EXPECT_THROW(contains(box, Eigen::Vector3d(0, 0, 0)), std::invalid_argument);
}

TEST(PolytopeTest, Intersect) {
  const Polytope both = intersect(Interval(-1, 1), Interval(0, 2));
  for (double x = -2.0; x <= 3.0; x += 0.05) {
    EXPECT_EQ(contains(both, Eigen::VectorXd::Constant(1, x), 0.0),
              x >= 0.0 && x <= 1.0)
        << x;
  }
  const Polytope self = intersect(UnitBox2(), UnitBox2());
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector2d x(u(rng), u(rng));
    EXPECT_EQ(contains(self, x, 0.0), contains(UnitBox2(), x, 0.0));
  }
  EXPECT_TRUE(is_empty(intersect(Interval(-1, 0), Interval(1, 2))));
}

TEST(PolytopeTest, IntersectIsCommutative) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  Eigen::MatrixXd A(4, 2);
  for (int i = 0; i < 8; ++i) A.data()[i] = u(rng);
  const Polytope P(A, Eigen::VectorXd::Constant(4, 0.5));
  const Polytope Q = Polytope::Box(Eigen::Vector2d(-0.3, -0.8),
                                   Eigen::Vector2d(0.9, 0.4));
  const Polytope pq = intersect(P, Q);
  const Polytope qp = intersect(Q, P);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Vector2d x(2 * u(rng), 2 * u(rng));
    EXPECT_EQ(contains(pq, x, 0.0), contains(qp, x, 0.0));
  }
}

TEST(PolytopeTest, IsEmpty) {
  EXPECT_FALSE(is_empty(Interval(0, 1)));
  Eigen::MatrixXd A(2, 1);
  A << 1, -1;
  EXPECT_TRUE(is_empty(Polytope(A, Eigen::Vector2d(-1, -1))));
  EXPECT_FALSE(is_empty(Polytope(A, Eigen::Vector2d(0.5, -0.5))));
}

TEST(PolytopeTest, AffineHull) {
  const Polytope free3(Eigen::MatrixXd::Zero(0, 3), Eigen::VectorXd::Zero(0));
  const AffineSubspace full = affine_hull(free3);
  EXPECT_EQ(full.dimension(), 3);
  EXPECT_TRUE((full.basis.transpose() * full.basis)
                  .isApprox(Eigen::Matrix3d::Identity(), 1e-10));

  Eigen::MatrixXd E(1, 2);
  E << 1, 1;
  const Polytope line(Eigen::MatrixXd::Zero(0, 2), Eigen::VectorXd::Zero(0), E,
                      Eigen::VectorXd::Constant(1, 1.0));
  const AffineSubspace S = affine_hull(line);
  EXPECT_EQ(S.dimension(), 1);
  EXPECT_NEAR(S.origin[0], 0.5, 1e-12);
  EXPECT_NEAR(S.origin[1], 0.5, 1e-12);

  const Polytope point(Eigen::MatrixXd::Zero(0, 1), Eigen::VectorXd::Zero(0),
                       Eigen::MatrixXd::Identity(1, 1),
                       Eigen::VectorXd::Constant(1, 0.7));
  const AffineSubspace P0 = affine_hull(point);
  EXPECT_EQ(P0.dimension(), 0);
  EXPECT_NEAR(P0.origin[0], 0.7, 1e-12);

  Eigen::MatrixXd inconsistent(2, 1);
  inconsistent << 1, 1;
  EXPECT_THROW(affine_hull(Polytope(Eigen::MatrixXd::Zero(0, 1),
                                    Eigen::VectorXd::Zero(0), inconsistent,
                                    Eigen::Vector2d(0, 1))),
               std::invalid_argument);
}

TEST(PolytopeTest, ProjectAffine) {
  Eigen::MatrixXd E(1, 2);
  E << 0, 1;
  const AffineSubspace S = affine_hull(Polytope(
      Eigen::MatrixXd::Zero(0, 2), Eigen::VectorXd::Zero(0), E,
      Eigen::VectorXd::Zero(1)));
  const Eigen::VectorXd p = project_affine(S, Eigen::Vector2d(3, 4));
  EXPECT_NEAR(p[0], 3, 1e-12);
  EXPECT_NEAR(p[1], 0, 1e-12);
  EXPECT_LE((project_affine(S, p) - p).norm(), 1e-10);
}

TEST(PolytopeTest, AffineProjectionSatisfiesEqualities) {
  std::mt19937 rng(5);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd E(2, 5);
    for (int i = 0; i < E.size(); ++i) E.data()[i] = g(rng);
    Eigen::VectorXd f(2);
    f << g(rng), g(rng);
    const Polytope P(Eigen::MatrixXd::Zero(0, 5), Eigen::VectorXd::Zero(0), E, f);
    const AffineSubspace S = affine_hull(P);
    EXPECT_TRUE((S.basis.transpose() * S.basis)
                    .isApprox(Eigen::MatrixXd::Identity(3, 3), 1e-10));
    Eigen::VectorXd x(5);
    for (int i = 0; i < 5; ++i) x[i] = 3 * g(rng);
    EXPECT_TRUE(contains(P, project_affine(S, x), 1e-8));
    Eigen::VectorXd z(3);
    for (int i = 0; i < 3; ++i) z[i] = g(rng);
    EXPECT_LE((E * (S.origin + S.basis * z) - f).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(PolytopeTest, ChebyshevCenter) {
  EXPECT_LE(chebyshev_center(UnitBox2()).norm(), 1e-6);
  const Eigen::VectorXd c =
      chebyshev_center(Polytope::Box(Eigen::Vector2d(0, 0), Eigen::Vector2d(4, 2)));
  EXPECT_NEAR(c[0], 2.0, 1e-6);
  EXPECT_NEAR(c[1], 1.0, 1e-6);

  // Incircle of the right triangle: tangent to both axes at distance r.
  Eigen::MatrixXd A(3, 2);
  A << -1, 0, 0, -1, 1, 1;
  const Eigen::VectorXd t =
      chebyshev_center(Polytope(A, Eigen::Vector3d(0, 0, 1)));
  const double r = 1.0 / (2.0 + std::sqrt(2.0));
  EXPECT_NEAR(t[0], r, 1e-6);
  EXPECT_NEAR(t[1], r, 1e-6);
}

TEST(PolytopeTest, ChebyshevCenterInsideRandomBoxes) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-5, 5);
  std::uniform_real_distribution<double> w(0.01, 3);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::Vector3d lo(u(rng), u(rng), u(rng));
    Eigen::Vector3d hi = lo + Eigen::Vector3d(w(rng), w(rng), w(rng));
    EXPECT_TRUE(contains(Polytope::Box(lo, hi),
                         chebyshev_center(Polytope::Box(lo, hi)), 0.0));
  }
}

TEST(PolytopeTest, ChebyshevCenterErrors) {
  Eigen::MatrixXd A(2, 1);
  A << 1, -1;
  EXPECT_THROW(chebyshev_center(Polytope(A, Eigen::Vector2d(-1, -1))),
               std::runtime_error);
  Eigen::MatrixXd half(1, 2);
  half << 1, 0;
  EXPECT_THROW(chebyshev_center(Polytope(half, Eigen::VectorXd::Zero(1))),
               std::runtime_error);
}

}  // namespace
}  // namespace undistort
