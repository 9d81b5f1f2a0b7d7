#include <cmath>

#include <gtest/gtest.h>

#include "undistort/topp.h"

namespace undistort {
namespace {

std::vector<Eigen::VectorXd> Line1d(double length, int n = 20) {
  std::vector<Eigen::VectorXd> pts;
  for (int i = 0; i <= n; ++i) pts.push_back(Eigen::VectorXd::Constant(1, length * i / n));
  return pts;
}

LimitSpec Limits1d(double v, double a) {
  return {Eigen::VectorXd::Constant(1, v), Eigen::VectorXd::Constant(1, a)};
}

TEST(RetimeTest, TriangularBangBang) {
  const double L = 2.0, a = 1.5;
  const SpeedProfile p = retime(Line1d(L), Limits1d(100.0, a), 200);
  EXPECT_NEAR(p.duration, 2 * std::sqrt(L / a), 0.02 * 2 * std::sqrt(L / a));
  EXPECT_EQ(p.b.front(), 0.0);
  EXPECT_EQ(p.b.back(), 0.0);
  for (double b : p.b) EXPECT_GE(b, 0.0);
}

TEST(RetimeTest, Trapezoid) {
  const double L = 5.0, v = 1.0, a = 2.0;
  const SpeedProfile p = retime(Line1d(L), Limits1d(v, a), 200);
  EXPECT_NEAR(p.duration, L / v + v / a, 0.02 * (L / v + v / a));
}

TEST(RetimeTest, DimensionalScaling) {
  const double L = 3.0;
  const double t1 = retime(Line1d(L), Limits1d(100.0, 2.0)).duration;
  const double t2 = retime(Line1d(L), Limits1d(25.0, 0.5)).duration;
  EXPECT_NEAR(t2 / t1, 2.0, 1e-6);
}

TEST(RetimeTest, GridRefinementConverges) {
  std::vector<Eigen::VectorXd> arc;
  for (int i = 0; i <= 100; ++i) {
    const double t = M_PI * i / 100;
    arc.push_back(Eigen::Vector2d(std::cos(t), std::sin(t)));
  }
  const LimitSpec lim{Eigen::Vector2d(1.0, 1.5), Eigen::Vector2d(2.0, 2.0)};
  const double d200 = retime(arc, lim, 200).duration;
  const double d400 = retime(arc, lim, 400).duration;
  EXPECT_LE(std::abs(d400 - d200) / d400, 0.01);
}

TEST(RetimeTest, RespectsLimits) {
  std::vector<Eigen::VectorXd> arc;
  for (int i = 0; i <= 100; ++i) {
    const double t = 1.5 * M_PI * i / 100;
    arc.push_back(Eigen::Vector2d(2 * std::cos(t), std::sin(t)));
  }
  const LimitSpec lim{Eigen::Vector2d(0.8, 1.2), Eigen::Vector2d(1.0, 3.0)};
  const SpeedProfile p = retime(arc, lim, 200);
  const LimitUsage use = limit_usage(p, lim);
  EXPECT_LE(use.velocity, 1.02);
  EXPECT_LE(use.acceleration, 1.02);
}

TEST(RetimeTest, ZeroLengthAndValidation) {
  std::vector<Eigen::VectorXd> still(5, Eigen::Vector2d(1, 1));
  const LimitSpec lim{Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 1)};
  EXPECT_EQ(retime(still, lim).duration, 0.0);
  EXPECT_THROW(retime(std::vector<Eigen::VectorXd>(2, Eigen::Vector2d(0, 0)), lim),
               std::invalid_argument);
  EXPECT_THROW(retime(still, lim, 4), std::invalid_argument);
  EXPECT_THROW(retime(still, LimitSpec{Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 1)}),
               std::invalid_argument);
}

TEST(RetimeTest, SampleSpacingInvariance) {
  // The same curve sampled uniformly in angle and with clustered samples.
  std::vector<Eigen::VectorXd> uniform, clustered;
  for (int i = 0; i <= 80; ++i) {
    const double t = 0.5 * M_PI * i / 80;
    uniform.push_back(Eigen::Vector2d(std::cos(t), std::sin(t)));
    const double s = 0.5 * M_PI * std::pow(i / 80.0, 2);
    clustered.push_back(Eigen::Vector2d(std::cos(s), std::sin(s)));
  }
  const LimitSpec lim{Eigen::Vector2d(1.0, 1.0), Eigen::Vector2d(1.0, 1.0)};
  const double a = retime(uniform, lim).duration;
  const double b = retime(clustered, lim).duration;
  EXPECT_NEAR(a, b, 0.02 * a);
}

TEST(DurationOfTest, DegenerateAndScaling) {
  const auto id = identity_param(2);
  const LimitSpec lim{Eigen::Vector2d(100, 100), Eigen::Vector2d(1, 1)};
  const CompositePath still({BezierSegment(Eigen::MatrixXd::Constant(2, 4, 0.3))});
  EXPECT_EQ(duration_of(still, *id, lim), 0.0);

  Eigen::MatrixXd P(2, 4);
  P << 0, 1, 2, 3, 0, 1, 1, 0;
  const double t1 = duration_of(CompositePath({BezierSegment(P)}), *id, lim);
  const double t2 = duration_of(CompositePath({BezierSegment(2 * P)}), *id, lim);
  EXPECT_NEAR(t2 / t1, std::sqrt(2.0), 0.01 * std::sqrt(2.0));
}

TEST(DurationOfTest, LowerCurvatureIsFaster) {
  const auto id = identity_param(2);
  const LimitSpec lim{Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 1)};
  Eigen::MatrixXd gentle(2, 4), sharp(2, 4);
  gentle << 0, 1, 2, 3, 0, 0.3, 0.3, 0;
  sharp << 0, 0, 3, 3, 0, 2, 2, 0;
  EXPECT_LT(duration_of(CompositePath({BezierSegment(gentle)}), *id, lim),
            duration_of(CompositePath({BezierSegment(sharp)}), *id, lim));
}

}  // namespace
}  // namespace undistort
