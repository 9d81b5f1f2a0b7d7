#pragma once

#include <vector>

#include <Eigen/Dense>

#include "undistort/bezier.h"
#include "undistort/parametrization.h"

namespace undistort {

/// Per-coordinate box limits on velocity (units/s) and acceleration
/// (units/s^2).
struct LimitSpec {
  Eigen::VectorXd vel_max;
  Eigen::VectorXd acc_max;

  /// Throws std::invalid_argument unless both are the same size and
  /// strictly positive.
  void Validate() const;
};

inline constexpr int kDefaultRetimeGrid = 200;
inline constexpr int kDefaultDenseSamples = 50;

/// Squared path speed b = (du/dt)^2 on a uniform grid over u in [0, 1],
/// where u is normalized chord length.
struct SpeedProfile {
  std::vector<double> grid;
  std::vector<double> b;
  double duration{0.0};
  /// dq/du and d2q/du2 at the grid points, one column per grid point.
  Eigen::MatrixXd dq;
  Eigen::MatrixXd ddq;
};

/// Time-optimal rest-to-rest retiming of a sampled path.
///
/// The samples are interpolated by a natural cubic spline in normalized
/// chord length and resampled on N + 1 points; derivatives come from
/// central differences. A backward pass computes the largest controllable
/// b at each stage, a forward pass then takes the greedy maximum.
SpeedProfile retime(const std::vector<Eigen::VectorXd>& samples,
                    const LimitSpec& limits, int grid = kDefaultRetimeGrid);

/// Samples the path densely, maps it to C and retimes it there.
double duration_of(const CompositePath& path, const Parametrization& param,
                   const LimitSpec& limits,
                   int k_dense = kDefaultDenseSamples,
                   int grid = kDefaultRetimeGrid);

/// Largest |v_i| / vel_max_i and |acc_i| / acc_max_i over the profile, with
/// acceleration taken piecewise constant between grid points.
struct LimitUsage {
  double velocity;
  double acceleration;
};
LimitUsage limit_usage(const SpeedProfile& profile, const LimitSpec& limits);

}  // namespace undistort
