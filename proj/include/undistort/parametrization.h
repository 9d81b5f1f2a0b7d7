#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace undistort {

/// Raised when the coordinate change is undefined at a point (for instance
/// an unreachable inverse-kinematics target).
class ParametrizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MetricGradients {
  Eigen::VectorXd wrt_a;
  Eigen::VectorXd wrt_b;
};

/// f(a, b)^2 with its gradients, evaluated in a form that stays finite as
/// a -> b.
struct SquaredMetric {
  double value;
  Eigen::VectorXd wrt_a;
  Eigen::VectorXd wrt_b;
};

/// Smooth change of coordinates alpha: Q -> C plus the distance f on C.
///
/// Implementations are immutable and safe to share between threads.
class Parametrization {
 public:
  virtual ~Parametrization() = default;

  virtual std::string id() const = 0;
  virtual int dim_q() const = 0;
  virtual int dim_c() const = 0;

  virtual Eigen::VectorXd map(const Eigen::VectorXd& x) const = 0;
  /// d alpha / dx, dim_c x dim_q.
  virtual Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const = 0;

  /// Euclidean unless overridden.
  virtual double metric(const Eigen::VectorXd& a,
                        const Eigen::VectorXd& b) const;
  /// Zero at a == b, where f is not differentiable.
  virtual MetricGradients metric_gradients(const Eigen::VectorXd& a,
                                           const Eigen::VectorXd& b) const;
  virtual SquaredMetric squared_metric(const Eigen::VectorXd& a,
                                       const Eigen::VectorXd& b) const;
};

using ParametrizationPtr = std::shared_ptr<const Parametrization>;

ParametrizationPtr identity_param(int n);

/// Roll-pitch-yaw (extrinsic X-Y-Z, R = Rz(yaw) Ry(pitch) Rx(roll)) to a unit
/// quaternion (w, x, y, z). The metric is the half rotation angle
/// acos(min(1, |<q1, q2>|)), invariant under q -> -q.
ParametrizationPtr euler_param();

/// Quaternion for extrinsic X-Y-Z angles (roll, pitch, yaw).
Eigen::Vector4d euler_to_quaternion(const Eigen::Vector3d& rpy);

/// Half rotation angle between two unit quaternions.
double quaternion_distance(const Eigen::Vector4d& q1, const Eigen::Vector4d& q2);

/// Tangent half-angle coordinates: theta_i = 2 atan(s_i).
ParametrizationPtr rational_param(int n);

struct Pose2 {
  Eigen::Vector2d position;
  double angle;
};

/// Planar serial arm; joint angles are relative to the previous link.
struct PlanarArm {
  Eigen::Vector2d base{0.0, 0.0};
  double base_angle{0.0};
  std::vector<double> links;
};

Pose2 planar_fk(const PlanarArm& arm, const Eigen::VectorXd& joints);

/// Two planar arms rigidly holding one object.
///
/// The leading 3R arm is driven directly. The subordinate 4R arm must place
/// its end effector at lead_ee * grasp; its first joint is the redundancy
/// parameter and the remaining three joints come from closed-form IK with a
/// fixed elbow branch.
struct BimanualGeometry {
  PlanarArm leading;
  PlanarArm subordinate;
  Pose2 grasp{{0.0, 0.0}, 0.0};
  int elbow_sign{1};
};

/// Q = (q1, q2, q3, redundancy) in R^4, C = (q1, q2, q3, t1, t2, t3, t4) in
/// R^7, Euclidean metric on C.
ParametrizationPtr bimanual_planar_param(const BimanualGeometry& geometry);

/// Subordinate target pose for the given leading joints.
Pose2 bimanual_target(const BimanualGeometry& geometry,
                      const Eigen::VectorXd& leading_joints);

}  // namespace undistort
