#include "undistort/parametrization.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/AutoDiff>

namespace undistort {
namespace {

template <int N>
using AutoDiff = Eigen::AutoDiffScalar<Eigen::Matrix<double, N, 1>>;

// Jacobian of a templated map by forward-mode differentiation.
template <int NQ, int NC, typename Fn>
Eigen::MatrixXd ForwardJacobian(const Eigen::VectorXd& x, Fn&& fn) {
  using AD = AutoDiff<NQ>;
  Eigen::Matrix<AD, NQ, 1> xa;
  for (int i = 0; i < NQ; ++i) {
    xa[i] = AD(x[i], NQ, i);
  }
  const Eigen::Matrix<AD, NC, 1> ya = fn(xa);
  Eigen::MatrixXd J(NC, NQ);
  for (int r = 0; r < NC; ++r) {
    J.row(r) = ya[r].derivatives().transpose();
  }
  return J;
}

inline double Value(double v) { return v; }
template <typename D>
double Value(const Eigen::AutoDiffScalar<D>& v) {
  return v.value();
}

void CheckSize(const Eigen::VectorXd& x, int n, const char* who) {
  if (x.size() != n) {
    throw std::invalid_argument(std::string(who) + ": expected dimension " +
                                std::to_string(n) + ", got " +
                                std::to_string(x.size()));
  }
}

class IdentityParam final : public Parametrization {
 public:
  explicit IdentityParam(int n) : n_(n) {}
  std::string id() const override { return "identity"; }
  int dim_q() const override { return n_; }
  int dim_c() const override { return n_; }
  Eigen::VectorXd map(const Eigen::VectorXd& x) const override {
    CheckSize(x, n_, "identity_param");
    return x;
  }
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const override {
    CheckSize(x, n_, "identity_param");
    return Eigen::MatrixXd::Identity(n_, n_);
  }

 private:
  int n_;
};

template <typename T>
Eigen::Matrix<T, 4, 1> EulerToQuaternion(const Eigen::Matrix<T, 3, 1>& rpy) {
  using std::cos;
  using std::sin;
  const T cr = cos(rpy[0] / 2.0), sr = sin(rpy[0] / 2.0);
  const T cp = cos(rpy[1] / 2.0), sp = sin(rpy[1] / 2.0);
  const T cy = cos(rpy[2] / 2.0), sy = sin(rpy[2] / 2.0);
  Eigen::Matrix<T, 4, 1> q;
  q << cr * cp * cy + sr * sp * sy,  //
      sr * cp * cy - cr * sp * sy,   //
      cr * sp * cy + sr * cp * sy,   //
      cr * cp * sy - sr * sp * cy;
  return q;
}

class EulerParam final : public Parametrization {
 public:
  std::string id() const override { return "euler_xyz"; }
  int dim_q() const override { return 3; }
  int dim_c() const override { return 4; }
  Eigen::VectorXd map(const Eigen::VectorXd& x) const override {
    CheckSize(x, 3, "euler_param");
    return EulerToQuaternion<double>(x.head<3>());
  }
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const override {
    CheckSize(x, 3, "euler_param");
    return ForwardJacobian<3, 4>(x, [](const auto& v) {
      return EulerToQuaternion(v);
    });
  }
  double metric(const Eigen::VectorXd& a,
                const Eigen::VectorXd& b) const override {
    return std::acos(std::min(1.0, std::abs(a.dot(b))));
  }
  MetricGradients metric_gradients(const Eigen::VectorXd& a,
                                   const Eigen::VectorXd& b) const override {
    const double c = a.dot(b);
    const double abs_c = std::abs(c);
    if (abs_c >= 1.0) {
      return {Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(4)};
    }
    const double scale = -std::copysign(1.0, c) / std::sqrt(1.0 - c * c);
    return {scale * b, scale * a};
  }
  SquaredMetric squared_metric(const Eigen::VectorXd& a,
                               const Eigen::VectorXd& b) const override {
    const double c = a.dot(b);
    const double abs_c = std::min(1.0, std::abs(c));
    const double theta = std::acos(abs_c);
    const double sin_theta = std::sqrt(std::max(0.0, 1.0 - abs_c * abs_c));
    // theta / sin(theta) -> 1 as theta -> 0.
    const double ratio = sin_theta > 1e-12 ? theta / sin_theta : 1.0;
    const double scale = -2.0 * std::copysign(1.0, c) * ratio;
    return {theta * theta, scale * b, scale * a};
  }
};

class RationalParam final : public Parametrization {
 public:
  explicit RationalParam(int n) : n_(n) {}
  std::string id() const override { return "rational"; }
  int dim_q() const override { return n_; }
  int dim_c() const override { return n_; }
  Eigen::VectorXd map(const Eigen::VectorXd& x) const override {
    CheckSize(x, n_, "rational_param");
    return 2.0 * x.array().atan();
  }
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const override {
    CheckSize(x, n_, "rational_param");
    return (2.0 / (1.0 + x.array().square())).matrix().asDiagonal();
  }

 private:
  int n_;
};

template <typename T>
Eigen::Matrix<T, 7, 1> BimanualMap(const BimanualGeometry& g,
                                   const Eigen::Matrix<T, 4, 1>& x) {
  using std::acos;
  using std::atan2;
  using std::cos;
  using std::sin;
  const auto& lead = g.leading.links;
  const auto& sub = g.subordinate.links;

  T angle = T(g.leading.base_angle);
  T px = T(g.leading.base.x());
  T py = T(g.leading.base.y());
  for (int k = 0; k < 3; ++k) {
    angle += x[k];
    px += lead[k] * cos(angle);
    py += lead[k] * sin(angle);
  }
  const T target_angle = angle + g.grasp.angle;
  const T tx = px + cos(angle) * g.grasp.position.x() -
               sin(angle) * g.grasp.position.y();
  const T ty = py + sin(angle) * g.grasp.position.x() +
               cos(angle) * g.grasp.position.y();

  const T redundancy = x[3];
  const T link1_angle = g.subordinate.base_angle + redundancy;
  const T ex = g.subordinate.base.x() + sub[0] * cos(link1_angle);
  const T ey = g.subordinate.base.y() + sub[0] * sin(link1_angle);
  const T wx = tx - sub[3] * cos(target_angle);
  const T wy = ty - sub[3] * sin(target_angle);

  // Wrist offset in the frame of link 1.
  const T dx = wx - ex;
  const T dy = wy - ey;
  const T lx = cos(link1_angle) * dx + sin(link1_angle) * dy;
  const T ly = -sin(link1_angle) * dx + cos(link1_angle) * dy;
  const double m2 = sub[1];
  const double m3 = sub[2];
  const T cos_elbow = (lx * lx + ly * ly - m2 * m2 - m3 * m3) / (2.0 * m2 * m3);
  using std::abs;
  if (!(abs(cos_elbow) <= 1.0)) {
    std::ostringstream msg;
    msg << "bimanual IK unreachable at q = (" << Value(x[0]) << ", "
        << Value(x[1]) << ", " << Value(x[2]) << ", " << Value(x[3])
        << "); wrist distance outside the link annulus";
    throw ParametrizationError(msg.str());
  }
  const T t3 = g.elbow_sign * acos(cos_elbow);
  const T t2 = atan2(ly, lx) - atan2(m3 * sin(t3), m2 + m3 * cos(t3));
  const T t4 = target_angle - link1_angle - t2 - t3;

  Eigen::Matrix<T, 7, 1> c;
  c << x[0], x[1], x[2], redundancy, t2, t3, t4;
  return c;
}

class BimanualParam final : public Parametrization {
 public:
  explicit BimanualParam(BimanualGeometry geometry)
      : geometry_(std::move(geometry)) {
    if (geometry_.leading.links.size() != 3 ||
        geometry_.subordinate.links.size() != 4) {
      throw std::invalid_argument(
          "bimanual_planar_param: need a 3-link leading and 4-link "
          "subordinate arm");
    }
    if (geometry_.elbow_sign != 1 && geometry_.elbow_sign != -1) {
      throw std::invalid_argument("bimanual_planar_param: elbow sign must be +-1");
    }
  }
  std::string id() const override { return "bimanual_planar"; }
  int dim_q() const override { return 4; }
  int dim_c() const override { return 7; }
  Eigen::VectorXd map(const Eigen::VectorXd& x) const override {
    CheckSize(x, 4, "bimanual_planar_param");
    return BimanualMap<double>(geometry_, x.head<4>());
  }
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const override {
    CheckSize(x, 4, "bimanual_planar_param");
    return ForwardJacobian<4, 7>(x, [this](const auto& v) {
      return BimanualMap(geometry_, v);
    });
  }

 private:
  BimanualGeometry geometry_;
};

}  // namespace

double Parametrization::metric(const Eigen::VectorXd& a,
                               const Eigen::VectorXd& b) const {
  return (a - b).norm();
}

MetricGradients Parametrization::metric_gradients(
    const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  const Eigen::VectorXd diff = a - b;
  const double norm = diff.norm();
  if (norm == 0.0) {
    return {Eigen::VectorXd::Zero(a.size()), Eigen::VectorXd::Zero(b.size())};
  }
  return {diff / norm, -diff / norm};
}

SquaredMetric Parametrization::squared_metric(const Eigen::VectorXd& a,
                                              const Eigen::VectorXd& b) const {
  const Eigen::VectorXd diff = a - b;
  return {diff.squaredNorm(), 2.0 * diff, -2.0 * diff};
}

ParametrizationPtr identity_param(int n) {
  if (n < 1) throw std::invalid_argument("identity_param: n must be >= 1");
  return std::make_shared<IdentityParam>(n);
}

ParametrizationPtr euler_param() { return std::make_shared<EulerParam>(); }

Eigen::Vector4d euler_to_quaternion(const Eigen::Vector3d& rpy) {
  return EulerToQuaternion<double>(rpy);
}

double quaternion_distance(const Eigen::Vector4d& q1,
                           const Eigen::Vector4d& q2) {
  return std::acos(std::min(1.0, std::abs(q1.dot(q2))));
}

ParametrizationPtr rational_param(int n) {
  if (n < 1) throw std::invalid_argument("rational_param: n must be >= 1");
  return std::make_shared<RationalParam>(n);
}

Pose2 planar_fk(const PlanarArm& arm, const Eigen::VectorXd& joints) {
  if (joints.size() != static_cast<int>(arm.links.size())) {
    throw std::invalid_argument("planar_fk: joint count mismatch");
  }
  Pose2 pose{arm.base, arm.base_angle};
  for (int k = 0; k < joints.size(); ++k) {
    pose.angle += joints[k];
    pose.position +=
        arm.links[k] * Eigen::Vector2d(std::cos(pose.angle), std::sin(pose.angle));
  }
  return pose;
}

Pose2 bimanual_target(const BimanualGeometry& geometry,
                      const Eigen::VectorXd& leading_joints) {
  const Pose2 lead = planar_fk(geometry.leading, leading_joints);
  const Eigen::Rotation2Dd rot(lead.angle);
  return {lead.position + rot * geometry.grasp.position,
          lead.angle + geometry.grasp.angle};
}

ParametrizationPtr bimanual_planar_param(const BimanualGeometry& geometry) {
  return std::make_shared<BimanualParam>(geometry);
}

}  // namespace undistort
