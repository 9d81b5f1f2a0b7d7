#include "undistort/topp.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace undistort {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Natural cubic spline through (u_i, y_i), one coordinate per row of y.
class NaturalSpline {
 public:
  NaturalSpline(std::vector<double> u, const Eigen::MatrixXd& y)
      : u_(std::move(u)), y_(y) {
    const int n = static_cast<int>(u_.size());
    m_ = Eigen::MatrixXd::Zero(y.rows(), n);
    if (n < 3) return;
    // Thomas algorithm on the interior second derivatives.
    std::vector<double> diag(n), upper(n), lower(n);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(y.rows(), n);
    for (int i = 1; i + 1 < n; ++i) {
      const double h0 = u_[i] - u_[i - 1];
      const double h1 = u_[i + 1] - u_[i];
      lower[i] = h0 / 6.0;
      diag[i] = (h0 + h1) / 3.0;
      upper[i] = h1 / 6.0;
      rhs.col(i) = (y.col(i + 1) - y.col(i)) / h1 - (y.col(i) - y.col(i - 1)) / h0;
    }
    for (int i = 2; i + 1 < n; ++i) {
      const double w = lower[i] / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs.col(i) -= w * rhs.col(i - 1);
    }
    for (int i = n - 2; i >= 1; --i) {
      m_.col(i) = rhs.col(i);
      if (i + 2 < n) m_.col(i) -= upper[i] * m_.col(i + 1);
      m_.col(i) /= diag[i];
    }
  }

  Eigen::VectorXd operator()(double u) const {
    const int n = static_cast<int>(u_.size());
    auto it = std::upper_bound(u_.begin(), u_.end(), u);
    int i = static_cast<int>(it - u_.begin()) - 1;
    i = std::clamp(i, 0, n - 2);
    const double h = u_[i + 1] - u_[i];
    const double a = (u_[i + 1] - u) / h;
    const double b = (u - u_[i]) / h;
    return a * y_.col(i) + b * y_.col(i + 1) +
           ((a * a * a - a) * m_.col(i) + (b * b * b - b) * m_.col(i + 1)) *
               (h * h / 6.0);
  }

 private:
  std::vector<double> u_;
  Eigen::MatrixXd y_;
  Eigen::MatrixXd m_;
};

// Constraint alpha * b + beta * a <= gamma.
struct Row {
  double alpha;
  double beta;
  double gamma;
};

std::vector<Row> StageRows(const Eigen::VectorXd& dq, const Eigen::VectorXd& ddq,
                           const LimitSpec& limits) {
  std::vector<Row> rows;
  for (int i = 0; i < dq.size(); ++i) {
    rows.push_back({ddq[i], dq[i], limits.acc_max[i]});
    rows.push_back({-ddq[i], -dq[i], limits.acc_max[i]});
  }
  return rows;
}

double VelocityBound(const Eigen::VectorXd& dq, const LimitSpec& limits) {
  double bound = kInf;
  for (int i = 0; i < dq.size(); ++i) {
    const double d2 = dq[i] * dq[i];
    if (d2 > 0.0) bound = std::min(bound, limits.vel_max[i] * limits.vel_max[i] / d2);
  }
  return bound;
}

// Largest b >= 0 admitting some a; rows already include the transition.
// Pairs of upper/lower bounds on a are eliminated (Fourier-Motzkin).
double MaxControllable(const std::vector<Row>& rows, double b_cap) {
  double hi = b_cap;
  double lo = 0.0;
  auto apply = [&](double c, double d) {
    // c * b <= d
    if (c > 0.0) {
      hi = std::min(hi, d / c);
    } else if (c < 0.0) {
      lo = std::max(lo, d / c);
    } else if (d < 0.0) {
      hi = -kInf;
    }
  };
  for (const Row& r : rows) {
    if (r.beta == 0.0) apply(r.alpha, r.gamma);
  }
  for (const Row& up : rows) {
    if (!(up.beta > 0.0)) continue;
    for (const Row& dn : rows) {
      if (!(dn.beta < 0.0)) continue;
      // (gamma_dn - alpha_dn b) / beta_dn <= (gamma_up - alpha_up b) / beta_up
      const double c = up.alpha / up.beta - dn.alpha / dn.beta;
      const double d = up.gamma / up.beta - dn.gamma / dn.beta;
      apply(c, d);
    }
  }
  if (hi < lo - 1e-12 * std::max(1.0, std::abs(lo))) {
    throw std::runtime_error("retime: stage has no controllable speed");
  }
  return std::max(hi, 0.0);
}

// Largest a for fixed b.
double MaxAcceleration(const std::vector<Row>& rows, double b) {
  double best = kInf;
  for (const Row& r : rows) {
    if (r.beta > 0.0) best = std::min(best, (r.gamma - r.alpha * b) / r.beta);
  }
  return best;
}

}  // namespace

void LimitSpec::Validate() const {
  if (vel_max.size() == 0 || vel_max.size() != acc_max.size()) {
    throw std::invalid_argument("LimitSpec: vel_max and acc_max sizes differ");
  }
  if (!(vel_max.array() > 0.0).all() || !(acc_max.array() > 0.0).all() ||
      !vel_max.allFinite() || !acc_max.allFinite()) {
    throw std::invalid_argument("LimitSpec: limits must be finite and positive");
  }
}

SpeedProfile retime(const std::vector<Eigen::VectorXd>& samples,
                    const LimitSpec& limits, int grid) {
  limits.Validate();
  if (samples.size() < 3) throw std::invalid_argument("retime: need >= 3 samples");
  if (grid < 8) throw std::invalid_argument("retime: grid must be >= 8");
  const int n = static_cast<int>(samples.front().size());
  if (n != limits.vel_max.size()) {
    throw std::invalid_argument("retime: limits do not match path dimension");
  }

  SpeedProfile profile;
  profile.grid.resize(grid + 1);
  for (int k = 0; k <= grid; ++k) profile.grid[k] = static_cast<double>(k) / grid;
  profile.b.assign(grid + 1, 0.0);
  profile.dq = Eigen::MatrixXd::Zero(n, grid + 1);
  profile.ddq = Eigen::MatrixXd::Zero(n, grid + 1);

  double total = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (samples[i].size() != n) {
      throw std::invalid_argument("retime: samples differ in dimension");
    }
    total += (samples[i] - samples[i - 1]).norm();
  }
  if (!(total > 1e-12)) return profile;

  // Chord-length knots with repeated points dropped.
  std::vector<double> knots{0.0};
  std::vector<Eigen::VectorXd> kept{samples.front()};
  double run = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const double step = (samples[i] - kept.back()).norm();
    if (step <= 1e-12 * total) continue;
    run += step;
    knots.push_back(run / total);
    kept.push_back(samples[i]);
  }
  knots.back() = 1.0;
  Eigen::MatrixXd y(n, kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) y.col(i) = kept[i];

  Eigen::MatrixXd q(n, grid + 1);
  if (kept.size() == 2) {
    for (int k = 0; k <= grid; ++k) {
      q.col(k) = (1.0 - profile.grid[k]) * y.col(0) + profile.grid[k] * y.col(1);
    }
  } else {
    const NaturalSpline spline(knots, y);
    for (int k = 0; k <= grid; ++k) q.col(k) = spline(profile.grid[k]);
  }

  const double du = 1.0 / grid;
  for (int k = 0; k <= grid; ++k) {
    if (k == 0) {
      profile.dq.col(k) = (-3.0 * q.col(0) + 4.0 * q.col(1) - q.col(2)) / (2.0 * du);
      profile.ddq.col(k) = (2.0 * q.col(0) - 5.0 * q.col(1) + 4.0 * q.col(2) - q.col(3)) / (du * du);
    } else if (k == grid) {
      profile.dq.col(k) = (3.0 * q.col(k) - 4.0 * q.col(k - 1) + q.col(k - 2)) / (2.0 * du);
      profile.ddq.col(k) = (2.0 * q.col(k) - 5.0 * q.col(k - 1) + 4.0 * q.col(k - 2) - q.col(k - 3)) / (du * du);
    } else {
      profile.dq.col(k) = (q.col(k + 1) - q.col(k - 1)) / (2.0 * du);
      profile.ddq.col(k) = (q.col(k + 1) - 2.0 * q.col(k) + q.col(k - 1)) / (du * du);
    }
  }

  // Backward pass over controllable sets [0, upper[k]].
  std::vector<double> upper(grid + 1, 0.0);
  for (int k = grid - 1; k >= 0; --k) {
    std::vector<Row> rows = StageRows(profile.dq.col(k), profile.ddq.col(k), limits);
    rows.push_back({1.0, 2.0 * du, upper[k + 1]});
    rows.push_back({-1.0, -2.0 * du, 0.0});
    const double cap = k == 0 ? 0.0 : VelocityBound(profile.dq.col(k), limits);
    upper[k] = MaxControllable(rows, cap);
  }

  // Forward greedy pass.
  for (int k = 0; k < grid; ++k) {
    const std::vector<Row> rows =
        StageRows(profile.dq.col(k), profile.ddq.col(k), limits);
    double a = MaxAcceleration(rows, profile.b[k]);
    double next = std::isfinite(a) ? profile.b[k] + 2.0 * du * a : kInf;
    profile.b[k + 1] = std::clamp(next, 0.0, upper[k + 1]);
  }
  profile.b[grid] = 0.0;

  double duration = 0.0;
  for (int k = 0; k < grid; ++k) {
    const double s = std::sqrt(profile.b[k]) + std::sqrt(profile.b[k + 1]);
    if (s > 0.0) {
      duration += 2.0 * du / s;
    } else {
      // Rest at both ends of the interval: accelerate then brake.
      double worst = 0.0;
      for (int i = 0; i < n; ++i) {
        worst = std::max(worst, 2.0 * std::sqrt(std::abs(q(i, k + 1) - q(i, k)) /
                                                limits.acc_max[i]));
      }
      duration += worst;
    }
  }
  profile.duration = duration;
  return profile;
}

double duration_of(const CompositePath& path, const Parametrization& param,
                   const LimitSpec& limits, int k_dense, int grid) {
  if (k_dense < 2) throw std::invalid_argument("duration_of: k_dense must be >= 2");
  std::vector<Eigen::VectorXd> mapped;
  for (const PathSample& s : sample_path(path, k_dense)) {
    mapped.push_back(param.map(s.point));
  }
  if (mapped.size() < 3) mapped.insert(mapped.begin() + 1, mapped.front());
  return retime(mapped, limits, grid).duration;
}

LimitUsage limit_usage(const SpeedProfile& profile, const LimitSpec& limits) {
  LimitUsage usage{0.0, 0.0};
  const int N = static_cast<int>(profile.b.size()) - 1;
  if (N < 1) return usage;
  const double du = profile.grid[1] - profile.grid[0];
  for (int k = 0; k <= N; ++k) {
    const Eigen::VectorXd v = profile.dq.col(k) * std::sqrt(profile.b[k]);
    usage.velocity = std::max(
        usage.velocity, (v.array().abs() / limits.vel_max.array()).maxCoeff());
    if (k < N) {
      const double a = (profile.b[k + 1] - profile.b[k]) / (2.0 * du);
      const Eigen::VectorXd acc =
          profile.ddq.col(k) * profile.b[k] + profile.dq.col(k) * a;
      usage.acceleration =
          std::max(usage.acceleration,
                   (acc.array().abs() / limits.acc_max.array()).maxCoeff());
    }
  }
  return usage;
}

}  // namespace undistort
