#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "undistort/bezier.h"
#include "undistort/parametrization.h"

namespace undistort {

/// Differentiable cost over a stacked control-point vector.
class Objective {
 public:
  using ValueFn = std::function<double(const Eigen::VectorXd&)>;
  using GradientFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

  Objective(std::string name, std::map<std::string, double> parameters,
            ValueFn value, GradientFn gradient);

  double value(const Eigen::VectorXd& x) const { return value_(x); }
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const {
    return gradient_(x);
  }

  const std::string& name() const { return name_; }
  const std::map<std::string, double>& parameters() const {
    return parameters_;
  }
  std::string descriptor() const;

 private:
  std::string name_;
  std::map<std::string, double> parameters_;
  ValueFn value_;
  GradientFn gradient_;
};

/// Raised when an objective cannot be evaluated at a sample; names the
/// segment and curve parameter.
class ObjectiveError : public std::runtime_error {
 public:
  ObjectiveError(const std::string& what, int segment, double t)
      : std::runtime_error(what), segment_(segment), t_(t) {}
  int segment() const { return segment_; }
  double t() const { return t_; }

 private:
  int segment_;
  double t_;
};

inline constexpr int kDefaultSamplesPerSegment = 10;
inline constexpr double kDefaultSoftmaxBeta = 10.0;

/// sum ||x_{ij} - x_{i,j-1}||^2 within each segment.
Objective surrogate_length(const ControlLayout& layout);

/// Sum of squared metric lengths of the sampled polyline mapped into C.
Objective undistorted_length(ParametrizationPtr param,
                             const ControlLayout& layout,
                             int k = kDefaultSamplesPerSegment);

/// Curvature of the Q-space curve at k samples per segment, aggregated with
/// RealSoftMax (1/beta) log sum exp(beta kappa).
Objective curvature_softmax(const ControlLayout& layout,
                            int k = kDefaultSamplesPerSegment,
                            double beta = kDefaultSoftmaxBeta);

/// Per-sample curvatures used by curvature_softmax, in sample order.
std::vector<double> sample_curvatures(const ControlLayout& layout,
                                      const Eigen::VectorXd& x, int k);

/// Curvature of a curve with velocity a and acceleration b. Zero below the
/// degenerate-speed guard.
double curvature(const Eigen::VectorXd& velocity,
                 const Eigen::VectorXd& acceleration);

/// Stable log-sum-exp smooth maximum.
double real_softmax(const std::vector<double>& values, double beta);

Objective weighted_sum(const std::vector<Objective>& objectives,
                       const std::vector<double>& weights);

/// max_i |analytic_i - central_difference_i| / max(1, |analytic_i|).
double grad_check(const Objective& objective, const Eigen::VectorXd& x,
                  double h = 1e-6);

}  // namespace undistort
