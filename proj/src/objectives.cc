#include "undistort/objectives.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace undistort {
namespace {

constexpr double kSpeedGuard = 1e-8;

void CheckLayout(const ControlLayout& layout, const Eigen::VectorXd& x) {
  if (x.size() != layout.size()) {
    throw std::invalid_argument("objective: stacked vector has size " +
                                std::to_string(x.size()) + ", expected " +
                                std::to_string(layout.size()));
  }
}

// Rows: sample parameters t_j = j / (k - 1); columns: control points.
Eigen::MatrixXd SampleWeights(int degree, int k) {
  Eigen::MatrixXd W(k, degree + 1);
  for (int j = 0; j < k; ++j) {
    W.row(j) = bernstein(degree, static_cast<double>(j) / (k - 1)).transpose();
  }
  return W;
}

// Weights mapping control points to the first and second derivative at each
// sample parameter.
void DerivativeWeights(int degree, int k, Eigen::MatrixXd* first,
                       Eigen::MatrixXd* second) {
  first->setZero(k, degree + 1);
  second->setZero(k, degree + 1);
  for (int j = 0; j < k; ++j) {
    const double t = static_cast<double>(j) / (k - 1);
    const Eigen::VectorXd b1 = bernstein(degree - 1, t);
    for (int l = 0; l < degree; ++l) {
      (*first)(j, l + 1) += degree * b1[l];
      (*first)(j, l) -= degree * b1[l];
    }
    if (degree >= 2) {
      const Eigen::VectorXd b2 = bernstein(degree - 2, t);
      const double scale = degree * (degree - 1.0);
      for (int l = 0; l + 2 <= degree; ++l) {
        (*second)(j, l + 2) += scale * b2[l];
        (*second)(j, l + 1) -= 2.0 * scale * b2[l];
        (*second)(j, l) += scale * b2[l];
      }
    }
  }
}

struct SampleIndex {
  int segment;
  int j;
  double t;
};

std::vector<SampleIndex> DedupSampleIndices(const ControlLayout& layout, int k) {
  std::vector<SampleIndex> out;
  for (int s = 0; s < layout.num_segments; ++s) {
    for (int j = (s == 0 ? 0 : 1); j < k; ++j) {
      out.push_back({s, j, static_cast<double>(j) / (k - 1)});
    }
  }
  return out;
}

Eigen::VectorXd Combine(const ControlLayout& layout, const Eigen::VectorXd& x,
                        int segment, const Eigen::RowVectorXd& weights) {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(layout.dim);
  for (int l = 0; l < layout.points_per_segment(); ++l) {
    y += weights[l] * x.segment(layout.offset(segment, l), layout.dim);
  }
  return y;
}

void Scatter(const ControlLayout& layout, int segment,
             const Eigen::RowVectorXd& weights, const Eigen::VectorXd& g,
             Eigen::VectorXd* grad) {
  for (int l = 0; l < layout.points_per_segment(); ++l) {
    grad->segment(layout.offset(segment, l), layout.dim) += weights[l] * g;
  }
}

struct CurvatureTerms {
  double kappa;
  Eigen::VectorXd d_velocity;
  Eigen::VectorXd d_acceleration;
};

CurvatureTerms CurvatureWithGradient(const Eigen::VectorXd& a,
                                     const Eigen::VectorXd& b) {
  CurvatureTerms out{0.0, Eigen::VectorXd::Zero(a.size()),
                     Eigen::VectorXd::Zero(a.size())};
  const double aa = a.squaredNorm();
  if (std::sqrt(aa) < kSpeedGuard) return out;
  const double bb = b.squaredNorm();
  const double ab = a.dot(b);
  const double numerator = aa * bb - ab * ab;
  // Collinear velocity and acceleration: kappa = 0 and sqrt is not
  // differentiable, so the zero subgradient is used.
  if (!(numerator > 1e-24 * aa * bb) || numerator <= 0.0) return out;
  const double root = std::sqrt(numerator);
  const double speed3 = aa * std::sqrt(aa);
  out.kappa = root / speed3;
  const double inner = 1.0 / (root * speed3);
  out.d_velocity = -3.0 * out.kappa / aa * a + inner * (bb * a - ab * b);
  out.d_acceleration = inner * (aa * b - ab * a);
  return out;
}

}  // namespace

Objective::Objective(std::string name, std::map<std::string, double> parameters,
                     ValueFn value, GradientFn gradient)
    : name_(std::move(name)),
      parameters_(std::move(parameters)),
      value_(std::move(value)),
      gradient_(std::move(gradient)) {}

std::string Objective::descriptor() const {
  std::ostringstream out;
  out << name_;
  if (!parameters_.empty()) {
    out << "(";
    bool first = true;
    for (const auto& [key, val] : parameters_) {
      if (!first) out << ", ";
      out << key << "=" << val;
      first = false;
    }
    out << ")";
  }
  return out.str();
}

Objective surrogate_length(const ControlLayout& layout) {
  auto value = [layout](const Eigen::VectorXd& x) {
    CheckLayout(layout, x);
    double total = 0.0;
    for (int s = 0; s < layout.num_segments; ++s) {
      for (int j = 1; j <= layout.degree; ++j) {
        total += (x.segment(layout.offset(s, j), layout.dim) -
                  x.segment(layout.offset(s, j - 1), layout.dim))
                     .squaredNorm();
      }
    }
    return total;
  };
  auto gradient = [layout](const Eigen::VectorXd& x) {
    CheckLayout(layout, x);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
    for (int s = 0; s < layout.num_segments; ++s) {
      for (int j = 1; j <= layout.degree; ++j) {
        const Eigen::VectorXd diff =
            x.segment(layout.offset(s, j), layout.dim) -
            x.segment(layout.offset(s, j - 1), layout.dim);
        g.segment(layout.offset(s, j), layout.dim) += 2.0 * diff;
        g.segment(layout.offset(s, j - 1), layout.dim) -= 2.0 * diff;
      }
    }
    return g;
  };
  return Objective("surrogate_length", {}, value, gradient);
}

Objective undistorted_length(ParametrizationPtr param,
                             const ControlLayout& layout, int k) {
  if (k < 2) {
    throw std::invalid_argument("undistorted_length: need k >= 2");
  }
  if (param->dim_q() != layout.dim) {
    throw std::invalid_argument(
        "undistorted_length: parametrization dimension does not match layout");
  }
  auto weights =
      std::make_shared<const Eigen::MatrixXd>(SampleWeights(layout.degree, k));
  auto indices = std::make_shared<const std::vector<SampleIndex>>(
      DedupSampleIndices(layout, k));

  // Maps every sample through alpha, naming the failing sample on error.
  auto map_samples = [param, layout, weights, indices](
                         const Eigen::VectorXd& x,
                         std::vector<Eigen::VectorXd>* q_samples,
                         std::vector<Eigen::VectorXd>* c_samples) {
    CheckLayout(layout, x);
    for (const auto& idx : *indices) {
      Eigen::VectorXd y = Combine(layout, x, idx.segment, weights->row(idx.j));
      try {
        c_samples->push_back(param->map(y));
      } catch (const ParametrizationError& e) {
        throw ObjectiveError(std::string(e.what()) + " (segment " +
                                 std::to_string(idx.segment) + ", t = " +
                                 std::to_string(idx.t) + ")",
                             idx.segment, idx.t);
      }
      if (q_samples != nullptr) q_samples->push_back(std::move(y));
    }
  };

  auto value = [param, map_samples](const Eigen::VectorXd& x) {
    std::vector<Eigen::VectorXd> c;
    map_samples(x, nullptr, &c);
    double total = 0.0;
    for (std::size_t i = 1; i < c.size(); ++i) {
      total += param->squared_metric(c[i - 1], c[i]).value;
    }
    return total;
  };
  auto gradient = [param, layout, weights, indices,
                   map_samples](const Eigen::VectorXd& x) {
    std::vector<Eigen::VectorXd> q;
    std::vector<Eigen::VectorXd> c;
    map_samples(x, &q, &c);
    std::vector<Eigen::VectorXd> grad_c(
        c.size(), Eigen::VectorXd::Zero(param->dim_c()));
    for (std::size_t i = 1; i < c.size(); ++i) {
      const SquaredMetric sm = param->squared_metric(c[i - 1], c[i]);
      grad_c[i - 1] += sm.wrt_a;
      grad_c[i] += sm.wrt_b;
    }
    Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      const Eigen::VectorXd grad_q =
          param->jacobian(q[i]).transpose() * grad_c[i];
      const auto& idx = (*indices)[i];
      Scatter(layout, idx.segment, weights->row(idx.j), grad_q, &g);
    }
    return g;
  };
  return Objective("undistorted_length",
                   {{"k", static_cast<double>(k)}}, value, gradient);
}

double curvature(const Eigen::VectorXd& velocity,
                 const Eigen::VectorXd& acceleration) {
  return CurvatureWithGradient(velocity, acceleration).kappa;
}

double real_softmax(const std::vector<double>& values, double beta) {
  if (values.empty()) {
    throw std::invalid_argument("real_softmax: no values");
  }
  const double peak = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += std::exp(beta * (v - peak));
  return peak + std::log(sum) / beta;
}

std::vector<double> sample_curvatures(const ControlLayout& layout,
                                      const Eigen::VectorXd& x, int k) {
  CheckLayout(layout, x);
  Eigen::MatrixXd first, second;
  DerivativeWeights(layout.degree, k, &first, &second);
  std::vector<double> out;
  for (int s = 0; s < layout.num_segments; ++s) {
    for (int j = 0; j < k; ++j) {
      out.push_back(curvature(Combine(layout, x, s, first.row(j)),
                              Combine(layout, x, s, second.row(j))));
    }
  }
  return out;
}

Objective curvature_softmax(const ControlLayout& layout, int k, double beta) {
  if (layout.degree < 2) {
    throw std::invalid_argument("curvature_softmax: path degree must be >= 2");
  }
  if (k < 3) {
    throw std::invalid_argument("curvature_softmax: need k >= 3");
  }
  if (!(beta > 0.0)) {
    throw std::invalid_argument("curvature_softmax: beta must be positive");
  }
  auto first = std::make_shared<Eigen::MatrixXd>();
  auto second = std::make_shared<Eigen::MatrixXd>();
  DerivativeWeights(layout.degree, k, first.get(), second.get());

  auto value = [layout, k, beta](const Eigen::VectorXd& x) {
    return real_softmax(sample_curvatures(layout, x, k), beta);
  };
  auto gradient = [layout, k, beta, first, second](const Eigen::VectorXd& x) {
    CheckLayout(layout, x);
    std::vector<CurvatureTerms> terms;
    std::vector<int> segment_of;
    std::vector<int> row_of;
    for (int s = 0; s < layout.num_segments; ++s) {
      for (int j = 0; j < k; ++j) {
        terms.push_back(
            CurvatureWithGradient(Combine(layout, x, s, first->row(j)),
                                  Combine(layout, x, s, second->row(j))));
        segment_of.push_back(s);
        row_of.push_back(j);
      }
    }
    double peak = -std::numeric_limits<double>::infinity();
    for (const auto& t : terms) peak = std::max(peak, t.kappa);
    std::vector<double> w(terms.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      w[i] = std::exp(beta * (terms[i].kappa - peak));
      sum += w[i];
    }
    Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const double wi = w[i] / sum;
      if (wi == 0.0) continue;
      Scatter(layout, segment_of[i], first->row(row_of[i]),
              wi * terms[i].d_velocity, &g);
      Scatter(layout, segment_of[i], second->row(row_of[i]),
              wi * terms[i].d_acceleration, &g);
    }
    return g;
  };
  return Objective("curvature_softmax",
                   {{"k", static_cast<double>(k)}, {"beta", beta}}, value,
                   gradient);
}

Objective weighted_sum(const std::vector<Objective>& objectives,
                       const std::vector<double>& weights) {
  if (objectives.size() != weights.size()) {
    throw std::invalid_argument("weighted_sum: " +
                                std::to_string(objectives.size()) +
                                " objectives but " +
                                std::to_string(weights.size()) + " weights");
  }
  for (double w : weights) {
    if (!(w >= 0.0)) {
      throw std::invalid_argument("weighted_sum: weights must be nonnegative");
    }
  }
  std::map<std::string, double> params;
  for (std::size_t i = 0; i < objectives.size(); ++i) {
    params["w" + std::to_string(i) + ":" + objectives[i].descriptor()] =
        weights[i];
  }
  auto value = [objectives, weights](const Eigen::VectorXd& x) {
    double total = 0.0;
    for (std::size_t i = 0; i < objectives.size(); ++i) {
      if (weights[i] != 0.0) total += weights[i] * objectives[i].value(x);
    }
    return total;
  };
  auto gradient = [objectives, weights](const Eigen::VectorXd& x) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
    for (std::size_t i = 0; i < objectives.size(); ++i) {
      if (weights[i] != 0.0) g += weights[i] * objectives[i].gradient(x);
    }
    return g;
  };
  return Objective("weighted_sum", std::move(params), value, gradient);
}

double grad_check(const Objective& objective, const Eigen::VectorXd& x,
                  double h) {
  if (!(h > 0.0)) throw std::invalid_argument("grad_check: h must be positive");
  const Eigen::VectorXd analytic = objective.gradient(x);
  double worst = 0.0;
  Eigen::VectorXd probe = x;
  for (int i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = objective.value(probe);
    probe[i] = x[i] - h;
    const double down = objective.value(probe);
    probe[i] = x[i];
    const double numeric = (up - down) / (2.0 * h);
    worst = std::max(worst, std::abs(analytic[i] - numeric) /
                                std::max(1.0, std::abs(analytic[i])));
  }
  return worst;
}

}  // namespace undistort
