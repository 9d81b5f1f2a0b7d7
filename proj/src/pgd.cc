#include "undistort/pgd.h"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace undistort {

void PGDConfig::Validate() const {
  if (max_iters < 1) throw std::invalid_argument("pgd: max_iters must be >= 1");
  if (window < 1) throw std::invalid_argument("pgd: window must be >= 1");
  if (!(rel_tol > 0.0)) throw std::invalid_argument("pgd: rel_tol must be > 0");
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) {
    throw std::invalid_argument("pgd: armijo_c must lie in (0, 1)");
  }
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
    throw std::invalid_argument("pgd: backtrack_factor must lie in (0, 1)");
  }
  if (initial_step && !(*initial_step > 0.0)) {
    throw std::invalid_argument("pgd: initial_step must be > 0");
  }
  if (max_backtracks < 0) {
    throw std::invalid_argument("pgd: max_backtracks must be >= 0");
  }
  if (!(feas_tol > 0.0)) throw std::invalid_argument("pgd: feas_tol must be > 0");
}

std::string to_string(Termination termination) {
  switch (termination) {
    case Termination::kConverged:
      return "converged";
    case Termination::kMaxIters:
      return "max_iters";
    case Termination::kLineSearchStall:
      return "line_search_stall";
  }
  return "unknown";
}

ConvergenceMonitor::ConvergenceMonitor(int window, double rel_tol)
    : window_(window), rel_tol_(rel_tol) {
  if (window < 1) throw std::invalid_argument("ConvergenceMonitor: window < 1");
  if (!(rel_tol > 0.0)) {
    throw std::invalid_argument("ConvergenceMonitor: rel_tol must be > 0");
  }
}

double ConvergenceMonitor::Average(std::size_t end) const {
  double sum = 0.0;
  for (std::size_t i = end - window_; i < end; ++i) sum += trace_[i];
  return sum / window_;
}

bool ConvergenceMonitor::Push(double cost) {
  trace_.push_back(cost);
  const std::size_t n = trace_.size();
  if (n < static_cast<std::size_t>(window_) + 1) return false;
  const double current = Average(n);
  const double previous = Average(n - 1);
  return std::abs(current - previous) / std::max(std::abs(previous), 1e-12) <
         rel_tol_;
}

FeasibleProjector::FeasibleProjector(const StackedFeasibleSet& feasible,
                                     AffineSubspace hull, double feas_tol)
    : polytope_(feasible.polytope), hull_(std::move(hull)), feas_tol_(feas_tol) {
  if (hull_.ambient_dimension() != polytope_.ambient_dimension()) {
    throw std::invalid_argument("projection: hull dimension mismatch");
  }
}

ProjectionResult FeasibleProjector::operator()(const Eigen::VectorXd& x) {
  if (x.size() != polytope_.ambient_dimension()) {
    throw std::invalid_argument("projection: point dimension mismatch");
  }
  Eigen::VectorXd affine = project_affine(hull_, x);
  if (contains(polytope_, affine, feas_tol_)) return {std::move(affine), false};
  if (!qp_) qp_ = std::make_unique<PolytopeProjector>(polytope_, feas_tol_);
  return {qp_->Project(x), true};
}

ProjectionResult projection(const StackedFeasibleSet& feasible,
                            const AffineSubspace& hull,
                            const Eigen::VectorXd& x, double feas_tol) {
  FeasibleProjector projector(feasible, hull, feas_tol);
  return projector(x);
}

namespace {

template <typename Fn>
auto WithIterateContext(int iteration, Fn&& fn) {
  try {
    return fn();
  } catch (const ObjectiveError& e) {
    throw ObjectiveError("pgd iteration " + std::to_string(iteration) + ": " +
                             e.what(),
                         e.segment(), e.t());
  }
}

}  // namespace

PGDResult pgd_solve(const Objective& objective,
                    const StackedFeasibleSet& feasible,
                    const AffineSubspace& hull, const Eigen::VectorXd& x0,
                    const PGDConfig& config) {
  config.Validate();
  const auto clock_start = std::chrono::steady_clock::now();
  PGDResult result;
  FeasibleProjector project(feasible, hull, config.feas_tol);
  auto count = [&result](const ProjectionResult& p) {
    if (p.used_qp) {
      ++result.qp_projections;
    } else {
      ++result.affine_only_projections;
    }
  };

  Eigen::VectorXd x = x0;
  if (!contains(feasible.polytope, x, config.feas_tol)) {
    ProjectionResult p = project(x);
    count(p);
    x = std::move(p.point);
    if (!contains(feasible.polytope, x, config.feas_tol)) {
      throw std::runtime_error(
          "pgd_solve: starting point remains infeasible after projection "
          "(violation " +
          std::to_string(max_violation(feasible.polytope, x)) + ")");
    }
  }

  double fx = WithIterateContext(0, [&] { return objective.value(x); });
  ConvergenceMonitor monitor(config.window, config.rel_tol);
  monitor.Push(fx);
  result.x_best = x;
  double best = fx;
  std::optional<double> step_bound = config.initial_step;

  result.termination = Termination::kMaxIters;
  for (int it = 1; it <= config.max_iters; ++it) {
    const Eigen::VectorXd g =
        WithIterateContext(it, [&] { return objective.gradient(x); });
    if (!step_bound) step_bound = 1.0 / (1.0 + g.norm());

    double s = *step_bound;
    bool accepted = false;
    Eigen::VectorXd x_next;
    double f_next = 0.0;
    for (int bt = 0; bt <= config.max_backtracks; ++bt, s *= config.backtrack_factor) {
      ProjectionResult p = project(x - s * g);
      count(p);
      if (!contains(feasible.polytope, p.point, config.feas_tol)) continue;
      const double f_candidate =
          WithIterateContext(it, [&] { return objective.value(p.point); });
      const double decrease = g.dot(x - p.point);
      if (std::isfinite(f_candidate) &&
          f_candidate <= fx - config.armijo_c * decrease) {
        x_next = std::move(p.point);
        f_next = f_candidate;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      result.termination = Termination::kLineSearchStall;
      break;
    }
    x = std::move(x_next);
    fx = f_next;
    result.iterations = it;
    if (fx <= best) {
      best = fx;
      result.x_best = x;
    }
    if (monitor.Push(fx)) {
      result.termination = Termination::kConverged;
      break;
    }
  }
  result.cost_trace = monitor.trace();
  result.wall_time = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - clock_start)
                         .count();
  return result;
}

}  // namespace undistort
