#include "undistort/convex_solver.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace undistort {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void CheckDimensions(const QuadProgram& prog) {
  const auto n = prog.c.size();
  if (prog.Q.rows() != n || prog.Q.cols() != n) {
    throw std::invalid_argument("QuadProgram: Q must be n x n with n = |c|");
  }
  if (prog.A.cols() != n || prog.A.rows() != prog.b.size()) {
    throw std::invalid_argument("QuadProgram: inequality block has wrong shape");
  }
  if (prog.E.cols() != n || prog.E.rows() != prog.f.size()) {
    throw std::invalid_argument("QuadProgram: equality block has wrong shape");
  }
}

void CheckConvexity(const Eigen::MatrixXd& Q) {
  if (Q.size() == 0) return;
  const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument("QuadProgram: Q is not symmetric");
  }
  // LDLT pivots are unreliable on singular PSD matrices; use eigenvalues.
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      Q, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success ||
      eig.eigenvalues().minCoeff() < -1e-10 * scale) {
    throw std::invalid_argument("QuadProgram: Q is not positive semidefinite");
  }
}

}  // namespace

QuadProgram QuadProgram::Unconstrained(Eigen::MatrixXd Q, Eigen::VectorXd c) {
  const auto n = c.size();
  return QuadProgram{std::move(Q),          std::move(c),
                     Eigen::MatrixXd(0, n), Eigen::VectorXd(0),
                     Eigen::MatrixXd(0, n), Eigen::VectorXd(0)};
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal:
      return "optimal";
    case SolveStatus::kMaxIter:
      return "max_iter";
    case SolveStatus::kInfeasible:
      return "infeasible";
    case SolveStatus::kUnbounded:
      return "unbounded";
  }
  return "unknown";
}

QpSolver::QpSolver(QuadProgram prog, SolverSettings settings)
    : prog_(std::move(prog)), settings_(settings) {
  CheckDimensions(prog_);
  CheckConvexity(prog_.Q);

  const int n = prog_.num_variables();
  const int m_in = static_cast<int>(prog_.A.rows());
  const int m_eq = static_cast<int>(prog_.E.rows());
  const int m = m_in + m_eq;

  C_.resize(m, n);
  lower_.resize(m);
  upper_.resize(m);
  row_scale_.resize(m);
  rho_.resize(m);
  for (int i = 0; i < m; ++i) {
    const bool is_eq = i >= m_in;
    const auto row = is_eq ? prog_.E.row(i - m_in) : prog_.A.row(i);
    const double norm = row.norm();
    const double scale = norm > 1e-14 ? norm : 1.0;
    row_scale_[i] = scale;
    C_.row(i) = row / scale;
    if (is_eq) {
      lower_[i] = upper_[i] = prog_.f[i - m_in] / scale;
      rho_[i] = 1e3 * settings_.rho;
    } else {
      lower_[i] = -kInf;
      upper_[i] = prog_.b[i] / scale;
      rho_[i] = settings_.rho;
    }
  }

  Eigen::MatrixXd K = prog_.Q;
  K.diagonal().array() += settings_.sigma;
  K.noalias() += C_.transpose() * rho_.asDiagonal() * C_;
  kkt_.compute(K);
  if (kkt_.info() != Eigen::Success) {
    throw std::runtime_error("QpSolver: KKT factorization failed");
  }
}

void QpSolver::set_linear_cost(const Eigen::VectorXd& c) {
  if (c.size() != prog_.c.size()) {
    throw std::invalid_argument("QpSolver: linear cost has wrong size");
  }
  prog_.c = c;
}

QpSolver::Residuals QpSolver::Evaluate(const Eigen::VectorXd& x,
                                       const Eigen::VectorXd& y) const {
  // Primal residual against the projected slack, in original row units.
  const Eigen::VectorXd Cx = C_ * x;
  double primal = 0.0;
  for (int i = 0; i < Cx.size(); ++i) {
    const double zi = std::clamp(Cx[i], lower_[i], upper_[i]);
    primal = std::max(primal, std::abs(Cx[i] - zi) * row_scale_[i]);
  }
  Eigen::VectorXd g = prog_.Q * x + prog_.c;
  if (C_.rows() > 0) g.noalias() += C_.transpose() * y;
  return {primal, g.size() > 0 ? g.cwiseAbs().maxCoeff() : 0.0};
}

void QpSolver::Finalize(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                        SolveReport* report) const {
  const int m_in = static_cast<int>(prog_.A.rows());
  const int m_eq = static_cast<int>(prog_.E.rows());
  report->x_opt = x;
  report->objective = 0.5 * x.dot(prog_.Q * x) + prog_.c.dot(x);
  report->ineq_duals =
      y.head(m_in).cwiseQuotient(row_scale_.head(m_in)).cwiseMax(0.0);
  report->eq_duals = y.tail(m_eq).cwiseQuotient(row_scale_.tail(m_eq));
  const Residuals r = Evaluate(x, y);
  report->primal_residual = r.primal;
  report->dual_residual = r.dual;
}

bool QpSolver::TryPolish(const Eigen::VectorXd& z, const Eigen::VectorXd& y,
                         SolveReport* report) const {
  const int n = prog_.num_variables();
  const int m = static_cast<int>(C_.rows());
  std::vector<int> active;
  for (int i = 0; i < m; ++i) {
    const bool is_eq = lower_[i] == upper_[i];
    if (is_eq || upper_[i] - z[i] < y[i]) active.push_back(i);
  }
  const int a = static_cast<int>(active.size());
  constexpr double kDelta = 1e-9;

  Eigen::MatrixXd K0 = Eigen::MatrixXd::Zero(n + a, n + a);
  K0.topLeftCorner(n, n) = prog_.Q;
  Eigen::VectorXd rhs(n + a);
  rhs.head(n) = -prog_.c;
  for (int k = 0; k < a; ++k) {
    K0.block(n + k, 0, 1, n) = C_.row(active[k]);
    K0.block(0, n + k, n, 1) = C_.row(active[k]).transpose();
    rhs[n + k] = upper_[active[k]];
  }
  Eigen::MatrixXd K = K0;
  K.diagonal().head(n).array() += kDelta;
  K.diagonal().tail(a).array() -= kDelta;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);
  Eigen::VectorXd sol = lu.solve(rhs);
  for (int refine = 0; refine < 8; ++refine) {
    sol += lu.solve(rhs - K0 * sol);
  }
  if (!sol.allFinite()) return false;

  const Eigen::VectorXd x = sol.head(n);
  Eigen::VectorXd y_full = Eigen::VectorXd::Zero(m);
  for (int k = 0; k < a; ++k) {
    const int i = active[k];
    const bool is_eq = lower_[i] == upper_[i];
    if (!is_eq && sol[n + k] < -settings_.eps_abs) return false;
    y_full[i] = is_eq ? sol[n + k] : std::max(0.0, sol[n + k]);
  }
  const Residuals r = Evaluate(x, y_full);
  if (r.primal > settings_.eps_abs || r.dual > settings_.eps_abs) return false;

  Finalize(x, y_full, report);
  report->status = SolveStatus::kOptimal;
  report->polished = true;
  return true;
}

SolveReport QpSolver::Solve(const std::optional<Eigen::VectorXd>& warm_start) {
  const int n = prog_.num_variables();
  const int m = static_cast<int>(C_.rows());
  const double sigma = settings_.sigma;
  const double alpha = settings_.relaxation;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  if (warm_start) {
    if (warm_start->size() != n) {
      throw std::invalid_argument("QpSolver: warm start has wrong size");
    }
    x = *warm_start;
  }
  Eigen::VectorXd z = (C_ * x).cwiseMax(lower_).cwiseMin(upper_);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd x_prev = x;
  Eigen::VectorXd y_prev = y;

  SolveReport report;
  const Eigen::VectorXd rho_inv = rho_.cwiseInverse();
  double polish_threshold = 1e-3;
  for (int k = 1; k <= settings_.max_iter; ++k) {
    x_prev = x;
    y_prev = y;
    Eigen::VectorXd rhs = sigma * x - prog_.c;
    if (m > 0) rhs.noalias() += C_.transpose() * (rho_.cwiseProduct(z) - y);
    const Eigen::VectorXd x_tilde = kkt_.solve(rhs);
    const Eigen::VectorXd z_tilde = C_ * x_tilde;
    x = alpha * x_tilde + (1.0 - alpha) * x_prev;
    const Eigen::VectorXd z_relaxed = alpha * z_tilde + (1.0 - alpha) * z;
    z = (z_relaxed + rho_inv.cwiseProduct(y)).cwiseMax(lower_).cwiseMin(upper_);
    y += rho_.cwiseProduct(z_relaxed - z);

    if (k % settings_.check_every != 0 && k != settings_.max_iter) continue;
    report.iterations = k;

    const Eigen::VectorXd Cx = C_ * x;
    double primal = 0.0;
    for (int i = 0; i < m; ++i) {
      primal = std::max(primal, std::abs(Cx[i] - z[i]) * row_scale_[i]);
    }
    Eigen::VectorXd g = prog_.Q * x + prog_.c;
    if (m > 0) g.noalias() += C_.transpose() * y;
    const double dual = n > 0 ? g.cwiseAbs().maxCoeff() : 0.0;

    if (primal <= settings_.eps_abs && dual <= settings_.eps_abs) {
      if (settings_.polish && TryPolish(z, y, &report)) return report;
      Finalize(x, y, &report);
      report.primal_residual = std::max(report.primal_residual, primal);
      report.status = SolveStatus::kOptimal;
      return report;
    }

    if (settings_.polish &&
        ((primal < polish_threshold && dual < polish_threshold) ||
         k % 200 == 0)) {
      if (TryPolish(z, y, &report)) return report;
      polish_threshold *= 0.1;
    }

    // Infeasibility certificates (normalized constraint space).
    const double eps = 1e-5;
    const Eigen::VectorXd dy = y - y_prev;
    const double dy_norm = m > 0 ? dy.cwiseAbs().maxCoeff() : 0.0;
    if (dy_norm > 1e-10) {
      const double ct_dy = (C_.transpose() * dy).cwiseAbs().maxCoeff();
      if (ct_dy <= eps * dy_norm) {
        double support = 0.0;
        bool valid = true;
        for (int i = 0; i < m; ++i) {
          if (dy[i] > 0) {
            if (std::isinf(upper_[i])) {
              if (dy[i] > eps * dy_norm) valid = false;
            } else {
              support += upper_[i] * dy[i];
            }
          } else if (dy[i] < 0) {
            if (std::isinf(lower_[i])) {
              if (dy[i] < -eps * dy_norm) valid = false;
            } else {
              support += lower_[i] * dy[i];
            }
          }
        }
        if (valid && support < -eps * dy_norm) {
          report.status = SolveStatus::kInfeasible;
          Finalize(x, y, &report);
          return report;
        }
      }
    }
    const Eigen::VectorXd dx = x - x_prev;
    const double dx_norm = n > 0 ? dx.cwiseAbs().maxCoeff() : 0.0;
    if (dx_norm > 1e-10) {
      bool unbounded = (prog_.Q * dx).cwiseAbs().maxCoeff() <= eps * dx_norm &&
                       prog_.c.dot(dx) < -eps * dx_norm;
      if (unbounded && m > 0) {
        const Eigen::VectorXd Cdx = C_ * dx;
        for (int i = 0; i < m && unbounded; ++i) {
          if (lower_[i] == upper_[i]) {
            unbounded = std::abs(Cdx[i]) <= eps * dx_norm;
          } else {
            unbounded = Cdx[i] <= eps * dx_norm;
          }
        }
      }
      if (unbounded) {
        report.status = SolveStatus::kUnbounded;
        Finalize(x, y, &report);
        return report;
      }
    }
  }

  if (settings_.polish && TryPolish(z, y, &report)) return report;
  Finalize(x, y, &report);
  report.status = SolveStatus::kMaxIter;
  report.iterations = settings_.max_iter;
  return report;
}

SolveReport solve(const QuadProgram& prog,
                  const std::optional<Eigen::VectorXd>& warm_start) {
  QpSolver solver(prog);
  return solver.Solve(warm_start);
}

PolytopeProjector::PolytopeProjector(const Polytope& P, double tol)
    : polytope_(P),
      tol_(tol),
      solver_(QuadProgram{
          Eigen::MatrixXd::Identity(P.ambient_dimension(),
                                    P.ambient_dimension()),
          Eigen::VectorXd::Zero(P.ambient_dimension()), P.A(), P.b(), P.E(),
          P.f()}) {}

Eigen::VectorXd PolytopeProjector::Project(const Eigen::VectorXd& x0) {
  if (x0.size() != polytope_.ambient_dimension()) {
    throw std::invalid_argument("project_polytope: dimension mismatch");
  }
  if (contains(polytope_, x0, tol_)) return x0;
  solver_.set_linear_cost(-x0);
  last_report_ = solver_.Solve(x0);
  if (last_report_.status == SolveStatus::kInfeasible) {
    throw std::runtime_error("project_polytope: polytope is empty");
  }
  if (last_report_.status != SolveStatus::kOptimal) {
    throw std::runtime_error(
        "project_polytope: solver returned " +
        to_string(last_report_.status) +
        " (primal residual " + std::to_string(last_report_.primal_residual) +
        ", dual residual " + std::to_string(last_report_.dual_residual) + ")");
  }
  return last_report_.x_opt;
}

Eigen::VectorXd project_polytope(const Polytope& P, const Eigen::VectorXd& x0,
                                 double tol) {
  PolytopeProjector projector(P, tol);
  return projector.Project(x0);
}

}  // namespace undistort
