#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "undistort/polytope.h"

namespace undistort {

/// minimize 0.5 x'Qx + c'x  subject to  A x <= b,  E x = f.
struct QuadProgram {
  Eigen::MatrixXd Q;
  Eigen::VectorXd c;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::MatrixXd E;
  Eigen::VectorXd f;

  int num_variables() const { return static_cast<int>(c.size()); }

  /// Empty constraint blocks with the right column count.
  static QuadProgram Unconstrained(Eigen::MatrixXd Q, Eigen::VectorXd c);
};

enum class SolveStatus { kOptimal, kMaxIter, kInfeasible, kUnbounded };

std::string to_string(SolveStatus status);

struct SolveReport {
  Eigen::VectorXd x_opt;
  /// Multipliers for A x <= b (nonnegative) and E x = f.
  Eigen::VectorXd ineq_duals;
  Eigen::VectorXd eq_duals;
  double objective{0.0};
  double primal_residual{0.0};
  double dual_residual{0.0};
  int iterations{0};
  SolveStatus status{SolveStatus::kMaxIter};
  bool polished{false};
};

/// Raised when a solve that must succeed does not; carries the report.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, SolveReport report)
      : std::runtime_error(what), report_(std::move(report)) {}
  const SolveReport& report() const { return report_; }

 private:
  SolveReport report_;
};

struct SolverSettings {
  double rho{0.1};
  double sigma{1e-6};
  double relaxation{1.6};
  double eps_abs{1e-6};
  double eps_infeasible{1e-7};
  int max_iter{20000};
  int check_every{10};
  bool polish{true};
};

/// Dense operator-splitting (ADMM) solver for convex QPs.
///
/// The constraint matrix is factorized once per instance, so repeated solves
/// with a new linear term (projections of different points onto the same
/// polytope) only pay for the iterations. After ADMM has approximately
/// identified the active set, the solution is polished by solving the
/// equality-constrained KKT system on that set; the polished point is kept
/// only if it passes the primal, dual and sign checks.
///
/// One solve per instance at a time.
class QpSolver {
 public:
  explicit QpSolver(QuadProgram prog, SolverSettings settings = {});

  /// Replaces the linear cost term; the factorization is reused.
  void set_linear_cost(const Eigen::VectorXd& c);

  SolveReport Solve(const std::optional<Eigen::VectorXd>& warm_start =
                        std::nullopt);

  const QuadProgram& program() const { return prog_; }

 private:
  struct Residuals {
    double primal;
    double dual;
  };

  Residuals Evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
  bool TryPolish(const Eigen::VectorXd& z, const Eigen::VectorXd& y,
                 SolveReport* report) const;
  void Finalize(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                SolveReport* report) const;

  QuadProgram prog_;
  SolverSettings settings_;
  // Stacked, row-normalized constraints l <= C x <= u.
  Eigen::MatrixXd C_;
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
  Eigen::VectorXd row_scale_;
  Eigen::VectorXd rho_;
  Eigen::LLT<Eigen::MatrixXd> kkt_;
};

SolveReport solve(const QuadProgram& prog,
                  const std::optional<Eigen::VectorXd>& warm_start =
                      std::nullopt);

/// Euclidean projection onto a polytope with a cached factorization.
class PolytopeProjector {
 public:
  explicit PolytopeProjector(const Polytope& P,
                             double tol = kDefaultFeasibilityTol);

  /// Returns x0 unchanged when it already lies in P (within tol).
  Eigen::VectorXd Project(const Eigen::VectorXd& x0);

  const Polytope& polytope() const { return polytope_; }
  const SolveReport& last_report() const { return last_report_; }

 private:
  Polytope polytope_;
  double tol_;
  QpSolver solver_;
  SolveReport last_report_;
};

/// argmin ||y - x0||^2 over P. Throws if P is empty or the solver fails.
Eigen::VectorXd project_polytope(const Polytope& P, const Eigen::VectorXd& x0,
                                 double tol = kDefaultFeasibilityTol);

}  // namespace undistort
