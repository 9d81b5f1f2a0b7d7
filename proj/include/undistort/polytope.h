#pragma once

#include <Eigen/Dense>

namespace undistort {

/// Membership tolerance shared by feasibility checks and the QP solver's
/// primal tolerance.
inline constexpr double kDefaultFeasibilityTol = 1e-6;

/// Convex polytope in H-representation: {x : A x <= b, E x = f}.
///
/// Equalities are kept explicit so that the affine hull can be read off them
/// directly. A polytope without equalities stores a 0 x n block for E.
class Polytope {
 public:
  Polytope() = default;
  Polytope(Eigen::MatrixXd A, Eigen::VectorXd b);
  Polytope(Eigen::MatrixXd A, Eigen::VectorXd b, Eigen::MatrixXd E,
           Eigen::VectorXd f);

  /// Axis-aligned box lower <= x <= upper.
  static Polytope Box(const Eigen::VectorXd& lower,
                      const Eigen::VectorXd& upper);

  int ambient_dimension() const { return static_cast<int>(A_.cols()); }
  int num_inequalities() const { return static_cast<int>(A_.rows()); }
  int num_equalities() const { return static_cast<int>(E_.rows()); }

  const Eigen::MatrixXd& A() const { return A_; }
  const Eigen::VectorXd& b() const { return b_; }
  const Eigen::MatrixXd& E() const { return E_; }
  const Eigen::VectorXd& f() const { return f_; }

 private:
  Eigen::MatrixXd A_;
  Eigen::VectorXd b_;
  Eigen::MatrixXd E_;
  Eigen::VectorXd f_;
};

/// Affine subspace {origin + basis z}; basis columns are orthonormal.
struct AffineSubspace {
  Eigen::MatrixXd basis;
  Eigen::VectorXd origin;

  int ambient_dimension() const { return static_cast<int>(origin.size()); }
  int dimension() const { return static_cast<int>(basis.cols()); }
};

bool contains(const Polytope& P, const Eigen::VectorXd& x,
              double tol = kDefaultFeasibilityTol);

/// Largest violation of any constraint of P at x (0 when feasible).
double max_violation(const Polytope& P, const Eigen::VectorXd& x);

/// Largest inequality violation only; equalities are ignored.
double max_inequality_violation(const Polytope& P, const Eigen::VectorXd& x);

Polytope intersect(const Polytope& P, const Polytope& Q);

/// Solves a feasibility program; throws std::runtime_error if the solver
/// neither certifies infeasibility nor finds a point.
bool is_empty(const Polytope& P, double tol = kDefaultFeasibilityTol);

/// Affine hull determined by the explicit equality block only.
AffineSubspace affine_hull(const Polytope& P);

Eigen::VectorXd project_affine(const AffineSubspace& S,
                               const Eigen::VectorXd& x);

/// Center of the largest ball inscribed in P within its affine hull.
///
/// The radius is found by an LP. Centers are generally not unique (a 4x2 box
/// admits a whole segment of radius-1 centers), so the returned point is the
/// analytic center of the set shrunk to radius (1 - 1e-7) r*. This tie-break
/// is deterministic and respects the symmetries of P.
Eigen::VectorXd chebyshev_center(const Polytope& P);

}  // namespace undistort
