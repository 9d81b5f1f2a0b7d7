#include "undistort/polytope.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "undistort/convex_solver.h"

namespace undistort {
namespace {

void CheckPoint(const Polytope& P, const Eigen::VectorXd& x) {
  if (x.size() != P.ambient_dimension()) {
    throw std::invalid_argument(
        "polytope: point has dimension " + std::to_string(x.size()) +
        ", expected " + std::to_string(P.ambient_dimension()));
  }
}

// Maximizes sum(log(slack)) over {z : G z <= h} starting from a strictly
// feasible point. Rows with a zero normal are ignored.
Eigen::VectorXd AnalyticCenter(const Eigen::MatrixXd& G,
                               const Eigen::VectorXd& h, Eigen::VectorXd z) {
  std::vector<int> rows;
  for (int i = 0; i < G.rows(); ++i) {
    if (G.row(i).norm() > 1e-12) rows.push_back(i);
  }
  const int k = static_cast<int>(z.size());
  auto barrier = [&](const Eigen::VectorXd& p, double* value) {
    double v = 0.0;
    for (int i : rows) {
      const double s = h[i] - G.row(i).dot(p);
      if (s <= 0.0) return false;
      v -= std::log(s);
    }
    *value = v;
    return true;
  };
  double value = 0.0;
  if (!barrier(z, &value)) return z;
  for (int iter = 0; iter < 100; ++iter) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(k);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(k, k);
    for (int i : rows) {
      const double s = h[i] - G.row(i).dot(z);
      const Eigen::VectorXd a = G.row(i).transpose() / s;
      grad += a;
      hess.noalias() += a * a.transpose();
    }
    const Eigen::VectorXd step = -hess.ldlt().solve(grad);
    const double decrement = -grad.dot(step);
    if (!(decrement > 1e-24)) break;
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      const Eigen::VectorXd trial = z + t * step;
      double trial_value = 0.0;
      if (barrier(trial, &trial_value) &&
          trial_value <= value - 0.25 * t * decrement) {
        z = trial;
        value = trial_value;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return z;
}

}  // namespace

Polytope::Polytope(Eigen::MatrixXd A, Eigen::VectorXd b)
    : Polytope(A, b, Eigen::MatrixXd(0, A.cols()), Eigen::VectorXd(0)) {}

Polytope::Polytope(Eigen::MatrixXd A, Eigen::VectorXd b, Eigen::MatrixXd E,
                   Eigen::VectorXd f)
    : A_(std::move(A)), b_(std::move(b)), E_(std::move(E)), f_(std::move(f)) {
  if (A_.rows() != b_.size()) {
    throw std::invalid_argument("Polytope: A and b row counts differ");
  }
  if (E_.rows() != f_.size()) {
    throw std::invalid_argument("Polytope: E and f row counts differ");
  }
  if (E_.rows() == 0) E_.resize(0, A_.cols());
  if (E_.cols() != A_.cols()) {
    throw std::invalid_argument("Polytope: A and E column counts differ");
  }
}

Polytope Polytope::Box(const Eigen::VectorXd& lower,
                       const Eigen::VectorXd& upper) {
  const auto n = lower.size();
  if (upper.size() != n) {
    throw std::invalid_argument("Polytope::Box: bound sizes differ");
  }
  Eigen::MatrixXd A(2 * n, n);
  A << Eigen::MatrixXd::Identity(n, n), -Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd b(2 * n);
  b << upper, -lower;
  return Polytope(std::move(A), std::move(b));
}

double max_inequality_violation(const Polytope& P, const Eigen::VectorXd& x) {
  CheckPoint(P, x);
  if (P.num_inequalities() == 0) return 0.0;
  return std::max(0.0, (P.A() * x - P.b()).maxCoeff());
}

double max_violation(const Polytope& P, const Eigen::VectorXd& x) {
  double v = max_inequality_violation(P, x);
  if (P.num_equalities() > 0) {
    v = std::max(v, (P.E() * x - P.f()).cwiseAbs().maxCoeff());
  }
  return v;
}

bool contains(const Polytope& P, const Eigen::VectorXd& x, double tol) {
  if (tol < 0) throw std::invalid_argument("contains: negative tolerance");
  return max_violation(P, x) <= tol;
}

Polytope intersect(const Polytope& P, const Polytope& Q) {
  const int n = P.ambient_dimension();
  if (Q.ambient_dimension() != n) {
    throw std::invalid_argument("intersect: ambient dimensions differ");
  }
  Eigen::MatrixXd A(P.num_inequalities() + Q.num_inequalities(), n);
  A << P.A(), Q.A();
  Eigen::VectorXd b(A.rows());
  b << P.b(), Q.b();
  Eigen::MatrixXd E(P.num_equalities() + Q.num_equalities(), n);
  E << P.E(), Q.E();
  Eigen::VectorXd f(E.rows());
  f << P.f(), Q.f();
  return Polytope(std::move(A), std::move(b), std::move(E), std::move(f));
}

bool is_empty(const Polytope& P, double tol) {
  const int n = P.ambient_dimension();
  // Projecting the origin doubles as a feasibility program with a unique
  // solution, which keeps the result independent of solver path.
  QuadProgram prog{Eigen::MatrixXd::Identity(n, n), Eigen::VectorXd::Zero(n),
                   P.A(), P.b(), P.E(), P.f()};
  const SolveReport report = solve(prog);
  if (report.status == SolveStatus::kInfeasible) return true;
  if (report.status == SolveStatus::kOptimal) {
    return max_violation(P, report.x_opt) > tol;
  }
  throw std::runtime_error(
      "is_empty: feasibility solve did not converge (status " +
      to_string(report.status) +
      ", primal residual " + std::to_string(report.primal_residual) +
      ", dual residual " + std::to_string(report.dual_residual) + ")");
}

AffineSubspace affine_hull(const Polytope& P) {
  const int n = P.ambient_dimension();
  if (P.num_equalities() == 0) {
    return {Eigen::MatrixXd::Identity(n, n), Eigen::VectorXd::Zero(n)};
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(P.E(),
                                        Eigen::ComputeFullU |
                                            Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cutoff = 1e-10 * std::max(1.0, sv.size() > 0 ? sv[0] : 0.0);
  int rank = 0;
  while (rank < sv.size() && sv[rank] > cutoff) ++rank;

  const Eigen::MatrixXd& U = svd.matrixU();
  const Eigen::MatrixXd& V = svd.matrixV();
  Eigen::VectorXd coeffs = U.leftCols(rank).transpose() * P.f();
  coeffs = coeffs.cwiseQuotient(sv.head(rank));
  Eigen::VectorXd origin = V.leftCols(rank) * coeffs;

  const double residual = (P.E() * origin - P.f()).cwiseAbs().maxCoeff();
  if (residual > 1e-8 * std::max(1.0, P.f().cwiseAbs().maxCoeff())) {
    throw std::invalid_argument(
        "affine_hull: inconsistent equality constraints (residual " +
        std::to_string(residual) + ")");
  }
  return {V.rightCols(n - rank), std::move(origin)};
}

Eigen::VectorXd project_affine(const AffineSubspace& S,
                               const Eigen::VectorXd& x) {
  if (x.size() != S.ambient_dimension()) {
    throw std::invalid_argument("project_affine: dimension mismatch");
  }
  return S.origin + S.basis * (S.basis.transpose() * (x - S.origin));
}

Eigen::VectorXd chebyshev_center(const Polytope& P) {
  const AffineSubspace hull = affine_hull(P);
  const int k = hull.dimension();
  const int m = P.num_inequalities();
  if (k == 0) {
    if (!contains(P, hull.origin)) {
      throw std::runtime_error("chebyshev_center: polytope is empty");
    }
    return hull.origin;
  }

  // Work in hull coordinates x = origin + N z.
  const Eigen::MatrixXd G = P.A() * hull.basis;
  const Eigen::VectorXd h = P.b() - P.A() * hull.origin;
  const Eigen::VectorXd norms = G.rowwise().norm();

  // max r  s.t.  G z + |g_i| r <= h,  r >= 0.
  Eigen::MatrixXd A_lp = Eigen::MatrixXd::Zero(m + 1, k + 1);
  Eigen::VectorXd b_lp = Eigen::VectorXd::Zero(m + 1);
  A_lp.topLeftCorner(m, k) = G;
  A_lp.block(0, k, m, 1) = norms;
  b_lp.head(m) = h;
  A_lp(m, k) = -1.0;
  Eigen::VectorXd c_lp = Eigen::VectorXd::Zero(k + 1);
  c_lp[k] = -1.0;
  QuadProgram lp{Eigen::MatrixXd::Zero(k + 1, k + 1), c_lp, A_lp, b_lp,
                 Eigen::MatrixXd(0, k + 1), Eigen::VectorXd(0)};
  const SolveReport report = solve(lp);
  if (report.status == SolveStatus::kInfeasible) {
    throw std::runtime_error("chebyshev_center: polytope is empty");
  }
  if (report.status == SolveStatus::kUnbounded) {
    throw std::runtime_error("chebyshev_center: polytope is unbounded");
  }
  if (report.status != SolveStatus::kOptimal) {
    throw std::runtime_error("chebyshev_center: LP returned " +
                             to_string(report.status));
  }

  // Bounded iff the recession cone {d : G d <= 0} is trivial.
  for (int j = 0; j < k; ++j) {
    for (double sign : {1.0, -1.0}) {
      Eigen::MatrixXd A_rc(m + 2 * k, k);
      A_rc << G, Eigen::MatrixXd::Identity(k, k),
          -Eigen::MatrixXd::Identity(k, k);
      Eigen::VectorXd b_rc(m + 2 * k);
      b_rc << Eigen::VectorXd::Zero(m), Eigen::VectorXd::Ones(2 * k);
      Eigen::VectorXd c_rc = Eigen::VectorXd::Zero(k);
      c_rc[j] = -sign;
      const SolveReport rc = solve(QuadProgram{
          Eigen::MatrixXd::Zero(k, k), c_rc, A_rc, b_rc,
          Eigen::MatrixXd(0, k), Eigen::VectorXd(0)});
      if (rc.status == SolveStatus::kOptimal && -rc.objective > 1e-7) {
        throw std::runtime_error("chebyshev_center: polytope is unbounded");
      }
    }
  }

  const Eigen::VectorXd z_lp = report.x_opt.head(k);
  const double radius = report.x_opt[k];
  if (radius <= 1e-12) return hull.origin + hull.basis * z_lp;

  for (double shrink = 1e-7; shrink <= 1e-2; shrink *= 10.0) {
    const Eigen::VectorXd h_shrunk = h - (1.0 - shrink) * radius * norms;
    bool interior = true;
    for (int i = 0; i < m; ++i) {
      if (norms[i] > 1e-12 && G.row(i).dot(z_lp) >= h_shrunk[i]) {
        interior = false;
        break;
      }
    }
    if (!interior) continue;
    const Eigen::VectorXd z = AnalyticCenter(G, h_shrunk, z_lp);
    return hull.origin + hull.basis * z;
  }
  return hull.origin + hull.basis * z_lp;
}

}  // namespace undistort
