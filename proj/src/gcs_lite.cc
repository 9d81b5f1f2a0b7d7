#include "undistort/gcs_lite.h"

#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>

namespace undistort {

std::vector<std::vector<std::pair<int, double>>> SetGraph::Adjacency() const {
  std::vector<std::vector<std::pair<int, double>>> adjacency(vertices.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [i, j] = edges[e];
    adjacency[i].emplace_back(j, edge_weights[e]);
    adjacency[j].emplace_back(i, edge_weights[e]);
  }
  return adjacency;
}

SetGraph build_graph(const std::vector<Polytope>& sets) {
  SetGraph graph;
  graph.vertices = sets;
  if (sets.empty()) return graph;
  const int n = sets.front().ambient_dimension();
  for (const auto& set : sets) {
    if (set.ambient_dimension() != n) {
      throw std::invalid_argument("build_graph: sets differ in dimension");
    }
    graph.centers.push_back(chebyshev_center(set));
  }
  for (std::size_t i = 0; i < sets.size(); ++i) {
    for (std::size_t j = i + 1; j < sets.size(); ++j) {
      if (is_empty(intersect(sets[i], sets[j]), kEdgeTol)) continue;
      graph.edges.emplace_back(static_cast<int>(i), static_cast<int>(j));
      graph.edge_weights.push_back(
          (graph.centers[i] - graph.centers[j]).norm());
    }
  }
  return graph;
}

std::vector<int> discrete_path(const SetGraph& graph,
                               const Eigen::VectorXd& start,
                               const Eigen::VectorXd& goal) {
  const int V = static_cast<int>(graph.vertices.size());
  const int source = V;
  const int target = V + 1;
  auto adjacency = graph.Adjacency();
  adjacency.resize(V + 2);
  bool start_covered = false;
  bool goal_covered = false;
  for (int v = 0; v < V; ++v) {
    if (contains(graph.vertices[v], start, kEdgeTol)) {
      adjacency[source].emplace_back(v, (start - graph.centers[v]).norm());
      start_covered = true;
    }
    if (contains(graph.vertices[v], goal, kEdgeTol)) {
      adjacency[v].emplace_back(target, (goal - graph.centers[v]).norm());
      goal_covered = true;
    }
  }
  if (!start_covered) {
    throw std::invalid_argument("discrete_path: start lies in no set");
  }
  if (!goal_covered) {
    throw std::invalid_argument("discrete_path: goal lies in no set");
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(V + 2, kInf);
  std::vector<int> parent(V + 2, -1);
  std::vector<bool> done(V + 2, false);
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  dist[source] = 0.0;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (done[u]) continue;
    done[u] = true;
    if (u == target) break;
    for (const auto& [v, w] : adjacency[u]) {
      if (done[v]) continue;
      const double candidate = d + w;
      // Equal-cost ties go to the lower-index predecessor.
      if (candidate < dist[v] ||
          (candidate == dist[v] && parent[v] >= 0 && u < parent[v])) {
        dist[v] = candidate;
        parent[v] = u;
        queue.emplace(candidate, v);
      }
    }
  }
  if (!done[target]) {
    throw std::runtime_error("discrete_path: goal is unreachable from start");
  }
  std::vector<int> sequence;
  for (int v = parent[target]; v != source; v = parent[v]) {
    sequence.push_back(v);
  }
  return {sequence.rbegin(), sequence.rend()};
}

StackedFeasibleSet stack_feasible(const RestrictionProblem& problem) {
  if (problem.sequence.empty()) {
    throw std::invalid_argument("stack_feasible: empty set sequence");
  }
  if (problem.degree < 1) {
    throw std::invalid_argument("stack_feasible: degree must be >= 1");
  }
  if (problem.continuity_order != 0 && problem.continuity_order != 1) {
    throw std::invalid_argument("stack_feasible: continuity order must be 0 or 1");
  }
  const int n = problem.sequence.front().ambient_dimension();
  for (const auto& set : problem.sequence) {
    if (set.ambient_dimension() != n) {
      throw std::invalid_argument("stack_feasible: sets differ in dimension");
    }
  }
  if (problem.start.size() != n || problem.goal.size() != n) {
    throw std::invalid_argument("stack_feasible: start/goal dimension mismatch");
  }
  if (!contains(problem.sequence.front(), problem.start, kEdgeTol)) {
    throw std::invalid_argument("stack_feasible: start is outside the first set");
  }
  if (!contains(problem.sequence.back(), problem.goal, kEdgeTol)) {
    throw std::invalid_argument("stack_feasible: goal is outside the last set");
  }
  for (std::size_t i = 0; i + 1 < problem.sequence.size(); ++i) {
    if (is_empty(intersect(problem.sequence[i], problem.sequence[i + 1]),
                 kEdgeTol)) {
      throw std::invalid_argument("stack_feasible: sets " + std::to_string(i) +
                                  " and " + std::to_string(i + 1) +
                                  " do not intersect");
    }
  }

  const ControlLayout layout{static_cast<int>(problem.sequence.size()),
                             problem.degree, n};
  const int S = layout.num_segments;
  const int d = layout.degree;
  const int N = layout.size();

  int rows_in = 0;
  int rows_set_eq = 0;
  for (const auto& set : problem.sequence) {
    rows_in += set.num_inequalities() * (d + 1);
    rows_set_eq += set.num_equalities() * (d + 1);
  }
  const int junctions = S - 1;
  const int rows_eq = rows_set_eq + 2 * n + junctions * n *
                                                (1 + problem.continuity_order);

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows_in, N);
  Eigen::VectorXd b(rows_in);
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(rows_eq, N);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(rows_eq);

  int r = 0;
  int q = 0;
  for (int s = 0; s < S; ++s) {
    const Polytope& set = problem.sequence[s];
    for (int j = 0; j <= d; ++j) {
      const int col = layout.offset(s, j);
      A.block(r, col, set.num_inequalities(), n) = set.A();
      b.segment(r, set.num_inequalities()) = set.b();
      r += set.num_inequalities();
      E.block(q, col, set.num_equalities(), n) = set.E();
      f.segment(q, set.num_equalities()) = set.f();
      q += set.num_equalities();
    }
  }
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  E.block(q, layout.offset(0, 0), n, n) = I;
  f.segment(q, n) = problem.start;
  q += n;
  E.block(q, layout.offset(S - 1, d), n, n) = I;
  f.segment(q, n) = problem.goal;
  q += n;
  for (int s = 0; s + 1 < S; ++s) {
    E.block(q, layout.offset(s, d), n, n) = I;
    E.block(q, layout.offset(s + 1, 0), n, n) = -I;
    q += n;
    if (problem.continuity_order == 1) {
      // Equal degrees, so the factor d cancels.
      E.block(q, layout.offset(s, d), n, n) += I;
      E.block(q, layout.offset(s, d - 1), n, n) -= I;
      E.block(q, layout.offset(s + 1, 1), n, n) -= I;
      E.block(q, layout.offset(s + 1, 0), n, n) += I;
      q += n;
    }
  }
  return {Polytope(std::move(A), std::move(b), std::move(E), std::move(f)),
          layout};
}

Eigen::MatrixXd surrogate_hessian(const ControlLayout& layout) {
  const int N = layout.size();
  const int n = layout.dim;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(N, N);
  const Eigen::MatrixXd I2 = 2.0 * Eigen::MatrixXd::Identity(n, n);
  for (int s = 0; s < layout.num_segments; ++s) {
    for (int j = 1; j <= layout.degree; ++j) {
      const int a = layout.offset(s, j - 1);
      const int c = layout.offset(s, j);
      H.block(a, a, n, n) += I2;
      H.block(c, c, n, n) += I2;
      H.block(a, c, n, n) -= I2;
      H.block(c, a, n, n) -= I2;
    }
  }
  return H;
}

Eigen::VectorXd straight_line_initialization(const RestrictionProblem& problem) {
  const int S = static_cast<int>(problem.sequence.size());
  const int d = problem.degree;
  const int n = static_cast<int>(problem.start.size());
  const ControlLayout layout{S, d, n};
  Eigen::VectorXd x(layout.size());
  const double total = static_cast<double>(S * d);
  for (int s = 0; s < S; ++s) {
    for (int j = 0; j <= d; ++j) {
      const double u = (s * d + j) / total;
      x.segment(layout.offset(s, j), n) =
          (1.0 - u) * problem.start + u * problem.goal;
    }
  }
  return x;
}

RestrictionResult convex_restriction(const RestrictionProblem& problem) {
  StackedFeasibleSet feasible = stack_feasible(problem);
  const ControlLayout& layout = feasible.layout;
  const Polytope& P = feasible.polytope;
  QuadProgram prog{surrogate_hessian(layout),
                   Eigen::VectorXd::Zero(layout.size()),
                   P.A(), P.b(), P.E(), P.f()};
  QpSolver solver(std::move(prog));
  SolveReport report = solver.Solve(straight_line_initialization(problem));
  if (report.status != SolveStatus::kOptimal) {
    throw SolverError("convex_restriction: solver returned " +
                          to_string(report.status),
                      report);
  }
  if (!contains(P, report.x_opt, kDefaultFeasibilityTol)) {
    throw SolverError("convex_restriction: solution violates constraints by " +
                          std::to_string(max_violation(P, report.x_opt)),
                      report);
  }
  const double cost = std::max(0.0, report.objective);
  return {CompositePath::FromStacked(layout, report.x_opt), cost,
          std::move(report)};
}

}  // namespace undistort
