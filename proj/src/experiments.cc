#include "undistort/experiments.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "undistort/convex_solver.h"
#include "undistort/topp.h"

namespace undistort {

namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

struct Bounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

// Per-coordinate extent of P; axis-aligned rows are read off directly,
// anything else goes through an LP.
Bounds SetBounds(const Polytope& P) {
  const int n = P.ambient_dimension();
  Bounds out{Eigen::VectorXd::Constant(n, -std::numeric_limits<double>::infinity()),
             Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity())};
  bool axis_aligned = P.num_equalities() == 0;
  for (int r = 0; r < P.num_inequalities() && axis_aligned; ++r) {
    int nonzero = 0, col = -1;
    for (int c = 0; c < n; ++c) {
      if (P.A()(r, c) != 0.0) {
        ++nonzero;
        col = c;
      }
    }
    if (nonzero != 1) {
      axis_aligned = false;
      break;
    }
    const double a = P.A()(r, col);
    const double v = P.b()[r] / a;
    if (a > 0) out.upper[col] = std::min(out.upper[col], v);
    else out.lower[col] = std::max(out.lower[col], v);
  }
  if (axis_aligned && out.lower.allFinite() && out.upper.allFinite()) return out;

  for (int i = 0; i < n; ++i) {
    for (double sign : {1.0, -1.0}) {
      QuadProgram lp;
      lp.Q = Eigen::MatrixXd::Zero(n, n);
      lp.c = Eigen::VectorXd::Zero(n);
      lp.c[i] = sign;
      lp.A = P.A();
      lp.b = P.b();
      lp.E = P.E();
      lp.f = P.f();
      const SolveReport r = solve(lp);
      if (r.status != SolveStatus::kOptimal) {
        throw ScenarioError("random_pairs: sets must be bounded and nonempty");
      }
      if (sign > 0) out.lower[i] = r.x_opt[i];
      else out.upper[i] = r.x_opt[i];
    }
  }
  return out;
}

double Separation(const Scenario& s, const Eigen::VectorXd& a,
                  const Eigen::VectorXd& b, const Parametrization& param) {
  if (s.parametrization.id == "euler_xyz") {
    return quaternion_distance(euler_to_quaternion(a), euler_to_quaternion(b));
  }
  return (param.map(a) - param.map(b)).norm();
}

bool Reachable(const Parametrization& param, const Eigen::VectorXd& q) {
  try {
    param.map(q);
    return true;
  } catch (const ParametrizationError&) {
    return false;
  }
}

// Roll and yaw are 2*pi periodic; covers that extend past +-pi give a
// rotation several coordinate representations, and the closest covered pair
// avoids a needless trip around the seam.
StartGoal NearestEulerRepresentatives(const Scenario& s, const StartGoal& pair) {
  const auto representatives = [&](const Eigen::VectorXd& q) {
    std::vector<Eigen::VectorXd> out;
    for (int m : {0, -1, 1}) {
      for (int n : {0, -1, 1}) {
        const Eigen::VectorXd cand = q + Eigen::Vector3d(2 * M_PI * m, 0.0, 2 * M_PI * n);
        if (std::any_of(s.sets.begin(), s.sets.end(),
                        [&](const Polytope& P) { return contains(P, cand, 0.0); })) {
          out.push_back(cand);
        }
      }
    }
    return out;
  };
  StartGoal best = pair;
  double best_dist = (pair.goal - pair.start).norm();
  for (const Eigen::VectorXd& a : representatives(pair.start)) {
    for (const Eigen::VectorXd& b : representatives(pair.goal)) {
      const double d = (b - a).norm();
      if (d < best_dist - 1e-12) {
        best = {a, b};
        best_dist = d;
      }
    }
  }
  return best;
}

std::vector<StartGoal> RandomPairs(const Scenario& s, const RandomPairSpec& spec,
                                   int count) {
  const ParametrizationPtr param = make_parametrization(s.parametrization, s.dim_q);
  Bounds box{Eigen::VectorXd::Constant(s.dim_q, std::numeric_limits<double>::infinity()),
             Eigen::VectorXd::Constant(s.dim_q, -std::numeric_limits<double>::infinity())};
  for (const Polytope& P : s.sets) {
    const Bounds b = SetBounds(P);
    box.lower = box.lower.cwiseMin(b.lower);
    box.upper = box.upper.cwiseMax(b.upper);
  }
  UniformSource rng(spec.seed);
  const auto draw = [&]() -> Eigen::VectorXd {
    for (int attempt = 0; attempt < 1000000; ++attempt) {
      Eigen::VectorXd q(s.dim_q);
      for (int i = 0; i < s.dim_q; ++i) q[i] = rng.Uniform(box.lower[i], box.upper[i]);
      const bool covered = std::any_of(s.sets.begin(), s.sets.end(), [&](const Polytope& P) {
        return contains(P, q, 0.0);
      });
      if (covered && Reachable(*param, q)) return q;
    }
    throw ScenarioError("random_pairs: rejection sampling found no covered point");
  };
  std::vector<StartGoal> pairs;
  for (int attempt = 0; static_cast<int>(pairs.size()) < count; ++attempt) {
    if (attempt > 1000 * count) {
      throw ScenarioError("random_pairs: cannot meet min_separation");
    }
    StartGoal p{draw(), draw()};
    if (s.parametrization.id == "euler_xyz") p = NearestEulerRepresentatives(s, p);
    if (Separation(s, p.start, p.goal, *param) < spec.min_separation) continue;
    if (s.parametrization.id == "euler_xyz" &&
        Separation(s, p.start, p.goal, *param) < 1e-9) {
      continue;
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

Polytope Box(std::initializer_list<double> lo, std::initializer_list<double> hi) {
  return Polytope::Box(Eigen::Map<const Eigen::VectorXd>(lo.begin(), lo.size()),
                       Eigen::Map<const Eigen::VectorXd>(hi.begin(), hi.size()));
}

}  // namespace

UniformSource::UniformSource(std::uint64_t seed) : engine_(seed) {}

double UniformSource::Next() {
  // 53 high bits; std::uniform_real_distribution is implementation-defined.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

RunSummary RunReport::summary() const {
  RunSummary s;
  for (const PairRow& row : rows) {
    ++s.rows;
    if (!row.ok) {
      ++s.errors;
      ++s.terminations["error"];
      continue;
    }
    ++s.terminations[row.termination];
    if (!row.feasible) ++s.infeasible;
    if (row.refined_objective > row.initial_objective) ++s.objective_increases;
  }
  return s;
}

std::vector<StartGoal> resolve_pairs(const Scenario& scenario, const RunOptions& options) {
  if (options.pairs && *options.pairs < 1) throw ScenarioError("pairs: must be >= 1");
  if (scenario.random_pairs) {
    RandomPairSpec spec = *scenario.random_pairs;
    if (options.seed) spec.seed = *options.seed;
    return RandomPairs(scenario, spec, options.pairs.value_or(spec.count));
  }
  std::vector<StartGoal> pairs = scenario.pairs;
  if (options.pairs && *options.pairs < static_cast<int>(pairs.size())) {
    pairs.resize(*options.pairs);
  }
  return pairs;
}

PairPlan plan_pair(const Scenario& s, const SetGraph& graph, const Eigen::VectorXd& start,
                   const Eigen::VectorXd& goal) {
  std::vector<int> indices = discrete_path(graph, start, goal);
  std::vector<Polytope> sequence;
  for (int i : indices) sequence.push_back(s.sets[i]);
  RestrictionProblem plan_problem{sequence, start, goal, s.degree, s.continuity};
  RestrictionResult restriction = convex_restriction(plan_problem);

  const int degree = s.refine_degree.value_or(s.degree);
  const int continuity = s.refine_continuity.value_or(s.continuity);
  RestrictionProblem refine_problem{sequence, start, goal, degree, continuity};
  StackedFeasibleSet feasible = stack_feasible(refine_problem);
  AffineSubspace hull = affine_hull(feasible.polytope);
  CompositePath initial = restriction.path;
  if (degree != initial.degree()) initial = initial.ElevateLinear(degree);
  Eigen::VectorXd x0 = initial.stacked();
  return PairPlan{std::move(indices), std::move(plan_problem), std::move(restriction),
                  std::move(refine_problem), std::move(feasible), std::move(hull),
                  std::move(x0)};
}

Objective build_objective(const Scenario& s, const ParametrizationPtr& param,
                          const ControlLayout& layout, int k) {
  std::vector<Objective> parts;
  std::vector<double> weights;
  for (std::size_t i = 0; i < s.objective.components.size(); ++i) {
    const std::string& c = s.objective.components[i];
    if (c == "undistorted_length") {
      parts.push_back(undistorted_length(param, layout, k));
    } else if (c == "curvature") {
      parts.push_back(curvature_softmax(layout, k, s.objective.beta));
    } else if (c == "surrogate") {
      parts.push_back(surrogate_length(layout));
    } else {
      throw ScenarioError("objective.components: unknown component '" + c + "'");
    }
    weights.push_back(s.objective.weights[i]);
  }
  if (parts.size() == 1 && weights[0] == 1.0) return parts[0];
  return weighted_sum(parts, weights);
}

std::vector<Eigen::VectorXd> cspace_samples(const CompositePath& path,
                                            const Parametrization& param, int k) {
  std::vector<Eigen::VectorXd> out;
  for (const PathSample& p : sample_path(path, k)) out.push_back(param.map(p.point));
  return out;
}

double cspace_length(const CompositePath& path, const Parametrization& param, int k) {
  const std::vector<Eigen::VectorXd> c = cspace_samples(path, param, k);
  double length = 0.0;
  for (std::size_t i = 1; i < c.size(); ++i) length += param.metric(c[i - 1], c[i]);
  return length;
}

double imbalance(const std::vector<Eigen::VectorXd>& path_c, const ImbalanceSplit& split) {
  if (split.controlled.empty() || split.subordinate.empty()) {
    throw std::invalid_argument("imbalance: coordinate groups must be nonempty");
  }
  const auto group_length = [&](const std::vector<int>& idx) {
    double length = 0.0;
    for (std::size_t i = 1; i < path_c.size(); ++i) {
      double sq = 0.0;
      for (int j : idx) {
        if (j < 0 || j >= path_c[i].size()) {
          throw std::invalid_argument("imbalance: coordinate index out of range");
        }
        const double d = path_c[i][j] - path_c[i - 1][j];
        sq += d * d;
      }
      length += std::sqrt(sq);
    }
    return length;
  };
  const double dc = group_length(split.controlled);
  const double ds = group_length(split.subordinate);
  if (dc + ds <= 0.0) return 0.0;
  return (ds - dc) / (ds + dc);
}

double relative_error_slerp(double path_len, const Eigen::Vector4d& q_start,
                            const Eigen::Vector4d& q_goal) {
  if (!(path_len >= 0.0)) throw std::invalid_argument("relative_error_slerp: negative length");
  const double d = quaternion_distance(q_start, q_goal);
  if (d < 1e-9) {
    throw std::invalid_argument("relative_error_slerp: identical rotations");
  }
  return (path_len - d) / d;
}

RunReport run_scenario(const Scenario& s, const RunOptions& options) {
  validate(s);
  RunReport report;
  report.scenario = s.name;
  const ParametrizationPtr param = make_parametrization(s.parametrization, s.dim_q);
  const std::vector<StartGoal> pairs = resolve_pairs(s, options);
  const SetGraph graph = build_graph(s.sets);
  const int k = options.k_samples.value_or(s.samples_per_segment);
  PGDConfig config = s.pgd;
  if (options.max_iters) config.max_iters = *options.max_iters;
  config.Validate();
  const bool so3 = s.parametrization.id == "euler_xyz";

  for (std::size_t i = 0; i < pairs.size(); ++i) {
    PairRow row;
    row.pair = static_cast<int>(i);
    row.start = pairs[i].start;
    row.goal = pairs[i].goal;
    try {
      auto t0 = Clock::now();
      const PairPlan plan = plan_pair(s, graph, row.start, row.goal);
      row.num_sets = static_cast<int>(plan.set_indices.size());
      row.surrogate_cost = plan.restriction.cost;
      row.timings.plan = Seconds(t0);

      t0 = Clock::now();
      const Objective f = build_objective(s, param, plan.feasible.layout, k);
      const PGDResult r = pgd_solve(f, plan.feasible, plan.hull, plan.x0, config);
      row.timings.refine = Seconds(t0);
      row.initial_objective = r.cost_trace.front();
      row.refined_objective = f.value(r.x_best);
      row.pgd_iterations = r.iterations;
      row.termination = to_string(r.termination);
      row.qp_projections = r.qp_projections;
      row.affine_projections = r.affine_only_projections;
      row.feasible = contains(plan.feasible.polytope, r.x_best, kDefaultFeasibilityTol);

      const CompositePath before = CompositePath::FromStacked(plan.feasible.layout, plan.x0);
      const CompositePath after = CompositePath::FromStacked(plan.feasible.layout, r.x_best);
      row.length_before = cspace_length(before, *param, s.retime.k_dense);
      row.length_after = cspace_length(after, *param, s.retime.k_dense);
      if (s.imbalance) {
        row.imbalance_before = imbalance(cspace_samples(before, *param, s.retime.k_dense), *s.imbalance);
        row.imbalance_after = imbalance(cspace_samples(after, *param, s.retime.k_dense), *s.imbalance);
      }
      if (so3) {
        const Eigen::Vector4d qa = euler_to_quaternion(row.start);
        const Eigen::Vector4d qb = euler_to_quaternion(row.goal);
        row.rel_error_before = relative_error_slerp(row.length_before, qa, qb);
        row.rel_error_after = relative_error_slerp(row.length_after, qa, qb);
      }

      t0 = Clock::now();
      row.duration_before = duration_of(before, *param, s.limits, s.retime.k_dense, s.retime.grid);
      row.duration_after = duration_of(after, *param, s.limits, s.retime.k_dense, s.retime.grid);
      row.timings.retime = Seconds(t0);
      row.path_before = before;
      row.path_after = after;
      row.ok = true;
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Generators.

Scenario gen_so3_scenario(std::uint64_t seed, int pairs) {
  if (pairs < 1) throw std::invalid_argument("gen_so3_scenario: pairs must be >= 1");
  Scenario s;
  s.name = "so3_charts";
  s.description =
      "Euler-angle cover of SO(3): roll and yaw in 4 overlapping intervals, "
      "pitch in 2 with a 0.2 rad gimbal margin; 32 boxes.";
  s.parametrization.id = "euler_xyz";
  s.dim_q = 3;
  s.dim_c = 4;
  // Roll and yaw intervals extend past +-pi so the cover wraps around.
  const double circle_overlap = 0.7;
  const double pitch_overlap = 0.3;
  const double margin = 0.2;
  std::vector<std::pair<double, double>> circle;
  for (double c : {-0.75 * M_PI, -0.25 * M_PI, 0.25 * M_PI, 0.75 * M_PI}) {
    circle.emplace_back(c - M_PI / 4 - circle_overlap, c + M_PI / 4 + circle_overlap);
  }
  const std::vector<std::pair<double, double>> pitch = {
      {-M_PI / 2 + margin, pitch_overlap}, {-pitch_overlap, M_PI / 2 - margin}};
  for (const auto& r : circle) {
    for (const auto& p : pitch) {
      for (const auto& y : circle) {
        s.sets.push_back(Box({r.first, p.first, y.first}, {r.second, p.second, y.second}));
      }
    }
  }
  s.degree = 1;
  s.continuity = 0;
  s.refine_degree = 3;
  s.refine_continuity = 0;
  s.samples_per_segment = 10;
  // Quaternion-length gradients are small; a larger bound saves backtracks.
  s.pgd.initial_step = 20.0;
  s.limits = {Eigen::VectorXd::Ones(4), Eigen::VectorXd::Ones(4)};
  s.random_pairs = RandomPairSpec{pairs, seed, 0.1};
  return s;
}

Scenario gen_rational_scenario(std::uint64_t seed, RationalRegime regime) {
  Scenario s;
  s.parametrization.id = "rational";
  s.dim_q = 2;
  s.dim_c = 2;
  s.degree = 3;
  s.continuity = 1;
  s.limits = {Eigen::VectorXd::Constant(2, 1.5), Eigen::VectorXd::Constant(2, 3.0)};
  UniformSource rng(seed);
  if (regime == RationalRegime::kNearLimit) {
    s.name = "rational_near_limit";
    s.description =
        "Two-joint L corridor in tangent half-angle coordinates; each pair "
        "swaps a joint from near its limit (s ~ 8, theta ~ 2.9) to near zero.";
    s.sets = {Box({-1.0, -1.0}, {3.0, 9.0}), Box({-1.0, -1.0}, {9.0, 3.0})};
    for (int i = 0; i < 4; ++i) {
      const Eigen::Vector2d a(rng.Uniform(-0.5, 0.5), rng.Uniform(6.0, 8.5));
      const Eigen::Vector2d b(rng.Uniform(6.0, 8.5), rng.Uniform(-0.5, 0.5));
      s.pairs.push_back(i % 2 == 0 ? StartGoal{a, b} : StartGoal{b, a});
    }
  } else {
    s.name = "rational_near_origin";
    s.description =
        "Two overlapping boxes along the diagonal within |s| <= 0.2, where the "
        "tangent half-angle map is nearly linear.";
    s.sets = {Box({-0.2, -0.2}, {0.05, 0.05}), Box({-0.05, -0.05}, {0.2, 0.2})};
    for (int i = 0; i < 4; ++i) {
      const Eigen::Vector2d a(rng.Uniform(-0.18, -0.1), rng.Uniform(-0.18, -0.1));
      const Eigen::Vector2d b(rng.Uniform(0.1, 0.18), rng.Uniform(0.1, 0.18));
      s.pairs.push_back(i % 2 == 0 ? StartGoal{a, b} : StartGoal{b, a});
    }
  }
  validate(s);
  return s;
}

namespace {

BimanualGeometry ShelfGeometry() {
  BimanualGeometry g;
  g.leading.links = {1.0, 0.8, 0.3};
  g.subordinate.base = Eigen::Vector2d(3.4, 0.0);
  g.subordinate.base_angle = M_PI;
  g.subordinate.links = {0.7, 0.8, 0.8, 0.3};
  g.grasp = {Eigen::Vector2d(0.4, 0.0), M_PI};
  g.elbow_sign = 1;
  return g;
}

}  // namespace

void validate_reachability(const Scenario& s, int samples, std::uint64_t seed) {
  const ParametrizationPtr param = make_parametrization(s.parametrization, s.dim_q);
  UniformSource rng(seed);
  for (std::size_t i = 0; i < s.sets.size(); ++i) {
    const Bounds b = SetBounds(s.sets[i]);
    for (int n = 0; n < samples; ++n) {
      Eigen::VectorXd q(s.dim_q);
      for (int j = 0; j < s.dim_q; ++j) q[j] = rng.Uniform(b.lower[j], b.upper[j]);
      if (!contains(s.sets[i], q, 0.0)) continue;
      if (!Reachable(*param, q)) {
        std::ostringstream msg;
        msg << "sets[" << i << "]: alpha undefined at q = (" << q.transpose() << ")";
        throw ScenarioError(msg.str());
      }
    }
  }
}

Scenario gen_bimanual_scenario(std::uint64_t seed, int pairs) {
  if (pairs < 1) throw std::invalid_argument("gen_bimanual_scenario: pairs must be >= 1");
  Scenario s;
  s.name = "bimanual_shelf";
  s.description =
      "Planar leading arm (3 links) carrying an object grasped by a 4-link "
      "subordinate arm; q = leading joints + subordinate redundancy angle.";
  s.parametrization.id = "bimanual_planar";
  s.parametrization.params = bimanual_geometry_to_json(ShelfGeometry());
  s.dim_q = 4;
  s.dim_c = 7;
  // Found by growing boxes around reachable seeds, then chaining overlaps.
  s.sets = {
      Box({-0.24, 0.26, -1.65, -0.07}, {0.25, 0.70, -1.21, 1.32}),
      Box({-0.07, -0.06, -1.41, -0.20}, {0.52, 0.48, -0.87, 0.29}),
      Box({-0.07, -0.32, -1.03, 0.02}, {0.52, 0.17, -0.49, 0.51}),
      Box({0.24, -0.73, -0.87, -0.33}, {0.78, -0.19, -0.33, 0.21}),
      Box({0.39, -1.06, -0.55, -0.39}, {0.93, -0.52, -0.06, 0.10}),
      Box({0.75, -1.23, -0.23, -1.60}, {1.14, -0.89, 0.21, -0.16}),
  };
  s.degree = 3;
  s.continuity = 1;
  s.limits = {Eigen::VectorXd::Ones(7), Eigen::VectorXd::Constant(7, 2.0)};
  s.random_pairs = RandomPairSpec{pairs, seed, 0.3};
  s.imbalance = ImbalanceSplit{{0, 1, 2}, {3, 4, 5, 6}};
  validate(s);
  validate_reachability(s, kBimanualValidationSamples, seed);
  return s;
}

}  // namespace undistort
