#include "undistort/scenario.h"

#include <fstream>
#include <set>
#include <sstream>

namespace undistort {

using nlohmann::json;

namespace {

void Fail(const std::string& where, const std::string& what) {
  throw ScenarioError(where + ": " + what);
}

void CheckKeys(const json& obj, const std::string& where,
               const std::set<std::string>& allowed) {
  if (!obj.is_object()) Fail(where, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) Fail(where, "unknown field '" + key + "'");
  }
}

const json& Required(const json& obj, const std::string& where,
                     const std::string& key) {
  if (!obj.contains(key)) Fail(where, "missing field '" + key + "'");
  return obj.at(key);
}

double Number(const json& v, const std::string& where) {
  if (!v.is_number()) Fail(where, "expected a number");
  return v.get<double>();
}

int Integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) Fail(where, "expected an integer");
  return v.get<int>();
}

Eigen::VectorXd Vector(const json& v, const std::string& where) {
  if (!v.is_array()) Fail(where, "expected an array of numbers");
  Eigen::VectorXd out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = Number(v[i], where + "[" + std::to_string(i) + "]");
  }
  return out;
}

// Row-major list of rows; `cols` fixes the width of an empty matrix.
Eigen::MatrixXd Matrix(const json& v, const std::string& where, int cols) {
  if (!v.is_array()) Fail(where, "expected an array of rows");
  Eigen::MatrixXd out(v.size(), cols);
  for (std::size_t r = 0; r < v.size(); ++r) {
    const Eigen::VectorXd row = Vector(v[r], where + "[" + std::to_string(r) + "]");
    if (row.size() != cols) {
      Fail(where, "row " + std::to_string(r) + " has " +
                      std::to_string(row.size()) + " entries, expected " +
                      std::to_string(cols));
    }
    out.row(r) = row.transpose();
  }
  return out;
}

json ToJson(const Eigen::VectorXd& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json ToJson(const Eigen::MatrixXd& M) {
  json out = json::array();
  for (int r = 0; r < M.rows(); ++r) out.push_back(ToJson(Eigen::VectorXd(M.row(r).transpose())));
  return out;
}

Polytope ParseSet(const json& v, const std::string& where, int n) {
  if (v.contains("lower") || v.contains("upper")) {
    CheckKeys(v, where, {"lower", "upper"});
    const Eigen::VectorXd lo = Vector(Required(v, where, "lower"), where + ".lower");
    const Eigen::VectorXd hi = Vector(Required(v, where, "upper"), where + ".upper");
    if (lo.size() != n || hi.size() != n) Fail(where, "box bounds must have dim_q entries");
    if ((hi.array() < lo.array()).any()) Fail(where, "box upper < lower");
    return Polytope::Box(lo, hi);
  }
  CheckKeys(v, where, {"A", "b", "E", "f"});
  const Eigen::MatrixXd A = Matrix(Required(v, where, "A"), where + ".A", n);
  const Eigen::VectorXd b = Vector(Required(v, where, "b"), where + ".b");
  Eigen::MatrixXd E(0, n);
  Eigen::VectorXd f(0);
  if (v.contains("E") != v.contains("f")) Fail(where, "E and f must appear together");
  if (v.contains("E")) {
    E = Matrix(v.at("E"), where + ".E", n);
    f = Vector(v.at("f"), where + ".f");
  }
  try {
    return Polytope(A, b, E, f);
  } catch (const std::invalid_argument& e) {
    Fail(where, e.what());
  }
  return {};
}

json SetToJson(const Polytope& P) {
  json out;
  out["A"] = ToJson(P.A());
  out["b"] = ToJson(P.b());
  if (P.num_equalities() > 0) {
    out["E"] = ToJson(P.E());
    out["f"] = ToJson(P.f());
  }
  return out;
}

PlanarArm ParseArm(const json& v, const std::string& where) {
  CheckKeys(v, where, {"base", "base_angle", "links"});
  PlanarArm arm;
  if (v.contains("base")) {
    const Eigen::VectorXd base = Vector(v.at("base"), where + ".base");
    if (base.size() != 2) Fail(where, "base must have 2 entries");
    arm.base = base;
  }
  if (v.contains("base_angle")) arm.base_angle = Number(v.at("base_angle"), where + ".base_angle");
  const Eigen::VectorXd links = Vector(Required(v, where, "links"), where + ".links");
  arm.links.assign(links.data(), links.data() + links.size());
  for (double l : arm.links) {
    if (!(l > 0.0)) Fail(where, "link lengths must be positive");
  }
  return arm;
}

json ArmToJson(const PlanarArm& arm) {
  return {{"base", {arm.base.x(), arm.base.y()}},
          {"base_angle", arm.base_angle},
          {"links", arm.links}};
}

std::vector<int> IndexList(const json& v, const std::string& where) {
  if (!v.is_array()) Fail(where, "expected an array of indices");
  std::vector<int> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(Integer(v[i], where));
  return out;
}

}  // namespace

BimanualGeometry bimanual_geometry_from_json(const json& params) {
  const std::string where = "parametrization.params";
  CheckKeys(params, where, {"leading", "subordinate", "grasp", "elbow_sign"});
  BimanualGeometry g;
  g.leading = ParseArm(Required(params, where, "leading"), where + ".leading");
  g.subordinate = ParseArm(Required(params, where, "subordinate"), where + ".subordinate");
  if (params.contains("grasp")) {
    const json& grasp = params.at("grasp");
    CheckKeys(grasp, where + ".grasp", {"position", "angle"});
    const Eigen::VectorXd pos = Vector(Required(grasp, where + ".grasp", "position"),
                                       where + ".grasp.position");
    if (pos.size() != 2) Fail(where + ".grasp", "position must have 2 entries");
    g.grasp.position = pos;
    g.grasp.angle = Number(Required(grasp, where + ".grasp", "angle"), where + ".grasp.angle");
  }
  if (params.contains("elbow_sign")) g.elbow_sign = Integer(params.at("elbow_sign"), where + ".elbow_sign");
  return g;
}

json bimanual_geometry_to_json(const BimanualGeometry& g) {
  return {{"leading", ArmToJson(g.leading)},
          {"subordinate", ArmToJson(g.subordinate)},
          {"grasp",
           {{"position", {g.grasp.position.x(), g.grasp.position.y()}},
            {"angle", g.grasp.angle}}},
          {"elbow_sign", g.elbow_sign}};
}

ParametrizationPtr make_parametrization(const ParamSpec& spec, int dim_q) {
  const json& p = spec.params;
  if (spec.id == "identity" || spec.id == "rational" || spec.id == "euler_xyz") {
    if (!p.is_object() || !p.empty()) {
      Fail("parametrization.params", "'" + spec.id + "' takes no parameters");
    }
  }
  try {
    if (spec.id == "identity") return identity_param(dim_q);
    if (spec.id == "rational") return rational_param(dim_q);
    if (spec.id == "euler_xyz") return euler_param();
    if (spec.id == "bimanual_planar") {
      return bimanual_planar_param(bimanual_geometry_from_json(p));
    }
  } catch (const std::invalid_argument& e) {
    Fail("parametrization", e.what());
  }
  Fail("parametrization.id", "unknown parametrization '" + spec.id + "'");
  return nullptr;
}

Scenario scenario_from_json(const json& doc) {
  CheckKeys(doc, "scenario",
            {"schema_version", "name", "description", "parametrization", "dim_q",
             "dim_c", "sets", "degree", "continuity", "samples_per_segment",
             "refine", "objective", "limits", "pgd", "pairs", "random_pairs",
             "imbalance", "retime"});
  const int version = Integer(Required(doc, "scenario", "schema_version"), "schema_version");
  if (version != kScenarioSchemaVersion) {
    Fail("schema_version", "unsupported version " + std::to_string(version));
  }
  Scenario s;
  const json& name = Required(doc, "scenario", "name");
  if (!name.is_string()) Fail("name", "expected a string");
  s.name = name.get<std::string>();
  if (doc.contains("description")) {
    if (!doc.at("description").is_string()) Fail("description", "expected a string");
    s.description = doc.at("description").get<std::string>();
  }

  const json& param = Required(doc, "scenario", "parametrization");
  CheckKeys(param, "parametrization", {"id", "params"});
  const json& id = Required(param, "parametrization", "id");
  if (!id.is_string()) Fail("parametrization.id", "expected a string");
  s.parametrization.id = id.get<std::string>();
  if (param.contains("params")) s.parametrization.params = param.at("params");

  s.dim_q = Integer(Required(doc, "scenario", "dim_q"), "dim_q");
  s.dim_c = Integer(Required(doc, "scenario", "dim_c"), "dim_c");
  if (s.dim_q < 1 || s.dim_c < 1) Fail("dim_q", "dimensions must be >= 1");

  const json& sets = Required(doc, "scenario", "sets");
  if (!sets.is_array() || sets.empty()) Fail("sets", "expected a nonempty array");
  for (std::size_t i = 0; i < sets.size(); ++i) {
    s.sets.push_back(ParseSet(sets[i], "sets[" + std::to_string(i) + "]", s.dim_q));
  }

  if (doc.contains("degree")) s.degree = Integer(doc.at("degree"), "degree");
  if (doc.contains("continuity")) s.continuity = Integer(doc.at("continuity"), "continuity");
  if (doc.contains("samples_per_segment")) {
    s.samples_per_segment = Integer(doc.at("samples_per_segment"), "samples_per_segment");
  }
  if (doc.contains("refine")) {
    const json& r = doc.at("refine");
    CheckKeys(r, "refine", {"degree", "continuity"});
    if (r.contains("degree")) s.refine_degree = Integer(r.at("degree"), "refine.degree");
    if (r.contains("continuity")) s.refine_continuity = Integer(r.at("continuity"), "refine.continuity");
  }

  if (doc.contains("objective")) {
    const json& o = doc.at("objective");
    CheckKeys(o, "objective", {"components", "weights", "beta"});
    const json& comps = Required(o, "objective", "components");
    if (!comps.is_array() || comps.empty()) Fail("objective.components", "expected a nonempty array");
    s.objective.components.clear();
    for (const auto& c : comps) {
      if (!c.is_string()) Fail("objective.components", "expected strings");
      s.objective.components.push_back(c.get<std::string>());
    }
    const Eigen::VectorXd w = Vector(Required(o, "objective", "weights"), "objective.weights");
    s.objective.weights.assign(w.data(), w.data() + w.size());
    if (o.contains("beta")) s.objective.beta = Number(o.at("beta"), "objective.beta");
  }

  const json& limits = Required(doc, "scenario", "limits");
  CheckKeys(limits, "limits", {"vel_max", "acc_max"});
  s.limits.vel_max = Vector(Required(limits, "limits", "vel_max"), "limits.vel_max");
  s.limits.acc_max = Vector(Required(limits, "limits", "acc_max"), "limits.acc_max");

  if (doc.contains("pgd")) {
    const json& p = doc.at("pgd");
    CheckKeys(p, "pgd", {"max_iters", "window", "rel_tol", "armijo_c", "backtrack_factor",
                         "initial_step", "max_backtracks", "feas_tol"});
    if (p.contains("max_iters")) s.pgd.max_iters = Integer(p.at("max_iters"), "pgd.max_iters");
    if (p.contains("window")) s.pgd.window = Integer(p.at("window"), "pgd.window");
    if (p.contains("rel_tol")) s.pgd.rel_tol = Number(p.at("rel_tol"), "pgd.rel_tol");
    if (p.contains("armijo_c")) s.pgd.armijo_c = Number(p.at("armijo_c"), "pgd.armijo_c");
    if (p.contains("backtrack_factor")) {
      s.pgd.backtrack_factor = Number(p.at("backtrack_factor"), "pgd.backtrack_factor");
    }
    if (p.contains("initial_step")) s.pgd.initial_step = Number(p.at("initial_step"), "pgd.initial_step");
    if (p.contains("max_backtracks")) {
      s.pgd.max_backtracks = Integer(p.at("max_backtracks"), "pgd.max_backtracks");
    }
    if (p.contains("feas_tol")) s.pgd.feas_tol = Number(p.at("feas_tol"), "pgd.feas_tol");
  }

  if (doc.contains("pairs")) {
    const json& pairs = doc.at("pairs");
    if (!pairs.is_array()) Fail("pairs", "expected an array");
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const std::string where = "pairs[" + std::to_string(i) + "]";
      CheckKeys(pairs[i], where, {"start", "goal"});
      s.pairs.push_back({Vector(Required(pairs[i], where, "start"), where + ".start"),
                         Vector(Required(pairs[i], where, "goal"), where + ".goal")});
    }
  }
  if (doc.contains("random_pairs")) {
    const json& r = doc.at("random_pairs");
    CheckKeys(r, "random_pairs", {"count", "seed", "min_separation"});
    RandomPairSpec spec;
    spec.count = Integer(Required(r, "random_pairs", "count"), "random_pairs.count");
    const json& seed = Required(r, "random_pairs", "seed");
    if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
      Fail("random_pairs.seed", "expected an integer");
    }
    spec.seed = seed.get<std::uint64_t>();
    if (r.contains("min_separation")) {
      spec.min_separation = Number(r.at("min_separation"), "random_pairs.min_separation");
    }
    s.random_pairs = spec;
  }
  if (doc.contains("imbalance")) {
    const json& im = doc.at("imbalance");
    CheckKeys(im, "imbalance", {"controlled", "subordinate"});
    s.imbalance = ImbalanceSplit{
        IndexList(Required(im, "imbalance", "controlled"), "imbalance.controlled"),
        IndexList(Required(im, "imbalance", "subordinate"), "imbalance.subordinate")};
  }
  if (doc.contains("retime")) {
    const json& r = doc.at("retime");
    CheckKeys(r, "retime", {"grid", "k_dense"});
    if (r.contains("grid")) s.retime.grid = Integer(r.at("grid"), "retime.grid");
    if (r.contains("k_dense")) s.retime.k_dense = Integer(r.at("k_dense"), "retime.k_dense");
  }
  validate(s);
  return s;
}

json scenario_to_json(const Scenario& s) {
  json doc;
  doc["schema_version"] = kScenarioSchemaVersion;
  doc["name"] = s.name;
  if (!s.description.empty()) doc["description"] = s.description;
  doc["parametrization"] = {{"id", s.parametrization.id}, {"params", s.parametrization.params}};
  doc["dim_q"] = s.dim_q;
  doc["dim_c"] = s.dim_c;
  doc["sets"] = json::array();
  for (const Polytope& P : s.sets) doc["sets"].push_back(SetToJson(P));
  doc["degree"] = s.degree;
  doc["continuity"] = s.continuity;
  doc["samples_per_segment"] = s.samples_per_segment;
  if (s.refine_degree || s.refine_continuity) {
    json r = json::object();
    if (s.refine_degree) r["degree"] = *s.refine_degree;
    if (s.refine_continuity) r["continuity"] = *s.refine_continuity;
    doc["refine"] = r;
  }
  doc["objective"] = {{"components", s.objective.components},
                      {"weights", s.objective.weights},
                      {"beta", s.objective.beta}};
  doc["limits"] = {{"vel_max", ToJson(s.limits.vel_max)}, {"acc_max", ToJson(s.limits.acc_max)}};
  json pgd = {{"max_iters", s.pgd.max_iters},
              {"window", s.pgd.window},
              {"rel_tol", s.pgd.rel_tol},
              {"armijo_c", s.pgd.armijo_c},
              {"backtrack_factor", s.pgd.backtrack_factor},
              {"max_backtracks", s.pgd.max_backtracks},
              {"feas_tol", s.pgd.feas_tol}};
  if (s.pgd.initial_step) pgd["initial_step"] = *s.pgd.initial_step;
  doc["pgd"] = pgd;
  if (!s.pairs.empty()) {
    doc["pairs"] = json::array();
    for (const auto& p : s.pairs) {
      doc["pairs"].push_back({{"start", ToJson(p.start)}, {"goal", ToJson(p.goal)}});
    }
  }
  if (s.random_pairs) {
    doc["random_pairs"] = {{"count", s.random_pairs->count},
                           {"seed", s.random_pairs->seed},
                           {"min_separation", s.random_pairs->min_separation}};
  }
  if (s.imbalance) {
    doc["imbalance"] = {{"controlled", s.imbalance->controlled},
                        {"subordinate", s.imbalance->subordinate}};
  }
  doc["retime"] = {{"grid", s.retime.grid}, {"k_dense", s.retime.k_dense}};
  return doc;
}

void validate(const Scenario& s) {
  if (s.name.empty()) Fail("name", "must not be empty");
  const ParametrizationPtr param = make_parametrization(s.parametrization, s.dim_q);
  if (param->dim_q() != s.dim_q || param->dim_c() != s.dim_c) {
    Fail("parametrization", "'" + s.parametrization.id + "' maps R^" +
                                std::to_string(param->dim_q()) + " to R^" +
                                std::to_string(param->dim_c()) + ", scenario declares R^" +
                                std::to_string(s.dim_q) + " to R^" + std::to_string(s.dim_c));
  }
  if (s.sets.empty()) Fail("sets", "no sets");
  for (std::size_t i = 0; i < s.sets.size(); ++i) {
    if (s.sets[i].ambient_dimension() != s.dim_q) {
      Fail("sets[" + std::to_string(i) + "]", "dimension differs from dim_q");
    }
  }
  if (s.degree < 1) Fail("degree", "must be >= 1");
  if (s.continuity != 0 && s.continuity != 1) Fail("continuity", "must be 0 or 1");
  if (s.refine_degree && *s.refine_degree < s.degree) {
    Fail("refine.degree", "must be >= degree");
  }
  if (s.refine_degree && s.degree != 1 && *s.refine_degree != s.degree) {
    Fail("refine.degree", "elevation is only defined for degree-1 plans");
  }
  if (s.refine_continuity && *s.refine_continuity != 0 && *s.refine_continuity != 1) {
    Fail("refine.continuity", "must be 0 or 1");
  }
  if (s.samples_per_segment < 2) Fail("samples_per_segment", "must be >= 2");

  const auto& o = s.objective;
  if (o.components.size() != o.weights.size()) {
    Fail("objective", "components and weights differ in length");
  }
  for (std::size_t i = 0; i < o.components.size(); ++i) {
    const std::string& c = o.components[i];
    if (c != "undistorted_length" && c != "curvature" && c != "surrogate") {
      Fail("objective.components", "unknown component '" + c + "'");
    }
    if (!(o.weights[i] >= 0.0)) Fail("objective.weights", "weights must be >= 0");
    const int refine = s.refine_degree.value_or(s.degree);
    if (c == "curvature" && refine < 2) {
      Fail("objective.components", "curvature needs refinement degree >= 2");
    }
  }
  if (!(o.beta > 0.0)) Fail("objective.beta", "must be positive");

  try {
    s.limits.Validate();
    s.pgd.Validate();
  } catch (const std::invalid_argument& e) {
    Fail("limits/pgd", e.what());
  }
  if (s.limits.vel_max.size() != s.dim_c) Fail("limits", "limits must have dim_c entries");
  if (s.retime.grid < 8) Fail("retime.grid", "must be >= 8");
  if (s.retime.k_dense < 2) Fail("retime.k_dense", "must be >= 2");

  if (s.pairs.empty() && !s.random_pairs) Fail("pairs", "need pairs or random_pairs");
  if (s.random_pairs) {
    if (s.random_pairs->count < 1) Fail("random_pairs.count", "must be >= 1");
    if (s.random_pairs->min_separation < 0) Fail("random_pairs.min_separation", "must be >= 0");
  }
  for (std::size_t i = 0; i < s.pairs.size(); ++i) {
    const std::string where = "pairs[" + std::to_string(i) + "]";
    for (const Eigen::VectorXd* p : {&s.pairs[i].start, &s.pairs[i].goal}) {
      if (p->size() != s.dim_q) Fail(where, "point dimension differs from dim_q");
      bool covered = false;
      for (const Polytope& P : s.sets) covered = covered || contains(P, *p, kEdgeTol);
      if (!covered) Fail(where, "point lies in no set");
    }
  }
  if (s.imbalance) {
    const auto check = [&](const std::vector<int>& idx, const char* which) {
      if (idx.empty()) Fail("imbalance", std::string(which) + " group is empty");
      for (int i : idx) {
        if (i < 0 || i >= s.dim_c) Fail("imbalance", "index out of range");
      }
    };
    check(s.imbalance->controlled, "controlled");
    check(s.imbalance->subordinate, "subordinate");
  }
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path + ": cannot open");
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ScenarioError(path + ": " + e.what());
  }
  try {
    return scenario_from_json(doc);
  } catch (const json::exception& e) {
    throw ScenarioError(path + ": " + e.what());
  }
}

void save_scenario(const Scenario& scenario, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ScenarioError(path + ": cannot write");
  out << scenario_to_json(scenario).dump(2) << "\n";
}

}  // namespace undistort
