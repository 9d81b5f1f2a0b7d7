#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "undistort/parametrization.h"
#include "undistort/pgd.h"
#include "undistort/polytope.h"
#include "undistort/topp.h"

namespace undistort {

inline constexpr int kScenarioSchemaVersion = 1;

/// Malformed or inconsistent scenario description.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ParamSpec {
  std::string id;
  nlohmann::json params = nlohmann::json::object();
};

struct ObjectiveSpec {
  /// Any of "undistorted_length", "curvature", "surrogate".
  std::vector<std::string> components{"undistorted_length"};
  std::vector<double> weights{1.0};
  double beta{10.0};
};

struct RandomPairSpec {
  int count{1};
  std::uint64_t seed{0};
  double min_separation{0.0};
};

/// Coordinates of C belonging to the controlled and subordinate arm.
struct ImbalanceSplit {
  std::vector<int> controlled;
  std::vector<int> subordinate;
};

struct RetimeSpec {
  int grid{kDefaultRetimeGrid};
  int k_dense{kDefaultDenseSamples};
};

struct StartGoal {
  Eigen::VectorXd start;
  Eigen::VectorXd goal;
};

struct Scenario {
  std::string name;
  std::string description;
  ParamSpec parametrization;
  int dim_q{0};
  int dim_c{0};
  std::vector<Polytope> sets;
  int degree{3};
  int continuity{1};
  int samples_per_segment{10};
  /// Degree and continuity used for refinement when they differ from the
  /// plan (degree-1 plans are elevated with evenly spaced control points).
  std::optional<int> refine_degree;
  std::optional<int> refine_continuity;
  ObjectiveSpec objective;
  LimitSpec limits;
  PGDConfig pgd;
  std::vector<StartGoal> pairs;
  std::optional<RandomPairSpec> random_pairs;
  std::optional<ImbalanceSplit> imbalance;
  RetimeSpec retime;
};

/// Parses and validates; throws ScenarioError with the offending field.
Scenario scenario_from_json(const nlohmann::json& doc);
nlohmann::json scenario_to_json(const Scenario& scenario);
Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& scenario, const std::string& path);

/// Structural checks: dimensions, parametrization, explicit pairs covered by
/// some set. Throws ScenarioError.
void validate(const Scenario& scenario);

ParametrizationPtr make_parametrization(const ParamSpec& spec, int dim_q);

BimanualGeometry bimanual_geometry_from_json(const nlohmann::json& params);
nlohmann::json bimanual_geometry_to_json(const BimanualGeometry& geometry);

}  // namespace undistort
