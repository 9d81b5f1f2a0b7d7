// Command-line front end: run scenarios, generate experiment scenarios,
// validate scenario files and verify fixtures.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "undistort/experiments.h"
#include "undistort/fixtures.h"
#include "undistort/report.h"
#include "undistort/scenario.h"

namespace {

using namespace undistort;

constexpr int kOk = 0;
constexpr int kPairErrors = 1;
constexpr int kInputError = 2;

void PrintSummary(const RunReport& report) {
  const RunSummary s = report.summary();
  std::cerr << report.scenario << ": " << s.rows << " pairs, " << s.errors << " errors, "
            << s.infeasible << " infeasible, " << s.objective_increases
            << " objective increases\n";
  for (const auto& [name, count] : s.terminations) {
    std::cerr << "  " << name << ": " << count << "\n";
  }
}

int Run(const std::string& path, const std::string& out, const std::string& plots,
        const RunOptions& options) {
  Scenario scenario;
  try {
    scenario = load_scenario(path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  RunReport report;
  try {
    report = run_scenario(scenario, options);
  } catch (const ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  try {
    if (out.empty()) {
      std::cout << to_csv(report);
    } else {
      write_report(report, out);
    }
    if (!plots.empty()) {
      for (const std::string& f : write_plots(scenario, report, plots)) {
        std::cerr << "wrote " << f << "\n";
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  PrintSummary(report);
  for (const PairRow& row : report.rows) {
    if (!row.ok) std::cerr << "pair " << row.pair << ": " << row.error << "\n";
  }
  return report.summary().errors > 0 ? kPairErrors : kOk;
}

int Save(const Scenario& scenario, const std::string& out) {
  try {
    if (out.empty()) {
      std::cout << scenario_to_json(scenario).dump(2) << "\n";
    } else {
      save_scenario(scenario, out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Undistorted path refinement over graphs of convex sets"};
  app.require_subcommand(1);
  int status = kOk;

  auto* run = app.add_subcommand("run", "Plan, refine and retime every pair of a scenario");
  std::string run_path, run_out, run_plots;
  std::optional<std::uint64_t> run_seed;
  std::optional<int> run_pairs, run_iters, run_k;
  run->add_option("scenario", run_path, "Scenario JSON file")->required();
  run->add_option("--out", run_out, "CSV report (stdout when omitted)");
  run->add_option("--plots", run_plots, "Directory for SVG plots");
  run->add_option("--seed", run_seed, "Random-pair seed override");
  run->add_option("--pairs", run_pairs, "Number of pairs")->check(CLI::PositiveNumber);
  run->add_option("--max-iters", run_iters, "PGD iteration cap")->check(CLI::PositiveNumber);
  run->add_option("--k-samples", run_k, "Samples per segment")->check(CLI::Range(2, 100000));
  run->callback([&] {
    RunOptions o;
    o.seed = run_seed;
    o.pairs = run_pairs;
    o.max_iters = run_iters;
    o.k_samples = run_k;
    status = Run(run_path, run_out, run_plots, o);
  });

  std::uint64_t gen_seed = 1;
  std::string gen_out;
  int so3_pairs = 125;
  int bimanual_pairs = 20;

  auto* so3 = app.add_subcommand("gen-so3", "Euler-angle chart cover with random rotations");
  so3->add_option("--seed", gen_seed, "Seed")->required();
  so3->add_option("--out", gen_out, "Output scenario file");
  so3->add_option("--pairs", so3_pairs, "Number of pairs")->capture_default_str();
  so3->callback([&] { status = Save(gen_so3_scenario(gen_seed, so3_pairs), gen_out); });

  auto* rational = app.add_subcommand("gen-rational", "Two-joint corridors in s-space");
  std::string regime = "near-limit";
  rational->add_option("--seed", gen_seed, "Seed")->required();
  rational->add_option("--out", gen_out, "Output scenario file");
  rational->add_option("--regime", regime, "near-limit or near-origin")
      ->check(CLI::IsMember({"near-limit", "near-origin"}));
  rational->callback([&] {
    const auto r = regime == "near-origin" ? RationalRegime::kNearOrigin
                                           : RationalRegime::kNearLimit;
    status = Save(gen_rational_scenario(gen_seed, r), gen_out);
  });

  auto* bimanual = app.add_subcommand("gen-bimanual", "Planar two-arm shelf corridors");
  bimanual->add_option("--seed", gen_seed, "Seed")->required();
  bimanual->add_option("--out", gen_out, "Output scenario file");
  bimanual->add_option("--pairs", bimanual_pairs, "Number of pairs")->capture_default_str();
  bimanual->callback([&] {
    try {
      status = Save(gen_bimanual_scenario(gen_seed, bimanual_pairs), gen_out);
    } catch (const ScenarioError& e) {
      std::cerr << "error: " << e.what() << "\n";
      status = kInputError;
    }
  });

  auto* validate_cmd = app.add_subcommand("validate", "Check a scenario file");
  std::string validate_path;
  validate_cmd->add_option("scenario", validate_path, "Scenario JSON file")->required();
  validate_cmd->callback([&] {
    try {
      const Scenario s = load_scenario(validate_path);
      std::cout << validate_path << ": ok (" << s.sets.size() << " sets)\n";
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      status = kInputError;
    }
  });

  auto* verify = app.add_subcommand("verify", "Run fixtures against their expected metrics");
  std::vector<std::string> fixture_dirs;
  std::optional<std::uint64_t> verify_seed;
  verify->add_option("fixtures", fixture_dirs, "Fixture directories")->required();
  verify->add_option("--seed", verify_seed, "Random-pair seed override");
  verify->callback([&] {
    for (const std::string& dir : fixture_dirs) {
      try {
        VerifyOptions o;
        o.seed = verify_seed;
        const FixtureReport r = verify_fixture(dir, o);
        std::cout << (r.passed() ? "PASS " : "FAIL ") << r.fixture << "\n";
        for (const MetricCheck& c : r.checks) std::cout << "  " << c.describe() << "\n";
        if (!r.passed() && status == kOk) status = kPairErrors;
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        status = kInputError;
      }
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }
  return status;
}
