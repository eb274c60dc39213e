#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rclqr/errors.hpp"
#include "rclqr/experiment.hpp"
#include "rclqr/presets.hpp"
#include "test_support.hpp"

using namespace rclqr;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("rclqr_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string scalar_config(const std::string& mode, const fs::path& out,
                          const std::string& extra = "") {
  const std::string problem = problem_to_json(test::scalar_testbed());
  return std::string("{\"mode\": \"") + mode + "\", \"problem\": " + problem +
         ", \"initial_policy\": {\"K\": [[0.5]], \"l\": [0.0]}" +
         ", \"output_dir\": \"" + out.string() + "\"" + extra + "}";
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("config validation failures") {
  CHECK_THROWS_AS(ExperimentConfig::from_json(""), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json("{}"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json("{\"mode\": \"nope\"}"), ConfigError);
  CHECK_THROWS_AS(
      ExperimentConfig::from_json("{\"mode\": \"risk-demo\", \"problem\": \"unknown\"}"),
      ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(
                      "{\"mode\": \"risk-demo\", \"problem\": \"paper-model\", \"trials\": 0}"),
                  ConfigError);
  // non-stabilizing initial policy
  const fs::path out = fresh_dir("cfg");
  std::string unstable = scalar_config("inner-compare", out, ", \"mu\": 1.0");
  unstable.replace(unstable.find("[[0.5]]"), 7, "[[-1.0]]");
  CHECK_THROWS_AS(ExperimentConfig::from_json(unstable), ConfigError);
}

TEST_CASE("preset config resolves the paper model") {
  const auto cfg = ExperimentConfig::from_json(
      "{\"mode\": \"model-based-pd\", \"problem\": \"paper-model\"}");
  CHECK(cfg.problem.state_dim() == 4);
  CHECK(cfg.problem.rho_bar == 15.0);
  CHECK(cfg.initial_policy.K(0, 0) == doctest::Approx(0.5));
  CHECK(cfg.sampler.kind() == NoiseSampler::Kind::PaperMixed);
}

TEST_CASE("inner-compare writes monotone relative errors") {
  const fs::path out = fresh_dir("inner");
  auto cfg = ExperimentConfig::from_json(
      scalar_config("inner-compare", out, ", \"mu\": 1.0, \"inner\": {\"grad_tol\": 1e-10}"));
  const auto artifacts = run_experiment(cfg);
  CHECK(artifacts.files.size() == 3);
  for (const char* name : {"inner_pg.csv", "inner_npg.csv", "inner_gn.csv"}) {
    const std::string text = slurp(out / name);
    CHECK(text.rfind("iter,lagrangian,grad_norm,eta,rel_error", 0) == 0);
    // relative error column decreases
    std::istringstream lines(text);
    std::string line;
    std::getline(lines, line);
    double prev = std::numeric_limits<double>::infinity();
    while (std::getline(lines, line)) {
      const double rel = std::stod(line.substr(line.rfind(',') + 1));
      CHECK(rel <= prev + 1e-12);
      prev = rel;
    }
  }
  CHECK(fs::exists(out / "manifest.json"));
}

TEST_CASE("model-based-pd artifacts") {
  const fs::path out = fresh_dir("mbpd");
  auto cfg = ExperimentConfig::from_json(
      scalar_config("model-based-pd", out, ", \"dual\": {\"max_outer\": 5}"));
  run_experiment(cfg);
  const std::string trace = slurp(out / "model_based_trace.csv");
  CHECK(trace.rfind("k,mu,J,Jc,d,D,mu_avg", 0) == 0);
  const std::string solution = slurp(out / "solution.json");
  CHECK(solution.find("\"mu\"") != std::string::npos);
}

TEST_CASE("sample-based-pd reruns are byte-identical") {
  const std::string extra =
      ", \"trials\": 2, \"base_seed\": 31414,"
      " \"dual\": {\"max_outer\": 3},"
      " \"search\": {\"N\": 300, \"eta\": 1e-6, \"r\": 0.1, \"T\": 40}";
  const fs::path out1 = fresh_dir("sb1");
  const fs::path out2 = fresh_dir("sb2");
  run_experiment(ExperimentConfig::from_json(scalar_config("sample-based-pd", out1, extra)));
  run_experiment(ExperimentConfig::from_json(scalar_config("sample-based-pd", out2, extra)));
  for (const char* name :
       {"sample_based_trial_000.csv", "sample_based_trial_001.csv",
        "sample_based_summary.csv"}) {
    CHECK(slurp(out1 / name) == slurp(out2 / name));
  }
  const std::string trial = slurp(out1 / "sample_based_trial_000.csv");
  CHECK(trial.rfind("k,mu,J,Jc,d,D,mu_avg,seed", 0) == 0);
}

TEST_CASE("risk-demo artifacts pair trajectories under a shared seed") {
  const fs::path out = fresh_dir("risk");
  auto cfg = ExperimentConfig::from_json(scalar_config(
      "risk-demo", out, ", \"trials\": 1, \"demo_horizon\": 20, \"risk_horizon\": 2000"));
  run_experiment(cfg);
  CHECK(fs::exists(out / "trajectory_lqr_000.csv"));
  CHECK(fs::exists(out / "trajectory_rclqr_000.csv"));
  const std::string summary = slurp(out / "risk_summary.csv");
  CHECK(summary.rfind("trial,seed,risk_lqr,risk_rclqr,rho,Jc_lqr,Jc_rclqr", 0) == 0);
}

TEST_CASE("plot script emission") {
  const fs::path out = fresh_dir("plot");
  auto cfg = ExperimentConfig::from_json(scalar_config(
      "model-based-pd", out, ", \"dual\": {\"max_outer\": 2}, \"emit_plot_script\": true"));
  run_experiment(cfg);
  const std::string script = slurp(out / "plot.gp");
  CHECK(script.find("model_based_trace.csv") != std::string::npos);
}

TEST_CASE("manifest determines the run") {
  const fs::path out = fresh_dir("manifest");
  auto cfg = ExperimentConfig::from_json(
      scalar_config("model-based-pd", out, ", \"dual\": {\"max_outer\": 2}, \"base_seed\": 7"));
  run_experiment(cfg);
  const std::string manifest = slurp(out / "manifest.json");
  CHECK(manifest.find("\"version\"") != std::string::npos);
  CHECK(manifest.find("\"trial_seeds\"") != std::string::npos);
  CHECK(manifest.find("\"problem\"") != std::string::npos);
  CHECK(manifest.find("\"base_seed\": 7") != std::string::npos);
}

TEST_CASE("verify suite plumbing") {
  CHECK(parse_suite("gradients").has_value());
  CHECK(parse_suite("duality").has_value());
  CHECK(parse_suite("oracles").has_value());
  CHECK(parse_suite("all").has_value());
  CHECK_FALSE(parse_suite("bogus").has_value());
}

}  // TEST_SUITE
