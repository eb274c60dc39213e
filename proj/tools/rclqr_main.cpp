#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <string>

#include "rclqr/errors.hpp"
#include "rclqr/experiment.hpp"
#include "rclqr/model.hpp"
#include "rclqr/presets.hpp"

namespace {

// Exit codes: 0 ok, 2 validation, 3 solver failure, 4 verification failure.
constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;
constexpr int kExitVerification = 4;

int cmd_run(const std::string& config_path) {
  try {
    const rclqr::ExperimentArtifacts artifacts = rclqr::run_experiment(config_path);
    for (const auto& f : artifacts.files) std::printf("wrote %s\n", f.string().c_str());
    std::printf("wrote %s\n", artifacts.manifest.string().c_str());
    return kExitOk;
  } catch (const rclqr::ConfigError& e) {
    std::fprintf(stderr, "{\"error\": \"validation\", \"message\": \"%s\"}\n", e.what());
    return kExitValidation;
  } catch (const rclqr::Error& e) {
    std::fprintf(stderr, "{\"error\": \"solver\", \"message\": \"%s\"}\n", e.what());
    return kExitSolver;
  }
}

int cmd_verify(const std::string& suite_name) {
  const auto suite = rclqr::parse_suite(suite_name);
  if (!suite) {
    std::fprintf(stderr, "unknown suite '%s' (gradients|duality|oracles|all)\n",
                 suite_name.c_str());
    return kExitValidation;
  }
  try {
    const rclqr::VerifyReport report = rclqr::verify(*suite);
    for (const auto& c : report.checks) {
      std::printf("%-28s %s  measured %.3e  tolerance %.3e  %s\n", c.name.c_str(),
                  c.pass ? "PASS" : "FAIL", c.measured, c.tolerance, c.detail.c_str());
    }
    std::printf("%zu checks, %s\n", report.checks.size(),
                report.all_passed() ? "all passed" : "FAILURES PRESENT");
    return report.all_passed() ? kExitOk : kExitVerification;
  } catch (const rclqr::Error& e) {
    std::fprintf(stderr, "{\"error\": \"solver\", \"message\": \"%s\"}\n", e.what());
    return kExitSolver;
  }
}

int cmd_preset_list() {
  const auto& data = rclqr::paper_problem();
  std::printf("paper-model  n=%d m=%d rho_bar=%g\n", data.state_dim(), data.input_dim(),
              data.rho_bar);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk-constrained LQR policy-gradient primal-dual solver"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
  run->add_option("config", config_path, "Path to the experiment config")->required();

  std::string suite = "all";
  auto* ver = app.add_subcommand("verify", "Run a property-check suite with fixed seeds");
  ver->add_option("suite", suite, "gradients|duality|oracles|all");

  auto* preset = app.add_subcommand("preset", "Preset utilities");
  auto* preset_list = preset->add_subcommand("list", "List built-in problem presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  }

  if (run->parsed()) return cmd_run(config_path);
  if (ver->parsed()) return cmd_verify(suite);
  if (preset->parsed() && preset_list->parsed()) return cmd_preset_list();
  std::fprintf(stderr, "missing subcommand\n");
  return kExitValidation;
}
