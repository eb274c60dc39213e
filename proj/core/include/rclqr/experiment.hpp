#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rclqr/inner_solvers.hpp"
#include "rclqr/model.hpp"
#include "rclqr/primal_dual.hpp"
#include "rclqr/simulator.hpp"
#include "rclqr/zeroth_order.hpp"

namespace rclqr {

inline constexpr const char* kVersion = "0.1.0";

enum class ExperimentMode { InnerCompare, ModelBasedPd, SampleBasedPd, RiskDemo };

const char* to_string(ExperimentMode mode);

/// A fully resolved experiment: problem instance, noise model, solver
/// sections, and run bookkeeping. Parsed from a JSON document; see the README
/// for the schema.
struct ExperimentConfig {
  ExperimentMode mode = ExperimentMode::ModelBasedPd;
  std::string problem_preset;  ///< empty when the problem is given inline
  ProblemData problem;
  NoiseSampler sampler;
  Policy initial_policy;
  double mu = 0.0;  ///< inner-compare multiplier
  InnerConfig inner;
  DualConfig dual;
  SampleBasedConfig search;
  int risk_horizon = 100000;
  int demo_horizon = 100;
  std::filesystem::path output_dir = "out";
  int trials = 1;
  std::uint64_t base_seed = 0;
  bool emit_plot_script = false;  ///< also write a gnuplot script for the CSVs

  static ExperimentConfig from_json(const std::string& text);
  static ExperimentConfig from_file(const std::filesystem::path& path);
};

/// Paths of everything a run wrote, for reporting.
struct ExperimentArtifacts {
  std::vector<std::filesystem::path> files;
  std::filesystem::path manifest;
};

/// Executes the configured experiment and writes CSV artifacts plus a JSON
/// manifest of the resolved configuration and seeds into output_dir.
/// Worker-thread fan-out across trials is capped by the RCLQR_THREADS
/// environment variable.
ExperimentArtifacts run_experiment(const ExperimentConfig& config);
ExperimentArtifacts run_experiment(const std::filesystem::path& config_path);

/// One property check of a verification suite.
struct VerifyCheck {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool all_passed() const;
};

enum class VerifySuite { Gradients, Duality, Oracles, All };

std::optional<VerifySuite> parse_suite(const std::string& name);

/// Runs the named property suite with fixed seeds and returns per-check
/// measured values against their tolerances.
VerifyReport verify(VerifySuite suite);

/// Central-difference gradient of the Lagrangian; the reference the analytic
/// gradient is verified against.
Gradient finite_difference_gradient(const Policy& X, double mu, const ProblemData& data,
                                    double step = 1e-5);

/// Rejection-samples a stabilizing policy near the LQR gain of the instance.
Policy random_stabilizing_policy(const ProblemData& data, RngStream& rng, double k_scale = 0.2,
                                 double l_scale = 1.0);

}  // namespace rclqr
