#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rclqr/inner_solvers.hpp"
#include "rclqr/model.hpp"

namespace rclqr {

/// Outer-loop configuration shared by the model-based and sample-based
/// primal-dual algorithms. The multiplier stepsize is zeta_k = c / sqrt(k)
/// and mu is projected onto [0, mu_cap].
struct DualConfig {
  double mu_init = 0.0;
  double step_constant = 1.0 / 15.0;
  int max_outer = 200;
  double mu_cap = 1e3;
  InnerConfig inner;

  /// Stop once |d^k| <= stop_tol * rho_bar (active constraint met). Set to 0
  /// to disable and always run max_outer iterations.
  double stop_tol = 1e-4;

  void validate() const;
};

struct PrimalDualRecord {
  int k = 0;
  double mu = 0.0;
  double J = 0.0;
  double Jc = 0.0;
  double d = 0.0;
  double D = 0.0;
  double mu_avg = 0.0;
};

/// Per-outer-iteration history, including the policies themselves.
struct PrimalDualTrace {
  std::vector<PrimalDualRecord> records;
  std::vector<Policy> policies;

  /// CSV with columns k,mu,J,Jc,d,D,mu_avg. A seed value appends a per-trial
  /// seed column (used by the sample-based runs).
  void write_csv(const std::filesystem::path& path,
                 std::optional<std::uint64_t> seed = std::nullopt) const;
};

struct PrimalDualResult {
  PrimalDualTrace trace;
  Policy X_star;
  double mu_star = 0.0;
  double J_star = 0.0;
  double Jc_star = 0.0;
  double D_star_estimate = 0.0;
  int best_index = 0;
};

struct DualValue {
  double value = 0.0;
  Policy X_star;
};

/// D(mu) = min_X L(X, mu) via the exact critical-point route.
DualValue dual_value(double mu, const ProblemData& data);

/// Same quantity via the iterative inner solver; used as a cross-check of the
/// exact route.
DualValue dual_value_iterative(double mu, const ProblemData& data, const InnerConfig& inner,
                               const Policy& X0);

/// The model-based primal-dual loop: exact inner solves warm-started at the
/// previous iterate, subgradient ascent with projection on the multiplier.
PrimalDualResult run_model_based(const DualConfig& cfg, const ProblemData& data,
                                 const Policy& X0);

/// Exact primal-dual solution found by bisection on mu (diagnostic; the
/// monotone constraint value makes mu* = inf{mu : J_c(X*(mu)) <= rho_bar}
/// a one-dimensional root-finding problem).
struct ExactSolution {
  Policy X;
  double mu = 0.0;
  double J = 0.0;
  double Jc = 0.0;
  double D = 0.0;
};
ExactSolution solve_exact_bisection(const ProblemData& data, double mu_tol = 1e-10);

/// Golden-section refinement of max_mu D(mu) in a bracket around mu_center.
double refine_dual_optimum(const ProblemData& data, double mu_center, double radius);

/// JSON document for the reported policy-multiplier pair.
std::string solution_to_json(const PrimalDualResult& result);

}  // namespace rclqr
