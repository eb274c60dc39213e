#pragma once

#include <filesystem>
#include <vector>

#include "rclqr/lagrangian.hpp"
#include "rclqr/model.hpp"

namespace rclqr {

enum class InnerMethod { PG, NPG, GN };

const char* to_string(InnerMethod method);

/// Configuration of the exact-gradient inner solvers.
///
/// The default stepsizes are the hand-tuned constants of the reference
/// experiment (PG 3e-3, NPG 0.02, GN 0.5); preset_eta returns them.
/// Backtracking uses the Armijo condition with parameters (alpha, beta) and
/// is not available for GN, whose fixed eta = 1/2 is already optimal.
struct InnerConfig {
  InnerMethod method = InnerMethod::GN;
  double eta = 0.5;
  bool backtracking = false;
  double alpha = 0.25;
  double beta = 0.5;
  double grad_tol = 1e-9;
  int max_iters = 100000;

  void validate() const;

  static double preset_eta(InnerMethod method);
  static InnerConfig preset(InnerMethod method);
};

/// Per-iteration record of an inner solve.
struct InnerIterate {
  int iter = 0;
  double lagrangian = 0.0;
  double grad_norm = 0.0;
  double eta = 0.0;
};

/// Iteration history; the Lagrangian column is strictly decreasing across
/// accepted steps.
struct InnerTrace {
  std::vector<InnerIterate> iterates;

  /// CSV with columns iter,lagrangian,grad_norm,eta.
  void write_csv(const std::filesystem::path& path) const;
};

struct InnerResult {
  Policy policy;
  InnerTrace trace;
  bool max_iters_exceeded = false;
};

/// One update of the selected method at fixed stepsize:
///   PG:  X' = X - eta * grad
///   NPG: X' = X - 2 eta [E_K, G_X]
///   GN:  X' = X - 2 eta R_K⁻¹ [E_K, G_X]
/// The candidate is returned whether or not it is stabilizing.
Policy step(const Policy& X, double mu, const InnerConfig& cfg, const ProblemData& data);
Policy step_from_eval(const Policy& X, const LagrangianEval& ev, InnerMethod method, double eta);

/// Armijo backtracking from cfg.eta: shrink by cfg.beta until the candidate
/// is stabilizing and achieves the Armijo decrease. PG and NPG only.
/// Throws LineSearchFailed if eta underflows below 1e-16.
std::pair<Policy, double> backtracking_step(const Policy& X, double mu, const InnerConfig& cfg,
                                            const ProblemData& data);

/// Runs the configured method until ||grad||_F <= grad_tol or max_iters.
/// Steps that destabilize the closed loop (or fail to decrease) are retried
/// with halved stepsize; the returned policy is stabilizing and its
/// Lagrangian never exceeds the initial one.
InnerResult solve_inner(double mu, const Policy& X0, const InnerConfig& cfg,
                        const ProblemData& data);

}  // namespace rclqr
