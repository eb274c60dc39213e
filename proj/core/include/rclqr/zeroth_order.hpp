#pragma once

#include <cstdint>

#include "rclqr/inner_solvers.hpp"
#include "rclqr/lagrangian.hpp"
#include "rclqr/model.hpp"
#include "rclqr/primal_dual.hpp"
#include "rclqr/simulator.hpp"

namespace rclqr {

/// How the random search protects itself against destabilized iterates.
///  - ModelCheck: test rho(A - BK) after each update; on violation the run
///    aborts and returns the last stable iterate with a flag.
///  - OverflowReject: strictly model-free; a diverging oracle rollout rejects
///    the step that produced the current iterate and retries it at half the
///    stepsize.
enum class StabilityGuard { ModelCheck, OverflowReject };

/// One-point sphere-smoothing random search configuration.
struct RandomSearchConfig {
  int N = 1000;           ///< iterations
  double r = 0.2;         ///< smoothing radius
  double eta = 1e-7;      ///< stepsize (eta = 0 freezes the iterate)
  int T = 100;            ///< oracle rollout horizon
  std::uint64_t seed = 0;

  StabilityGuard guard = StabilityGuard::ModelCheck;
  /// Perturb only the gain block K instead of the full
  /// [K, l]; with this flag l is never updated.
  bool perturb_gain_only = false;
  /// Record a trace row every trace_stride iterations (the exact-Lagrangian
  /// diagnostic is the dominant cost of long runs).
  int trace_stride = 1;

  void validate() const;
};

struct RandomSearchResult {
  Policy policy;
  InnerTrace trace;
  bool destabilized = false;
};

/// Uniform perturbation on the Frobenius-unit sphere of the policy space.
/// Returns the perturbed policy X + r U and the direction U (as a policy-
/// shaped pair). With gain_only, U has a zero l block and unit K block.
struct Perturbation {
  Policy perturbed;
  Eigen::MatrixXd U;  ///< m x (n+1); last column is the l block
};
Perturbation perturb(const Policy& X, double r, RngStream& rng, bool gain_only = false);

/// One-point gradient estimate L_hat * (d / r²) * U, split into (dK, dl).
/// d is the dimension of the perturbed space.
Gradient grad_estimate(double L_hat, const Eigen::MatrixXd& U, double r, int d);

/// Algorithm: iterate X <- X - eta * grad_estimate(oracle(X + rU)).
/// The trace records the exact Lagrangian per iterate under ModelCheck and
/// the oracle estimates otherwise.
RandomSearchResult random_search(const Policy& X0, double mu, const RandomSearchConfig& cfg,
                                 const ProblemData& data, const NoiseSampler& sampler);

/// Sample-based outer loop: random-search inner solves and noisy constraint
/// subgradients, with the same multiplier update as the model-based version.
struct SampleBasedConfig {
  double mu_init = 0.0;
  double step_constant = 1.0 / 15.0;
  int max_outer = 50;
  double mu_cap = 1e3;
  RandomSearchConfig search;

  void validate() const;
};

PrimalDualResult sample_based_pd(const SampleBasedConfig& cfg, const ProblemData& data,
                                 const NoiseSampler& sampler, const Policy& X0);

}  // namespace rclqr
