#include "rclqr/zeroth_order.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rclqr/constraint.hpp"
#include "rclqr/errors.hpp"
#include "rclqr/linalg.hpp"

namespace rclqr {
namespace {

constexpr double kEtaUnderflow = 1e-16;

Policy apply_update(const Policy& X, const Gradient& grad, double eta) {
  return Policy{X.K - eta * grad.dK, X.l - eta * grad.dl};
}

}  // namespace

void RandomSearchConfig::validate() const {
  if (N <= 0) throw ConfigError("RandomSearchConfig: N must be positive");
  if (r <= 0.0) throw ConfigError("RandomSearchConfig: r must be positive");
  if (eta < 0.0) throw ConfigError("RandomSearchConfig: eta must be nonnegative");
  if (T <= 0) throw ConfigError("RandomSearchConfig: T must be positive");
  if (trace_stride <= 0) throw ConfigError("RandomSearchConfig: trace_stride must be positive");
}

void SampleBasedConfig::validate() const {
  if (mu_init < 0.0) throw ConfigError("SampleBasedConfig: mu_init must be nonnegative");
  if (mu_cap <= mu_init) throw ConfigError("SampleBasedConfig: require mu_cap > mu_init");
  if (step_constant <= 0.0) throw ConfigError("SampleBasedConfig: step_constant must be positive");
  if (max_outer <= 0) throw ConfigError("SampleBasedConfig: max_outer must be positive");
  search.validate();
}

Perturbation perturb(const Policy& X, double r, RngStream& rng, bool gain_only) {
  if (r < 0.0) throw ConfigError("perturb: r must be nonnegative");
  const int m = X.input_dim();
  const int n = X.state_dim();
  Perturbation out;
  out.U = Eigen::MatrixXd::Zero(m, n + 1);
  if (gain_only) {
    const Eigen::VectorXd u = rng.unit_sphere(m * n);
    out.U.leftCols(n) = Eigen::Map<const Eigen::MatrixXd>(u.data(), m, n);
  } else {
    const Eigen::VectorXd u = rng.unit_sphere(m * (n + 1));
    out.U = Eigen::Map<const Eigen::MatrixXd>(u.data(), m, n + 1);
  }
  out.perturbed.K = X.K + r * out.U.leftCols(n);
  out.perturbed.l = X.l + r * out.U.col(n);
  return out;
}

Gradient grad_estimate(double L_hat, const Eigen::MatrixXd& U, double r, int d) {
  if (r <= 0.0) throw ConfigError("grad_estimate: r must be positive");
  const auto n = U.cols() - 1;
  const Eigen::MatrixXd scaled = (L_hat * static_cast<double>(d) / (r * r)) * U;
  return Gradient{scaled.leftCols(n), scaled.col(n)};
}

RandomSearchResult random_search(const Policy& X0, double mu, const RandomSearchConfig& cfg,
                                 const ProblemData& data, const NoiseSampler& sampler) {
  cfg.validate();
  if (!is_stabilizing(data.A, data.B, X0.K)) {
    throw UnstableClosedLoop("random_search: X0 is not stabilizing");
  }
  const int n = X0.state_dim();
  const int m = X0.input_dim();
  const int d = cfg.perturb_gain_only ? m * n : m * (n + 1);

  RandomSearchResult result;
  result.policy = X0;
  RngStream perturb_stream(derive_seed(cfg.seed, "rs-perturb"));

  // Kept so an overflow-detected divergence can rewind and retry the step
  // that produced the current iterate.
  Policy step_base = X0;
  Gradient step_grad{Eigen::MatrixXd::Zero(m, n), Eigen::VectorXd::Zero(m)};
  double step_eta = 0.0;

  for (int i = 0; i < cfg.N; ++i) {
    const Perturbation p = perturb(result.policy, cfg.r, perturb_stream, cfg.perturb_gain_only);

    double L_hat = 0.0;
    try {
      L_hat = noisy_lagrangian(p.perturbed, mu, cfg.T, data, sampler,
                               derive_seed(cfg.seed, "rs-oracle", static_cast<std::uint64_t>(i)));
    } catch (const Overflow&) {
      if (cfg.guard == StabilityGuard::ModelCheck) {
        result.destabilized = true;
        break;
      }
      // Model-free: the current iterate is diverging. Rewind the step that
      // produced it and retry at half the stepsize.
      step_eta *= 0.5;
      if (step_eta < kEtaUnderflow) {
        result.destabilized = true;
        break;
      }
      result.policy = apply_update(step_base, step_grad, step_eta);
      --i;
      continue;
    }

    const Gradient grad = grad_estimate(L_hat, p.U, cfg.r, d);
    const Policy candidate = apply_update(result.policy, grad, cfg.eta);

    if (cfg.guard == StabilityGuard::ModelCheck &&
        !is_stabilizing(data.A, data.B, candidate.K)) {
      result.destabilized = true;
      break;
    }
    if (i % cfg.trace_stride == 0) {
      const double trace_value = cfg.guard == StabilityGuard::ModelCheck
                                     ? evaluate_lagrangian(result.policy, mu, data).value
                                     : L_hat;
      result.trace.iterates.push_back({i, trace_value, grad.frobenius_norm(), cfg.eta});
    }

    step_base = result.policy;
    step_grad = grad;
    step_eta = cfg.eta;
    result.policy = candidate;
  }
  return result;
}

PrimalDualResult sample_based_pd(const SampleBasedConfig& cfg, const ProblemData& data,
                                 const NoiseSampler& sampler, const Policy& X0) {
  cfg.validate();
  if (!is_stabilizing(data.A, data.B, X0.K)) {
    throw UnstableClosedLoop("sample_based_pd: X0 is not stabilizing");
  }

  PrimalDualResult result;
  Policy warm = X0;
  double mu = cfg.mu_init;
  double mu_sum = 0.0;

  for (int k = 1; k <= cfg.max_outer; ++k) {
    if (!is_stabilizing(data.A, data.B, warm.K)) warm = X0;
    RandomSearchConfig search = cfg.search;
    search.seed = derive_seed(cfg.search.seed, "sb-outer", static_cast<std::uint64_t>(k));
    const RandomSearchResult inner = random_search(warm, mu, search, data, sampler);
    const Policy& X = inner.policy;

    const double d_hat =
        noisy_constraint(X, cfg.search.T, data, sampler,
                         derive_seed(cfg.search.seed, "sb-constraint",
                                     static_cast<std::uint64_t>(k))) -
        data.rho_bar;

    // Exact J, Jc, D for diagnostics; the multiplier update uses only d_hat.
    const double J = evaluate_lagrangian(X, 0.0, data).value;
    const double Jc = eval_constraint(X, data).value;
    const double D = evaluate_lagrangian(X, mu, data).value;
    mu_sum += mu;
    result.trace.records.push_back({k, mu, J, Jc, d_hat, D, mu_sum / k});
    result.trace.policies.push_back(X);

    const double zeta = cfg.step_constant / std::sqrt(static_cast<double>(k));
    mu = std::clamp(mu + zeta * d_hat, 0.0, cfg.mu_cap);
    warm = X;
  }

  // Same reporting rule as the model-based loop, with the exact Jc deciding
  // feasibility of each iterate.
  const auto& recs = result.trace.records;
  int best = 0;
  bool best_feasible = recs[0].Jc <= data.rho_bar;
  for (int i = 1; i < static_cast<int>(recs.size()); ++i) {
    const bool feasible = recs[i].Jc <= data.rho_bar;
    if (feasible && (!best_feasible || recs[i].J < recs[best].J)) {
      best = i;
      best_feasible = true;
    } else if (!feasible && !best_feasible && recs[i].Jc < recs[best].Jc) {
      best = i;
    }
  }
  result.best_index = best;
  result.X_star = result.trace.policies[best];
  result.mu_star = recs[best].mu;
  result.J_star = recs[best].J;
  result.Jc_star = recs[best].Jc;

  double d_best = recs[0].D;
  double mu_best = recs[0].mu;
  for (const auto& r : recs) {
    if (r.D > d_best) {
      d_best = r.D;
      mu_best = r.mu;
    }
  }
  const double radius = std::max(0.1, 0.25 * std::max(mu_best, 1.0));
  result.D_star_estimate = std::max(d_best, refine_dual_optimum(data, mu_best, radius));
  return result;
}

}  // namespace rclqr
