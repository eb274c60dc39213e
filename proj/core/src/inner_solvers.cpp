#include "rclqr/inner_solvers.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "rclqr/csv.hpp"
#include "rclqr/errors.hpp"
#include "rclqr/linalg.hpp"

namespace rclqr {
namespace {

constexpr double kEtaUnderflow = 1e-16;

Eigen::MatrixXd descent_direction(const LagrangianEval& ev, InnerMethod method) {
  const auto m = ev.E_K.rows();
  const auto n = ev.E_K.cols();
  Eigen::MatrixXd blocks(m, n + 1);
  blocks << ev.E_K, ev.G_X;
  switch (method) {
    case InnerMethod::PG:
      return 2.0 * blocks * ev.Phi_X;
    case InnerMethod::NPG:
      return 2.0 * blocks;
    case InnerMethod::GN:
      return 2.0 * ev.R_K.ldlt().solve(blocks);
  }
  throw ConfigError("unknown inner method");
}

Policy apply_direction(const Policy& X, const Eigen::MatrixXd& direction, double eta) {
  const auto n = X.K.cols();
  Policy next;
  next.K = X.K - eta * direction.leftCols(n);
  next.l = X.l - eta * direction.col(n);
  return next;
}

std::optional<LagrangianEval> try_evaluate(const Policy& X, double mu, const ProblemData& data) {
  if (!is_stabilizing(data.A, data.B, X.K)) return std::nullopt;
  return evaluate_lagrangian(X, mu, data);
}

struct LineSearchOutcome {
  Policy policy;
  LagrangianEval eval;
  double eta = 0.0;
};

// Armijo backtracking from the current evaluation. Returns nullopt when the
// stepsize underflows before a certified decrease is found.
std::optional<LineSearchOutcome> armijo_search(const Policy& X, const LagrangianEval& ev,
                                               double mu, const InnerConfig& cfg,
                                               const ProblemData& data) {
  const Eigen::MatrixXd direction = descent_direction(ev, cfg.method);
  const Eigen::MatrixXd grad = lagrangian_gradient(ev).stacked();
  const double slope = (grad.array() * direction.array()).sum();
  if (slope <= 0.0) {
    // Zero (or numerically zero) direction: already critical.
    return LineSearchOutcome{X, ev, cfg.eta};
  }
  double eta = cfg.eta;
  while (eta >= kEtaUnderflow) {
    const Policy candidate = apply_direction(X, direction, eta);
    if (auto cand_ev = try_evaluate(candidate, mu, data)) {
      if (cand_ev->value <= ev.value - cfg.alpha * eta * slope) {
        return LineSearchOutcome{candidate, std::move(*cand_ev), eta};
      }
    }
    eta *= cfg.beta;
  }
  return std::nullopt;
}

// Fixed-stepsize step with stability (and descent) safeguarding: the stepsize
// is halved for this step only until the candidate is stabilizing and
// strictly decreases the Lagrangian. Returns nullopt when eta underflows.
std::optional<LineSearchOutcome> safeguarded_step(const Policy& X, const LagrangianEval& ev,
                                                  double mu, const InnerConfig& cfg,
                                                  const ProblemData& data) {
  const Eigen::MatrixXd direction = descent_direction(ev, cfg.method);
  if (direction.norm() == 0.0) return LineSearchOutcome{X, ev, cfg.eta};
  double eta = cfg.eta;
  while (eta >= kEtaUnderflow) {
    const Policy candidate = apply_direction(X, direction, eta);
    if (auto cand_ev = try_evaluate(candidate, mu, data)) {
      if (cand_ev->value < ev.value) {
        return LineSearchOutcome{candidate, std::move(*cand_ev), eta};
      }
    }
    eta *= 0.5;
  }
  return std::nullopt;
}

// Once per-step decreases fall below double resolution the descent guard
// stalls, but the update map keeps contracting toward its fixed point.
// Continue while the value stays on the machine-precision plateau and the
// policy movement shrinks, so residuals like the offset block reach the
// fixed point instead of freezing at stall level.
Policy plateau_polish(Policy X, LagrangianEval ev, double mu, const InnerConfig& cfg,
                      const ProblemData& data) {
  const double band = 1e-12 * std::max(1.0, std::abs(ev.value));
  const double base = ev.value;
  double prev_move = std::numeric_limits<double>::infinity();
  for (int j = 0; j < 64; ++j) {
    const Policy candidate = step_from_eval(X, ev, cfg.method, cfg.eta);
    auto cand_ev = try_evaluate(candidate, mu, data);
    if (!cand_ev || cand_ev->value > base + band) break;
    const double move = std::sqrt((candidate.K - X.K).squaredNorm() +
                                  (candidate.l - X.l).squaredNorm());
    if (move >= prev_move || move == 0.0) break;
    prev_move = move;
    X = candidate;
    ev = std::move(*cand_ev);
  }
  return X;
}

}  // namespace

const char* to_string(InnerMethod method) {
  switch (method) {
    case InnerMethod::PG:
      return "pg";
    case InnerMethod::NPG:
      return "npg";
    case InnerMethod::GN:
      return "gn";
  }
  return "?";
}

void InnerConfig::validate() const {
  if (eta <= 0.0) throw ConfigError("InnerConfig: eta must be positive");
  if (method == InnerMethod::GN && backtracking) {
    throw ConfigError("InnerConfig: backtracking is not available for GN (eta = 1/2 is optimal)");
  }
  if (backtracking && (alpha <= 0.0 || alpha >= 0.5 || beta <= 0.0 || beta >= 1.0)) {
    throw ConfigError("InnerConfig: require alpha in (0, 0.5) and beta in (0, 1)");
  }
  if (grad_tol <= 0.0) throw ConfigError("InnerConfig: grad_tol must be positive");
  if (max_iters <= 0) throw ConfigError("InnerConfig: max_iters must be positive");
}

double InnerConfig::preset_eta(InnerMethod method) {
  switch (method) {
    case InnerMethod::PG:
      return 3e-3;
    case InnerMethod::NPG:
      return 0.02;
    case InnerMethod::GN:
      return 0.5;
  }
  return 0.0;
}

InnerConfig InnerConfig::preset(InnerMethod method) {
  InnerConfig cfg;
  cfg.method = method;
  cfg.eta = preset_eta(method);
  return cfg;
}

void InnerTrace::write_csv(const std::filesystem::path& path) const {
  CsvWriter csv(path, {"iter", "lagrangian", "grad_norm", "eta"});
  for (const auto& it : iterates) {
    csv.write_row({static_cast<double>(it.iter), it.lagrangian, it.grad_norm, it.eta});
  }
}

Policy step_from_eval(const Policy& X, const LagrangianEval& ev, InnerMethod method, double eta) {
  return apply_direction(X, descent_direction(ev, method), eta);
}

Policy step(const Policy& X, double mu, const InnerConfig& cfg, const ProblemData& data) {
  cfg.validate();
  return step_from_eval(X, evaluate_lagrangian(X, mu, data), cfg.method, cfg.eta);
}

std::pair<Policy, double> backtracking_step(const Policy& X, double mu, const InnerConfig& cfg,
                                            const ProblemData& data) {
  cfg.validate();
  if (cfg.method == InnerMethod::GN) {
    throw ConfigError("backtracking_step: PG and NPG only");
  }
  const LagrangianEval ev = evaluate_lagrangian(X, mu, data);
  auto outcome = armijo_search(X, ev, mu, cfg, data);
  if (!outcome) {
    throw LineSearchFailed("backtracking_step: stepsize underflow below 1e-16");
  }
  return {outcome->policy, outcome->eta};
}

InnerResult solve_inner(double mu, const Policy& X0, const InnerConfig& cfg,
                        const ProblemData& data) {
  cfg.validate();
  InnerResult result;
  Policy X = X0;
  LagrangianEval ev = evaluate_lagrangian(X, mu, data);  // throws if X0 unstable

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    const double grad_norm = lagrangian_gradient(ev).frobenius_norm();
    if (grad_norm <= cfg.grad_tol) {
      result.trace.iterates.push_back({iter, ev.value, grad_norm, 0.0});
      result.policy = X;
      return result;
    }
    auto outcome = cfg.backtracking ? armijo_search(X, ev, mu, cfg, data)
                                    : safeguarded_step(X, ev, mu, cfg, data);
    if (!outcome) {
      // Decrease no longer certifiable at this precision; stop, refining the
      // fixed-step iterate along the machine-precision plateau first.
      result.trace.iterates.push_back({iter, ev.value, grad_norm, 0.0});
      result.policy = cfg.backtracking ? X : plateau_polish(X, ev, mu, cfg, data);
      return result;
    }
    result.trace.iterates.push_back({iter, ev.value, grad_norm, outcome->eta});
    X = outcome->policy;
    ev = std::move(outcome->eval);
  }
  const double grad_norm = lagrangian_gradient(ev).frobenius_norm();
  result.trace.iterates.push_back({cfg.max_iters, ev.value, grad_norm, 0.0});
  result.policy = X;
  result.max_iters_exceeded = grad_norm > cfg.grad_tol;
  return result;
}

}  // namespace rclqr
