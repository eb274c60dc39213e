#include "rclqr/primal_dual.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "rclqr/constraint.hpp"
#include "rclqr/csv.hpp"
#include "rclqr/errors.hpp"
#include "rclqr/lagrangian.hpp"
#include "rclqr/linalg.hpp"

namespace rclqr {

void DualConfig::validate() const {
  if (mu_init < 0.0) throw ConfigError("DualConfig: mu_init must be nonnegative");
  if (mu_cap <= mu_init) throw ConfigError("DualConfig: require mu_cap > mu_init");
  if (step_constant <= 0.0) throw ConfigError("DualConfig: step_constant must be positive");
  if (max_outer <= 0) throw ConfigError("DualConfig: max_outer must be positive");
  inner.validate();
}

void PrimalDualTrace::write_csv(const std::filesystem::path& path,
                                std::optional<std::uint64_t> seed) const {
  std::vector<std::string> columns{"k", "mu", "J", "Jc", "d", "D", "mu_avg"};
  if (seed) columns.push_back("seed");
  CsvWriter csv(path, columns);
  for (const auto& r : records) {
    std::vector<std::string> row{std::to_string(r.k),    format_double(r.mu),
                                 format_double(r.J),     format_double(r.Jc),
                                 format_double(r.d),     format_double(r.D),
                                 format_double(r.mu_avg)};
    if (seed) row.push_back(std::to_string(*seed));
    csv.write_row_raw(row);
  }
}

DualValue dual_value(double mu, const ProblemData& data) {
  DualValue out;
  out.X_star = critical_point(mu, data);
  out.value = evaluate_lagrangian(out.X_star, mu, data).value;
  return out;
}

DualValue dual_value_iterative(double mu, const ProblemData& data, const InnerConfig& inner,
                               const Policy& X0) {
  DualValue out;
  const InnerResult res = solve_inner(mu, X0, inner, data);
  out.X_star = res.policy;
  out.value = evaluate_lagrangian(res.policy, mu, data).value;
  return out;
}

PrimalDualResult run_model_based(const DualConfig& cfg, const ProblemData& data,
                                 const Policy& X0) {
  cfg.validate();
  if (!is_stabilizing(data.A, data.B, X0.K)) {
    throw UnstableClosedLoop("run_model_based: X0 is not stabilizing");
  }

  PrimalDualResult result;
  Policy warm = X0;
  double mu = cfg.mu_init;
  double mu_sum = 0.0;

  for (int k = 1; k <= cfg.max_outer; ++k) {
    if (!is_stabilizing(data.A, data.B, warm.K)) warm = X0;
    const InnerResult inner = solve_inner(mu, warm, cfg.inner, data);
    const Policy& X = inner.policy;

    const double J = evaluate_lagrangian(X, 0.0, data).value;
    const double Jc = eval_constraint(X, data).value;
    const double d = Jc - data.rho_bar;
    const double D = evaluate_lagrangian(X, mu, data).value;
    mu_sum += mu;

    result.trace.records.push_back({k, mu, J, Jc, d, D, mu_sum / k});
    result.trace.policies.push_back(X);

    const bool at_zero_fixed_point = (mu == 0.0 && d <= 0.0);
    const bool subgradient_met = cfg.stop_tol > 0.0 && std::abs(d) <= cfg.stop_tol * data.rho_bar;
    if (at_zero_fixed_point || subgradient_met) break;

    const double zeta = cfg.step_constant / std::sqrt(static_cast<double>(k));
    mu = std::clamp(mu + zeta * d, 0.0, cfg.mu_cap);
    warm = X;
  }

  // Reported solution: cheapest feasible iterate, else the least violating.
  const auto& recs = result.trace.records;
  int best = 0;
  bool best_feasible = recs[0].d <= 0.0;
  for (int i = 1; i < static_cast<int>(recs.size()); ++i) {
    const bool feasible = recs[i].d <= 0.0;
    if (feasible && (!best_feasible || recs[i].J < recs[best].J)) {
      best = i;
      best_feasible = true;
    } else if (!feasible && !best_feasible && recs[i].d < recs[best].d) {
      best = i;
    }
  }
  result.best_index = best;
  result.X_star = result.trace.policies[best];
  result.mu_star = recs[best].mu;
  result.J_star = recs[best].J;
  result.Jc_star = recs[best].Jc;

  // D* estimate: best dual value along the trace, refined locally.
  double mu_best = recs[0].mu;
  double d_best = recs[0].D;
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

ExactSolution solve_exact_bisection(const ProblemData& data, double mu_tol) {
  auto constraint_at = [&](double mu) {
    const DualValue dv = dual_value(mu, data);
    return std::pair<double, Policy>(eval_constraint(dv.X_star, data).value, dv.X_star);
  };

  ExactSolution out;
  auto [jc0, x0] = constraint_at(0.0);
  if (jc0 <= data.rho_bar) {
    out.X = x0;
    out.mu = 0.0;
    out.Jc = jc0;
    out.J = evaluate_lagrangian(x0, 0.0, data).value;
    out.D = out.J;
    return out;
  }

  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 64; ++i) {
    if (constraint_at(hi).first <= data.rho_bar) break;
    lo = hi;
    hi *= 2.0;
    if (hi > 1e8) throw ConfigError("solve_exact_bisection: constraint appears infeasible");
  }
  while (hi - lo > mu_tol * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (constraint_at(mid).first <= data.rho_bar) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  auto [jc, x] = constraint_at(hi);
  out.X = x;
  out.mu = hi;
  out.Jc = jc;
  out.J = evaluate_lagrangian(x, 0.0, data).value;
  out.D = evaluate_lagrangian(x, hi, data).value;
  return out;
}

double refine_dual_optimum(const ProblemData& data, double mu_center, double radius) {
  double lo = std::max(0.0, mu_center - radius);
  double hi = mu_center + radius;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - inv_phi * (hi - lo);
  double b = lo + inv_phi * (hi - lo);
  double fa = dual_value(a, data).value;
  double fb = dual_value(b, data).value;
  for (int i = 0; i < 80 && (hi - lo) > 1e-12 * std::max(1.0, hi); ++i) {
    if (fa < fb) {
      lo = a;
      a = b;
      fa = fb;
      b = lo + inv_phi * (hi - lo);
      fb = dual_value(b, data).value;
    } else {
      hi = b;
      b = a;
      fb = fa;
      a = hi - inv_phi * (hi - lo);
      fa = dual_value(a, data).value;
    }
  }
  return std::max(fa, fb);
}

std::string solution_to_json(const PrimalDualResult& result) {
  nlohmann::json j;
  nlohmann::json K = nlohmann::json::array();
  for (Eigen::Index i = 0; i < result.X_star.K.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < result.X_star.K.cols(); ++c) row.push_back(result.X_star.K(i, c));
    K.push_back(std::move(row));
  }
  nlohmann::json l = nlohmann::json::array();
  for (Eigen::Index i = 0; i < result.X_star.l.size(); ++i) l.push_back(result.X_star.l[i]);
  j["K"] = std::move(K);
  j["l"] = std::move(l);
  j["mu"] = result.mu_star;
  j["J"] = result.J_star;
  j["Jc"] = result.Jc_star;
  j["D_star_estimate"] = result.D_star_estimate;
  return j.dump(2);
}

}  // namespace rclqr
