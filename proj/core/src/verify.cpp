#include <algorithm>
#include <cmath>

#include "rclqr/constraint.hpp"
#include "rclqr/errors.hpp"
#include "rclqr/experiment.hpp"
#include "rclqr/lagrangian.hpp"
#include "rclqr/linalg.hpp"
#include "rclqr/presets.hpp"

namespace rclqr {
namespace {

constexpr std::uint64_t kVerifySeed = 0x5eedc0de;

VerifyCheck make_check(std::string name, double measured, double tolerance,
                       std::string detail = "") {
  return VerifyCheck{std::move(name), measured, tolerance, measured <= tolerance,
                     std::move(detail)};
}

void append(VerifyReport& report, VerifyCheck check) { report.checks.push_back(std::move(check)); }

void gradients_suite(VerifyReport& report) {
  const ProblemData& data = paper_problem();
  for (double mu : {0.0, 2.0}) {
    RngStream rng(derive_seed(kVerifySeed, "verify-gradients", static_cast<std::uint64_t>(mu)));
    double worst = 0.0;
    int checked = 0;
    for (int i = 0; i < 50; ++i) {
      const Policy X = random_stabilizing_policy(data, rng);
      const Gradient analytic = lagrangian_gradient(X, mu, data);
      const Gradient fd = finite_difference_gradient(X, mu, data);
      const double denom = std::max(1e-12, fd.frobenius_norm());
      const double rel = std::sqrt((analytic.dK - fd.dK).squaredNorm() +
                                   (analytic.dl - fd.dl).squaredNorm()) /
                         denom;
      worst = std::max(worst, rel);
      ++checked;
    }
    append(report, make_check("fd-gradient-mu" + std::to_string(static_cast<int>(mu)), worst,
                              1e-6, std::to_string(checked) + " policies"));
  }
}

void oracles_suite(VerifyReport& report) {
  const ProblemData& data = paper_problem();
  const NoiseSampler& sampler = paper_noise_sampler();

  {
    RngStream rng(derive_seed(kVerifySeed, "verify-gap"));
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
      const Policy X = random_stabilizing_policy(data, rng);
      const Policy Xp = random_stabilizing_policy(data, rng);
      const double mu = 2.0 * rng.uniform();
      const double gap = lagrangian_gap(X, Xp, mu, data);
      const double direct = evaluate_lagrangian(Xp, mu, data).value -
                            evaluate_lagrangian(X, mu, data).value;
      worst = std::max(worst, std::abs(gap - direct));
    }
    append(report, make_check("gap-oracle", worst, 1e-8, "50 policy pairs"));
  }

  {
    RngStream rng(derive_seed(kVerifySeed, "verify-advantage"));
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const Policy X = random_stabilizing_policy(data, rng);
      const Policy Xp = random_stabilizing_policy(data, rng);
      const double mu = 2.0 * rng.uniform();
      worst = std::max(worst, std::abs(mean_advantage_under_stationary(X, Xp, mu, data) -
                                       lagrangian_gap(X, Xp, mu, data)));
    }
    append(report, make_check("advantage-stationary", worst, 1e-6, "20 policy pairs"));
  }

  {
    // Oracle consistency: trajectory averages against the closed forms.
    RngStream rng(derive_seed(kVerifySeed, "verify-oracle"));
    double worst = 0.0;
    for (int p = 0; p < 10; ++p) {
      const Policy X = random_stabilizing_policy(data, rng, 0.1, 0.5);
      const double exact = evaluate_lagrangian(X, 2.0, data).value;
      double mean = 0.0;
      for (int s = 0; s < 50; ++s) {
        mean += noisy_lagrangian(X, 2.0, 10000, data, sampler,
                                 derive_seed(kVerifySeed, "oracle-L", p * 100 + s));
      }
      mean /= 50;
      worst = std::max(worst, std::abs(mean - exact) / std::abs(exact));
    }
    append(report, make_check("oracle-lagrangian-mc", worst, 0.01,
                              "10 policies x 50 seeds, T=1e4"));
  }

  {
    const Policy X = paper_initial_policy();
    const double exact = eval_constraint(X, data).value;
    double mean = 0.0;
    for (int s = 0; s < 20; ++s) {
      mean += noisy_constraint(X, 100000, data, sampler,
                               derive_seed(kVerifySeed, "oracle-Jc", s));
    }
    mean /= 20;
    append(report, make_check("oracle-constraint-mc", std::abs(mean - exact) / std::abs(exact),
                              0.02, "20 seeds, T=1e5"));
  }

  {
    // Reformulation identity: risk = J_c + m4 - 4 tr{(WQ)²} up to MC error.
    const Policy X = paper_initial_policy();
    const double correction =
        data.noise.m4 - 4.0 * (data.noise.W * data.Q * data.noise.W * data.Q).trace();
    double worst = 0.0;
    for (int s = 0; s < 5; ++s) {
      const std::uint64_t seed = derive_seed(kVerifySeed, "oracle-risk", s);
      const double risk = empirical_risk(X, 200000, data, sampler, seed);
      const double via_constraint =
          noisy_constraint(X, 200000, data, sampler, seed) + correction;
      worst = std::max(worst, std::abs(risk - via_constraint) / std::abs(via_constraint));
    }
    append(report, make_check("reformulation-identity", worst, 0.02, "5 seeds, T=2e5"));
  }

  {
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(data.state_dim());
    const Trajectory a = rollout(paper_initial_policy(), 500, x0, data, sampler, 7);
    const Trajectory b = rollout(paper_initial_policy(), 500, x0, data, sampler, 7);
    double diff = 0.0;
    for (std::size_t t = 0; t < a.states.size(); ++t) {
      diff = std::max(diff, (a.states[t] - b.states[t]).cwiseAbs().maxCoeff());
    }
    append(report, make_check("rollout-determinism", diff, 0.0, "bit-identical replay"));
  }
}

void duality_suite(VerifyReport& report) {
  const ProblemData& data = paper_problem();

  {
    // Concavity of D on a mu grid: positive second differences violate it.
    std::vector<double> values;
    for (int i = 0; i <= 20; ++i) values.push_back(dual_value(0.5 * i, data).value);
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < values.size(); ++i) {
      worst = std::max(worst, values[i + 1] - 2.0 * values[i] + values[i - 1]);
    }
    append(report, make_check("dual-concavity", worst, 1e-8, "mu grid 0..10 step 0.5"));
  }

  DualConfig cfg;
  cfg.inner = InnerConfig::preset(InnerMethod::GN);
  cfg.inner.grad_tol = 1e-10;
  cfg.max_outer = 3000;
  cfg.stop_tol = 1e-4;
  const PrimalDualResult result = run_model_based(cfg, data, paper_initial_policy());

  {
    // Weak duality: every dual value is below the cost of every feasible
    // iterate found along the run.
    double best_feasible = std::numeric_limits<double>::infinity();
    for (const auto& r : result.trace.records) {
      if (r.d <= 0.0) best_feasible = std::min(best_feasible, r.J);
    }
    double worst = 0.0;
    for (const auto& r : result.trace.records) {
      worst = std::max(worst, r.D - best_feasible);
    }
    append(report, make_check("weak-duality", worst, 1e-8, "D(mu^k) <= J(feasible)"));
  }

  {
    const double slack =
        std::abs(result.mu_star * (result.Jc_star - data.rho_bar)) / data.rho_bar;
    append(report, make_check("complementary-slackness", slack, 1e-3,
                              "residual relative to rho_bar"));
  }

  {
    const double violation =
        std::max(result.Jc_star - data.rho_bar, 0.0) / data.rho_bar;
    append(report, make_check("constraint-satisfaction", violation, 1e-2,
                              "reported solution feasibility"));
  }
}

}  // namespace

bool VerifyReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

std::optional<VerifySuite> parse_suite(const std::string& name) {
  if (name == "gradients") return VerifySuite::Gradients;
  if (name == "duality") return VerifySuite::Duality;
  if (name == "oracles") return VerifySuite::Oracles;
  if (name == "all") return VerifySuite::All;
  return std::nullopt;
}

VerifyReport verify(VerifySuite suite) {
  VerifyReport report;
  if (suite == VerifySuite::Gradients || suite == VerifySuite::All) gradients_suite(report);
  if (suite == VerifySuite::Duality || suite == VerifySuite::All) duality_suite(report);
  if (suite == VerifySuite::Oracles || suite == VerifySuite::All) oracles_suite(report);
  return report;
}

Gradient finite_difference_gradient(const Policy& X, double mu, const ProblemData& data,
                                    double step) {
  Gradient out;
  out.dK.resizeLike(X.K);
  out.dl.resizeLike(X.l);
  Policy probe = X;
  for (Eigen::Index i = 0; i < X.K.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.K.cols(); ++j) {
      probe.K(i, j) = X.K(i, j) + step;
      const double plus = evaluate_lagrangian(probe, mu, data).value;
      probe.K(i, j) = X.K(i, j) - step;
      const double minus = evaluate_lagrangian(probe, mu, data).value;
      probe.K(i, j) = X.K(i, j);
      out.dK(i, j) = (plus - minus) / (2.0 * step);
    }
  }
  for (Eigen::Index i = 0; i < X.l.size(); ++i) {
    probe.l[i] = X.l[i] + step;
    const double plus = evaluate_lagrangian(probe, mu, data).value;
    probe.l[i] = X.l[i] - step;
    const double minus = evaluate_lagrangian(probe, mu, data).value;
    probe.l[i] = X.l[i];
    out.dl[i] = (plus - minus) / (2.0 * step);
  }
  return out;
}

Policy random_stabilizing_policy(const ProblemData& data, RngStream& rng, double k_scale,
                                 double l_scale) {
  const Policy base = critical_point(0.0, data);
  const int m = data.input_dim();
  const int n = data.state_dim();
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Policy X = base;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) X.K(i, j) += k_scale * rng.normal();
      X.l[i] += l_scale * rng.normal();
    }
    if (is_stabilizing(data.A, data.B, X.K)) return X;
  }
  throw ConfigError("random_stabilizing_policy: rejection sampling failed");
}

}  // namespace rclqr
