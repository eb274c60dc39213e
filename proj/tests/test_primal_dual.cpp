#include <doctest.h>

#include "rclqr/constraint.hpp"
#include "rclqr/errors.hpp"
#include "rclqr/lagrangian.hpp"
#include "rclqr/presets.hpp"
#include "rclqr/primal_dual.hpp"
#include "test_support.hpp"

using namespace rclqr;

TEST_SUITE("primal_dual") {

TEST_CASE("dual value on the scalar testbed") {
  const ProblemData data = test::scalar_testbed();
  const auto dv = dual_value(0.0, data);
  // D(0) = P* W with P* the positive root of the scalar DARE quadratic
  CHECK(dv.value == doctest::Approx(test::scalar_dare_root()).epsilon(1e-10));
  CHECK(std::abs(dv.X_star.l(0)) <= 1e-12);
}

TEST_CASE("iterative dual value cross-checks the exact route") {
  const ProblemData& data = paper_problem();
  InnerConfig inner = InnerConfig::preset(InnerMethod::GN);
  inner.grad_tol = 1e-11;
  for (double mu : {0.0, 2.0, 5.0}) {
    const auto exact = dual_value(mu, data);
    const auto iterative = dual_value_iterative(mu, data, inner, paper_initial_policy());
    CHECK(std::abs(exact.value - iterative.value) <= 1e-7 * std::abs(exact.value));
  }
}

TEST_CASE("feasible start keeps the multiplier at zero") {
  // scalar testbed: J_c(X*(0)) < rho_bar = 15, so d < 0 at mu = 0
  const ProblemData data = test::scalar_testbed();
  DualConfig cfg;
  cfg.inner = InnerConfig::preset(InnerMethod::GN);
  cfg.max_outer = 25;
  const auto res = run_model_based(cfg, data, test::scalar_policy(0.5));
  for (const auto& rec : res.trace.records) CHECK(rec.mu == 0.0);
  // zero-fixed-point stop: one outer iteration suffices
  CHECK(res.trace.records.size() == 1);
  CHECK(res.mu_star == 0.0);
  // complementary slackness holds trivially
  CHECK(std::abs(res.mu_star * (res.Jc_star - data.rho_bar)) <= 1e-12);
}

TEST_CASE("multiplier projection clamps negative updates to zero") {
  // J_c = 4, rho_bar = 15 -> d = -11; mu' = [0 + zeta d]_+ = 0
  const ProblemData data = test::scalar_testbed();
  DualConfig cfg;
  cfg.inner = InnerConfig::preset(InnerMethod::GN);
  cfg.mu_init = 0.5;  // start positive so the projection is exercised
  cfg.step_constant = 0.5;
  cfg.max_outer = 3;
  cfg.stop_tol = 0.0;
  const auto res = run_model_based(cfg, data, test::scalar_policy(0.5));
  REQUIRE(res.trace.records.size() >= 2);
  CHECK(res.trace.records[0].mu == doctest::Approx(0.5));
  CHECK(res.trace.records[1].mu == 0.0);  // 0.5 + 0.5*(J_c - 15) clamps at zero
}

TEST_CASE("mu cap is honored") {
  const ProblemData& data = paper_problem();
  DualConfig cfg;
  cfg.inner = InnerConfig::preset(InnerMethod::GN);
  cfg.max_outer = 12;
  cfg.mu_cap = 0.75;
  cfg.step_constant = 10.0;  // huge steps: would overshoot without the cap
  cfg.stop_tol = 0.0;
  const auto res = run_model_based(cfg, data, paper_initial_policy());
  for (const auto& rec : res.trace.records) {
    CHECK(rec.mu >= 0.0);
    CHECK(rec.mu <= 0.75);
  }
}

TEST_CASE("dual function is concave on a grid") {
  const ProblemData& data = paper_problem();
  std::vector<double> values;
  for (int i = 0; i <= 20; ++i) values.push_back(dual_value(0.5 * i, data).value);
  for (std::size_t i = 1; i + 1 < values.size(); ++i) {
    CHECK(values[i + 1] - 2.0 * values[i] + values[i - 1] <= 1e-8);
  }
}

TEST_CASE("weak duality along a run") {
  const ProblemData& data = paper_problem();
  DualConfig cfg;
  cfg.inner = InnerConfig::preset(InnerMethod::GN);
  cfg.max_outer = 120;
  cfg.stop_tol = 0.0;
  const auto res = run_model_based(cfg, data, paper_initial_policy());

  double best_feasible = std::numeric_limits<double>::infinity();
  for (const auto& rec : res.trace.records) {
    if (rec.d <= 0.0) best_feasible = std::min(best_feasible, rec.J);
  }
  // the exact solution is feasible as well
  const ExactSolution exact = solve_exact_bisection(data);
  best_feasible = std::min(best_feasible, exact.J);
  for (const auto& rec : res.trace.records) {
    CHECK(rec.D <= best_feasible + 1e-8);
  }
}

TEST_CASE("bisection diagnostic: complementary slackness at the boundary") {
  const ProblemData& data = paper_problem();
  const ExactSolution exact = solve_exact_bisection(data);
  CHECK(exact.mu > 0.0);
  CHECK(exact.Jc == doctest::Approx(data.rho_bar).epsilon(1e-6));
  CHECK(exact.D == doctest::Approx(exact.J).epsilon(1e-6));  // strong duality at the optimum
  // D* refinement around the optimum cannot exceed the bisection value by much
  const double refined = refine_dual_optimum(data, exact.mu, 0.5);
  CHECK(refined <= exact.D + 1e-6 * std::abs(exact.D));
  CHECK(refined >= exact.D - 1e-6 * std::abs(exact.D));
}

TEST_CASE("warm start falls back to X0 when not stabilizing") {
  // run normally; the fallback branch is internal, so just confirm a long
  // run stays stable and produces finite values
  const ProblemData& data = paper_problem();
  DualConfig cfg;
  cfg.inner = InnerConfig::preset(InnerMethod::GN);
  cfg.max_outer = 30;
  const auto res = run_model_based(cfg, data, paper_initial_policy());
  for (const auto& rec : res.trace.records) {
    CHECK(std::isfinite(rec.J));
    CHECK(std::isfinite(rec.D));
  }
}

TEST_CASE("solution JSON carries the reported pair") {
  const ProblemData data = test::scalar_testbed();
  DualConfig cfg;
  cfg.inner = InnerConfig::preset(InnerMethod::GN);
  cfg.max_outer = 5;
  const auto res = run_model_based(cfg, data, test::scalar_policy(0.5));
  const std::string json = solution_to_json(res);
  CHECK(json.find("\"K\"") != std::string::npos);
  CHECK(json.find("\"mu\"") != std::string::npos);
  CHECK(json.find("\"Jc\"") != std::string::npos);
}

}  // TEST_SUITE
