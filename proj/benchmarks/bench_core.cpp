#include <benchmark/benchmark.h>

#include "rclqr/inner_solvers.hpp"
#include "rclqr/lagrangian.hpp"
#include "rclqr/linalg.hpp"
#include "rclqr/presets.hpp"
#include "rclqr/rng.hpp"
#include "rclqr/simulator.hpp"
#include "rclqr/zeroth_order.hpp"

using namespace rclqr;

namespace {

Eigen::MatrixXd stable_random(int n, std::uint64_t seed) {
  RngStream rng(seed);
  Eigen::MatrixXd F(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) F(i, j) = rng.normal();
  return F * (0.9 / spectral_radius(F));
}

void BM_SolveDlyap(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Eigen::MatrixXd F = stable_random(n, 42);
  const Eigen::MatrixXd C = Eigen::MatrixXd::Identity(n, n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_dlyap(F, C));
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_SolveDlyap)->RangeMultiplier(2)->Range(2, 32)->Complexity();

void BM_SolveDare(benchmark::State& state) {
  const ProblemData& data = paper_problem();
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_dare(data.A, data.B, data.Q, data.R));
  }
}
BENCHMARK(BM_SolveDare);

void BM_EvaluateLagrangian(benchmark::State& state) {
  const ProblemData& data = paper_problem();
  const Policy X = paper_initial_policy();
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_lagrangian(X, 2.0, data));
  }
}
BENCHMARK(BM_EvaluateLagrangian);

void BM_GnStep(benchmark::State& state) {
  const ProblemData& data = paper_problem();
  InnerConfig cfg = InnerConfig::preset(InnerMethod::GN);
  const Policy X = paper_initial_policy();
  for (auto _ : state) {
    benchmark::DoNotOptimize(step(X, 2.0, cfg, data));
  }
}
BENCHMARK(BM_GnStep);

void BM_Rollout(benchmark::State& state) {
  const ProblemData& data = paper_problem();
  const Policy X = paper_initial_policy();
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(4);
  const int T = static_cast<int>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rollout(X, T, x0, data, paper_noise_sampler(), ++seed));
  }
  state.SetItemsProcessed(state.iterations() * T);
}
BENCHMARK(BM_Rollout)->Arg(100)->Arg(1000);

void BM_NoisyLagrangian(benchmark::State& state) {
  const ProblemData& data = paper_problem();
  const Policy X = paper_initial_policy();
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        noisy_lagrangian(X, 2.0, 100, data, paper_noise_sampler(), ++seed));
  }
}
BENCHMARK(BM_NoisyLagrangian);

void BM_RandomSearchIteration(benchmark::State& state) {
  const ProblemData& data = paper_problem();
  const Policy X0 = paper_initial_policy();
  RandomSearchConfig cfg;
  cfg.N = 1;
  cfg.eta = 1e-7;
  cfg.trace_stride = 1;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    cfg.seed = ++seed;
    benchmark::DoNotOptimize(random_search(X0, 2.0, cfg, data, paper_noise_sampler()));
  }
}
BENCHMARK(BM_RandomSearchIteration);

}  // namespace

BENCHMARK_MAIN();
