#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "rclqr/constraint.hpp"
#include "rclqr/errors.hpp"
#include "rclqr/lagrangian.hpp"
#include "rclqr/presets.hpp"
#include "rclqr/primal_dual.hpp"
#include "rclqr/simulator.hpp"
#include "test_support.hpp"

using namespace rclqr;

TEST_SUITE("simulator") {

TEST_CASE("noise statistics estimation") {
  SUBCASE("constant sampler fails the PD check") {
    const auto sampler = NoiseSampler::custom_table({Eigen::VectorXd::Constant(2, 3.0)});
    CHECK_THROWS_AS(estimate_noise_stats(sampler, Eigen::MatrixXd::Identity(2, 2), 100, 1),
                    DegenerateCovariance);
  }
  SUBCASE("symmetric zero-mean Gaussian: odd moments vanish") {
    const auto sampler = test::unit_gaussian(2);
    const auto stats = estimate_noise_stats(sampler, Eigen::MatrixXd::Identity(2, 2), 200000, 2);
    // 3*SE for the third-moment entries of a standard normal (var of w_i^3
    // terms ~ 15 per coordinate-aligned entry)
    CHECK(stats.M3.cwiseAbs().maxCoeff() <= 3.0 * std::sqrt(15.0 / 200000.0) * 3.0);
    CHECK(stats.w_bar.cwiseAbs().maxCoeff() <= 3.0 * std::sqrt(1.0 / 200000.0) * 3.0);
  }
  SUBCASE("scalar N(0,1): m4 -> Var(w^2) = 2 within 3 SE at N = 1e6") {
    const auto stats = estimate_noise_stats(test::unit_gaussian(1),
                                            Eigen::MatrixXd::Identity(1, 1), 1000000, 99);
    // Var((w^2-1)^2) = E[(w^2-1)^4] - 4 = 60 - 4 = 56
    CHECK(std::abs(stats.m4 - 2.0) <= 3.0 * std::sqrt(56.0 / 1e6));
    CHECK(stats.W(0, 0) == doctest::Approx(1.0).epsilon(0.01));
  }
  SUBCASE("N < 2 rejected") {
    CHECK_THROWS_AS(
        estimate_noise_stats(test::unit_gaussian(1), Eigen::MatrixXd::Identity(1, 1), 1, 1),
        ConfigError);
  }
}

TEST_CASE("rollout closed forms") {
  const ProblemData data = test::scalar_testbed();

  SUBCASE("zero noise, zero start, zero offset stays at zero") {
    const auto traj = rollout(test::scalar_policy(0.5), 50, Eigen::VectorXd::Zero(1), data,
                              test::zero_noise(1), 3);
    for (const auto& x : traj.states) CHECK(x.norm() == 0.0);
    CHECK(traj.states.size() == 51);
    CHECK(traj.inputs.size() == 50);
  }
  SUBCASE("scalar recursion with offset: x_t = 1 for t >= 1") {
    // a=0.5, b=1, k=0.5 -> closed loop 0; x_{t+1} = l = 1
    const auto traj = rollout(test::scalar_policy(0.5, 1.0), 10, Eigen::VectorXd::Zero(1), data,
                              test::zero_noise(1), 3);
    for (std::size_t t = 1; t < traj.states.size(); ++t) {
      CHECK(traj.states[t](0) == doctest::Approx(1.0));
    }
  }
  SUBCASE("dynamics hold exactly for recorded draws") {
    const auto sampler = test::unit_gaussian(1);
    const auto traj = rollout(test::scalar_policy(0.3, 0.2), 25, Eigen::VectorXd::Ones(1), data,
                              sampler, 17);
    // replay the same stream to recover the noise and check x' = Ax + Bu + w
    RngStream rng(17);
    Eigen::VectorXd x = traj.states[0];
    for (std::size_t t = 0; t < traj.inputs.size(); ++t) {
      const Eigen::VectorXd w = sampler.sample(rng);
      const Eigen::VectorXd expected = data.A * x + data.B * traj.inputs[t] + w;
      CHECK((traj.states[t + 1] - expected).norm() <= 1e-14);
      x = traj.states[t + 1];
    }
  }
  SUBCASE("overflow detection on an unstable loop") {
    ProblemData loud = data;
    loud.A(0, 0) = 3.0;  // closed loop 2.5 at k = 0.5
    CHECK_THROWS_AS(rollout(test::scalar_policy(0.5), 200, Eigen::VectorXd::Ones(1), loud,
                            test::unit_gaussian(1), 5),
                    Overflow);
  }
  SUBCASE("identical seeds give bit-identical trajectories") {
    const auto a = rollout(test::scalar_policy(0.4), 100, Eigen::VectorXd::Zero(1), data,
                           test::unit_gaussian(1), 1234);
    const auto b = rollout(test::scalar_policy(0.4), 100, Eigen::VectorXd::Zero(1), data,
                           test::unit_gaussian(1), 1234);
    for (std::size_t t = 0; t < a.states.size(); ++t) {
      CHECK(a.states[t] == b.states[t]);
    }
  }
}

TEST_CASE("paper mixed sampler") {
  const NoiseSampler& sampler = paper_noise_sampler();

  SUBCASE("clipping bound holds on every draw") {
    RngStream rng(7);
    for (int i = 0; i < 100000; ++i) {
      CHECK(sampler.sample(rng).cwiseAbs().maxCoeff() <= 1e4);
    }
  }
  SUBCASE("sample moments match the analytic ones") {
    RngStream rng(8);
    const int N = 400000;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(4);
    for (int i = 0; i < N; ++i) mean += sampler.sample(rng) / N;
    CHECK((mean - sampler.mean()).cwiseAbs().maxCoeff() <= 0.05);
  }
  SUBCASE("spec-literal weight order remains constructible") {
    Eigen::MatrixXd B(4, 2);
    B << 0.125, 0, 0.5, 0, 0, 0.125, 0, 0.5;
    const auto literal = NoiseSampler::paper_mixed(B, 0.2);
    // mixture mean 0.2*3 + 0.8*8 = 7 on the first channel
    CHECK(literal.mean()(1) == doctest::Approx(0.5 * 7.0));
  }
}

TEST_CASE("noisy Lagrangian oracle") {
  const ProblemData data = test::scalar_testbed();

  SUBCASE("T = 1 from the origin is the offset stage cost") {
    const Policy X = test::scalar_policy(0.3, 0.7);
    const double val = noisy_lagrangian(X, 2.0, 1, data, test::unit_gaussian(1), 5);
    // c_mu(0, l) = l' R l - mu rho_bar
    CHECK(val == doctest::Approx(0.49 - 2.0 * 15.0));
  }
  SUBCASE("zero noise decays to -mu rho_bar") {
    const double val =
        noisy_lagrangian(test::scalar_policy(0.5), 1.0, 4000, data, test::zero_noise(1), 5);
    CHECK(val == doctest::Approx(-15.0).epsilon(1e-6));
  }
  SUBCASE("burn-in drops the transient from the average") {
    // from x0 = 0 under zero noise with offset, the first state is off the
    // stationary point; burning it in leaves the exact stationary cost
    const Policy X = test::scalar_policy(0.5, 1.0);  // closed loop 0, x -> 1
    const double with_burn =
        noisy_lagrangian(X, 0.0, 100, data, test::zero_noise(1), 5, /*burn_in=*/5);
    // stationary: x = 1, u = -0.5 + 1 = 0.5 -> cost 1 + 0.25
    CHECK(with_burn == doctest::Approx(1.25));
    const double without_burn = noisy_lagrangian(X, 0.0, 100, data, test::zero_noise(1), 5);
    CHECK(without_burn < with_burn);  // the t=0 term is cheaper than stationary
  }
  SUBCASE("paper model, mu=2, T=100: seed-mean near the closed form") {
    const ProblemData& paper = paper_problem();
    const Policy X = dual_value(2.0, paper).X_star;
    const double exact = evaluate_lagrangian(X, 2.0, paper).value;
    double mean = 0.0;
    for (int s = 0; s < 20; ++s) {
      mean += noisy_lagrangian(X, 2.0, 100, paper, paper_noise_sampler(),
                               derive_seed(2, "nl100", s));
    }
    mean /= 20;
    // T = 100 carries a visible truncation bias; a-few-percent agreement
    CHECK(std::abs(mean - exact) / std::abs(exact) <= 0.10);
  }
}

TEST_CASE("noisy constraint oracle") {
  const ProblemData data = test::scalar_testbed();

  SUBCASE("zero weight gives exactly zero") {
    ProblemData zeroq = data;
    zeroq.Q = Eigen::MatrixXd::Zero(1, 1);
    CHECK(noisy_constraint(test::scalar_policy(0.5), 500, zeroq, test::unit_gaussian(1), 5) ==
          0.0);
  }
  SUBCASE("long horizon approaches J_c = 4") {
    double mean = 0.0;
    for (int s = 0; s < 10; ++s) {
      mean += noisy_constraint(test::scalar_policy(0.5), 200000, data, test::unit_gaussian(1),
                               derive_seed(3, "nc", s));
    }
    mean /= 10;
    CHECK(mean == doctest::Approx(4.0).epsilon(0.02));
  }
}

TEST_CASE("empirical risk") {
  const ProblemData data = test::scalar_testbed();

  SUBCASE("deterministic system has zero risk") {
    CHECK(empirical_risk(test::scalar_policy(0.5, 0.4), 500, data, test::zero_noise(1), 5) ==
          doctest::Approx(0.0));
  }
  SUBCASE("reformulation identity at matched seeds") {
    const ProblemData& paper = paper_problem();
    const Policy X = paper_initial_policy();
    const double correction =
        paper.noise.m4 -
        4.0 * (paper.noise.W * paper.Q * paper.noise.W * paper.Q).trace();
    for (int s = 0; s < 3; ++s) {
      const std::uint64_t seed = derive_seed(4, "risk-id", s);
      const double risk = empirical_risk(X, 200000, paper, paper_noise_sampler(), seed);
      const double via =
          noisy_constraint(X, 200000, paper, paper_noise_sampler(), seed) + correction;
      CHECK(std::abs(risk - via) / std::abs(via) <= 0.02);
    }
  }
}

TEST_CASE("trajectory CSV schema") {
  const ProblemData data = test::scalar_testbed();
  const auto traj = rollout(test::scalar_policy(0.5), 5, Eigen::VectorXd::Zero(1), data,
                            test::unit_gaussian(1), 11);
  const auto path = std::filesystem::temp_directory_path() / "rclqr_traj_test.csv";
  traj.write_csv(path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,x1,u1");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 6);  // x_0..x_5
  std::filesystem::remove(path);
}

}  // TEST_SUITE
