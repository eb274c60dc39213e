#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "rclqr/model.hpp"
#include "rclqr/rng.hpp"

namespace rclqr {

/// Seedable iid noise model for trajectory simulation.
///
/// Kinds:
///  - Gaussian(mean, covariance), optionally clipped coordinate-wise;
///  - PaperMixed: w = clip(B v + e) with v1 a two-component Gaussian mixture
///    of N(3, 30) and N(8, 60) (variances), v2 ~ N(0, 0.01),
///    e ~ N(0, 0.01 I), clip at ±1e4. first_weight is the N(3, 30) weight;
///    the default 0.8 keeps the benchmark risk constraint strictly feasible
///    (at 0.2 the mixture variance alone already exceeds the tolerance);
///  - CustomTable: finite support with optional weights.
class NoiseSampler {
 public:
  enum class Kind { Gaussian, PaperMixed, CustomTable };

  /// Empty zero-dimensional sampler; reassign before use.
  NoiseSampler() = default;

  static NoiseSampler gaussian(Eigen::VectorXd mean, Eigen::MatrixXd covariance,
                               std::optional<double> clip_bound = std::nullopt);
  static NoiseSampler paper_mixed(Eigen::MatrixXd B, double first_weight = 0.8);
  static NoiseSampler custom_table(std::vector<Eigen::VectorXd> support,
                                   std::vector<double> weights = {});

  Eigen::VectorXd sample(RngStream& rng) const;
  int dim() const { return dim_; }
  Kind kind() const { return kind_; }
  std::optional<double> clip_bound() const { return clip_bound_; }

  /// Exact mean and covariance of the sampled law (clipping ignored; at the
  /// configured bounds its effect is far below double precision).
  Eigen::VectorXd mean() const;
  Eigen::MatrixXd covariance() const;

 private:
  Kind kind_ = Kind::Gaussian;
  int dim_ = 0;
  std::optional<double> clip_bound_;
  // Gaussian
  Eigen::VectorXd mean_;
  Eigen::MatrixXd chol_;
  Eigen::MatrixXd cov_;
  // PaperMixed
  Eigen::MatrixXd mix_B_;
  double mix_first_weight_ = 0.8;
  // CustomTable
  std::vector<Eigen::VectorXd> support_;
  std::vector<double> cumweights_;
};

/// One simulated trajectory: states x_0..x_T and inputs u_0..u_{T-1}.
struct Trajectory {
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> inputs;
  std::uint64_t seed = 0;

  /// CSV with columns t, x1..xn, u1..um (inputs blank-padded as 0 on the
  /// final row, which has no input).
  void write_csv(const std::filesystem::path& path) const;
};

/// Monte-Carlo estimate of (w̄, W, M3, m4) from N draws. Deterministic given
/// the seed. Throws DegenerateCovariance if the sample covariance is not PD.
NoiseStats estimate_noise_stats(const NoiseSampler& sampler, const Eigen::MatrixXd& Q, int N,
                                std::uint64_t seed);

/// Simulates x_{t+1} = A x_t + B u_t + w_t under u = -Kx + l for T steps.
/// Unstable policies are allowed; a state norm above 1e12 throws Overflow.
Trajectory rollout(const Policy& X, int T, const Eigen::VectorXd& x0, const ProblemData& data,
                   const NoiseSampler& sampler, std::uint64_t seed);

/// Single-rollout oracle for the Lagrangian: the T-step time average of the
/// reshaped cost from x0 = 0. burn_in leading steps are simulated but left
/// out of the average (variance reduction; 0 by default).
double noisy_lagrangian(const Policy& X, double mu, int T, const ProblemData& data,
                        const NoiseSampler& sampler, std::uint64_t seed, int burn_in = 0);

/// Single-rollout oracle for the constraint functional: the T-step time
/// average of 4xᵀQWQx + 4xᵀQM3 from x0 = 0.
double noisy_constraint(const Policy& X, int T, const ProblemData& data,
                        const NoiseSampler& sampler, std::uint64_t seed, int burn_in = 0);

/// Empirical one-step-conditional risk: the T-step time average of
/// (x_{t+1}ᵀQx_{t+1} - m_t)² with m_t the exact conditional mean computed
/// from the sampler's true (w̄, W).
double empirical_risk(const Policy& X, int T, const ProblemData& data,
                      const NoiseSampler& sampler, std::uint64_t seed, int burn_in = 0);

}  // namespace rclqr
