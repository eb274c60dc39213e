#pragma once

#include <Eigen/Dense>

#include "rclqr/model.hpp"

namespace rclqr {

/// Everything the closed-form Lagrangian machinery produces for a stabilizing
/// policy X = [K, l] under multiplier mu:
///
///   P_K      value-function quadratic term, P = Q_mu + KᵀRK + FᵀPF
///   g_X      value-function linear term
///   Sigma_K  stationary state covariance, Sigma = W + F Sigma Fᵀ
///   x_bar    stationary state mean, (I - F)⁻¹ (Bl + w̄)
///   E_K      gain residual (R + BᵀPB)K - BᵀPA
///   G_X      offset residual R_K l + BᵀP w̄ + ½ Bᵀ g_X
///   R_K      R + BᵀPB
///   Phi_X    ergodic second-moment matrix of (x, -1), always PD
///   value    the scalar Lagrangian L(X, mu)
///
/// with F = A - BK throughout.
struct LagrangianEval {
  Eigen::MatrixXd P_K;
  Eigen::VectorXd g_X;
  Eigen::MatrixXd Sigma_K;
  Eigen::VectorXd x_bar;
  Eigen::MatrixXd E_K;
  Eigen::VectorXd G_X;
  Eigen::MatrixXd R_K;
  Eigen::MatrixXd Phi_X;
  double value = 0.0;
};

/// Gradient of the Lagrangian in X, partitioned into its K and l blocks.
/// Equals 2 [E_K, G_X] Phi_X.
struct Gradient {
  Eigen::MatrixXd dK;
  Eigen::VectorXd dl;

  double frobenius_norm() const { return std::sqrt(dK.squaredNorm() + dl.squaredNorm()); }

  /// Stacks [dK, dl] into one m x (n+1) matrix.
  Eigen::MatrixXd stacked() const;
};

/// Stationary mean and covariance of the closed loop under X.
/// Throws UnstableClosedLoop if X is not stabilizing.
struct StationaryMoments {
  Eigen::VectorXd x_bar;
  Eigen::MatrixXd Sigma_K;
};
StationaryMoments stationary_moments(const Policy& X, const ProblemData& data);

/// Full closed-form evaluation of L(X, mu) and its building blocks.
LagrangianEval evaluate_lagrangian(const Policy& X, double mu, const ProblemData& data);

/// Exact policy gradient 2 [E_K, G_X] Phi_X.
Gradient lagrangian_gradient(const Policy& X, double mu, const ProblemData& data);
Gradient lagrangian_gradient(const LagrangianEval& eval);

/// The unique critical point X*(mu): K from the Riccati solution with weight
/// Q_mu, l from the zero of the offset residual.
Policy critical_point(double mu, const ProblemData& data);

/// Closed-form gap L(X', mu) - L(X, mu) built from the stationary moments of
/// X' and the residuals of X. Independent of evaluate_lagrangian up to the
/// shared Lyapunov kernel, which makes it a useful cross-check.
double lagrangian_gap(const Policy& X, const Policy& X_prime, double mu, const ProblemData& data);

/// Infinite-horizon advantage of playing u = -K'x + l' for one step at state
/// x against the policy X, in closed form.
double advantage_limit(const Policy& X, const Policy& X_prime, const Eigen::VectorXd& x, double mu,
                       const ProblemData& data);

/// Expectation of advantage_limit over the stationary distribution of
/// X_prime. Equals lagrangian_gap; exposed for the consistency tests.
double mean_advantage_under_stationary(const Policy& X, const Policy& X_prime, double mu,
                                       const ProblemData& data);

}  // namespace rclqr
