#pragma once

#include <Eigen/Dense>

#include "rclqr/model.hpp"

namespace rclqr {

/// Closed-form value of the risk-constraint functional J_c(X), with the
/// Lyapunov solution P_c and linear coefficient g_c it is assembled from.
struct ConstraintEval {
  Eigen::MatrixXd P_c;
  Eigen::VectorXd g_c;
  double value = 0.0;
};

/// J_c(X) = tr{P_c (W + (Bl+w̄)(Bl+w̄)ᵀ)} + g_cᵀ(Bl+w̄), where
/// P_c = 4QWQ + Fᵀ P_c F and g_cᵀ = 2((Bl+w̄)ᵀ P_c F + 2 M3ᵀQ) V.
/// Throws UnstableClosedLoop if X is not stabilizing.
ConstraintEval eval_constraint(const Policy& X, const ProblemData& data);

/// Subgradient of the dual function at the inner minimizer: J_c(X) - rho_bar.
double dual_subgradient(const Policy& X, const ProblemData& data);

}  // namespace rclqr
