#include "rclqr/constraint.hpp"

#include "rclqr/errors.hpp"
#include "rclqr/linalg.hpp"

namespace rclqr {

ConstraintEval eval_constraint(const Policy& X, const ProblemData& data) {
  if (!is_stabilizing(data.A, data.B, X.K)) {
    throw UnstableClosedLoop("eval_constraint: policy is not stabilizing");
  }
  const Eigen::MatrixXd F = data.A - data.B * X.K;
  const auto n = F.rows();
  const Eigen::MatrixXd QWQ = data.Q * data.noise.W * data.Q;

  ConstraintEval out;
  out.P_c = solve_dlyap(F, 4.0 * 0.5 * (QWQ + QWQ.transpose())).P;

  const Eigen::VectorXd drift = data.B * X.l + data.noise.w_bar;
  // g_cᵀ = 2((Bl+w̄)ᵀ P_c F + 2 M3ᵀ Q) V  =>  g_c = 2 Vᵀ (Fᵀ P_c (Bl+w̄) + 2 Q M3)
  const Eigen::VectorXd pre =
      F.transpose() * out.P_c * drift + 2.0 * data.Q * data.noise.M3;
  out.g_c = 2.0 * (Eigen::MatrixXd::Identity(n, n) - F)
                      .transpose()
                      .partialPivLu()
                      .solve(pre);

  out.value = (out.P_c * (data.noise.W + drift * drift.transpose())).trace() +
              out.g_c.dot(drift);
  return out;
}

double dual_subgradient(const Policy& X, const ProblemData& data) {
  return eval_constraint(X, data).value - data.rho_bar;
}

}  // namespace rclqr
