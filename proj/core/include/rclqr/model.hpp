#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>

namespace rclqr {

/// Moments of the iid process noise w_t: mean, covariance, and the third- and
/// fourth-order functionals that enter the reformulated risk constraint.
/// M3 = E[(w-w̄)(w-w̄)ᵀ Q (w-w̄)] and m4 = E[((w-w̄)ᵀQ(w-w̄) - tr{WQ})²].
struct NoiseStats {
  Eigen::VectorXd w_bar;  ///< mean
  Eigen::MatrixXd W;      ///< covariance, symmetric positive definite
  Eigen::VectorXd M3;     ///< third-moment vector (depends on the cost weight Q)
  double m4 = 0.0;        ///< fourth-moment scalar, >= 0

  void validate() const;
};

/// Affine state-feedback policy u = -K x + l.
struct Policy {
  Eigen::MatrixXd K;
  Eigen::VectorXd l;

  int state_dim() const { return static_cast<int>(K.cols()); }
  int input_dim() const { return static_cast<int>(K.rows()); }

  static Policy zero(int n, int m) {
    return Policy{Eigen::MatrixXd::Zero(m, n), Eigen::VectorXd::Zero(m)};
  }
};

/// Immutable description of one risk-constrained LQR instance:
/// dynamics (A, B), cost weights (Q, R), noise statistics, and the
/// reformulated risk tolerance rho_bar.
///
/// Construction validates symmetry/definiteness of the weights, positive
/// definiteness of W, controllability of (A, B) and observability of
/// (A, Q^{1/2}) via rank tests on the Kalman matrices.
struct ProblemData {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
  NoiseStats noise;
  double rho_bar = 0.0;

  int state_dim() const { return static_cast<int>(A.rows()); }
  int input_dim() const { return static_cast<int>(B.cols()); }

  /// Checks every construction invariant; throws ConfigError on violation.
  void validate() const;

  /// Factory that validates and returns the instance.
  static ProblemData make(Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::MatrixXd Q,
                          Eigen::MatrixXd R, NoiseStats noise, double rho_bar);
};

/// Parameters of the reshaped per-stage cost under multiplier mu:
/// Q_mu = Q + 4 mu Q W Q and S = 2 mu Q M3.
struct ReshapedCostParams {
  Eigen::MatrixXd Q_mu;
  Eigen::VectorXd S;
  double mu = 0.0;
};

/// Reformulated tolerance: rho - m4 + 4 tr{(WQ)²}.
double derive_rho_bar(double rho, const NoiseStats& noise, const Eigen::MatrixXd& Q);

/// Inverse of derive_rho_bar; recovers the original risk tolerance rho.
double derive_rho(double rho_bar, const NoiseStats& noise, const Eigen::MatrixXd& Q);

ReshapedCostParams reshaped_params(double mu, const ProblemData& data);

/// Per-stage reshaped cost xᵀQ_mu x + 2xᵀS + uᵀRu - mu*rho_bar.
double stage_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                  const ReshapedCostParams& params, const Eigen::MatrixXd& R,
                  double rho_bar);

/// JSON serialization of ProblemData. Matrices are arrays of row arrays with
/// fields {A, B, Q, R, w_bar, W, M3, m4, rho_bar}.
std::string problem_to_json(const ProblemData& data);
ProblemData problem_from_json(const std::string& text);
ProblemData problem_from_json_file(const std::filesystem::path& path);

}  // namespace rclqr
