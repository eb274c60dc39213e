#include "rclqr/lagrangian.hpp"

#include "rclqr/errors.hpp"
#include "rclqr/linalg.hpp"

namespace rclqr {
namespace {

void require_stabilizing(const Policy& X, const ProblemData& data, const char* where) {
  if (!is_stabilizing(data.A, data.B, X.K)) {
    throw UnstableClosedLoop(std::string(where) + ": policy is not stabilizing");
  }
}

}  // namespace

Eigen::MatrixXd Gradient::stacked() const {
  Eigen::MatrixXd out(dK.rows(), dK.cols() + 1);
  out << dK, dl;
  return out;
}

StationaryMoments stationary_moments(const Policy& X, const ProblemData& data) {
  require_stabilizing(X, data, "stationary_moments");
  const Eigen::MatrixXd F = data.A - data.B * X.K;
  const auto n = F.rows();
  StationaryMoments out;
  out.x_bar = (Eigen::MatrixXd::Identity(n, n) - F)
                  .partialPivLu()
                  .solve(data.B * X.l + data.noise.w_bar);
  // Sigma = W + F Sigma Fᵀ, i.e. the Fᵀ orientation of the P = C + FᵀPF kernel.
  out.Sigma_K = solve_dlyap(F.transpose(), data.noise.W).P;
  return out;
}

LagrangianEval evaluate_lagrangian(const Policy& X, double mu, const ProblemData& data) {
  require_stabilizing(X, data, "evaluate_lagrangian");
  if (mu < 0.0) throw ConfigError("evaluate_lagrangian: mu must be nonnegative");

  const ReshapedCostParams params = reshaped_params(mu, data);
  const Eigen::MatrixXd F = data.A - data.B * X.K;
  const auto n = F.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);

  LagrangianEval ev;
  ev.P_K = solve_dlyap(F, params.Q_mu + X.K.transpose() * data.R * X.K).P;
  ev.R_K = data.R + data.B.transpose() * ev.P_K * data.B;
  ev.E_K = ev.R_K * X.K - data.B.transpose() * ev.P_K * data.A;

  // g_Xᵀ = 2 (-lᵀE_K + Sᵀ + w̄ᵀ P_K F) V with V = (I - F)⁻¹.
  const Eigen::VectorXd g_pre =
      -ev.E_K.transpose() * X.l + params.S + F.transpose() * ev.P_K * data.noise.w_bar;
  ev.g_X = 2.0 * (I - F).transpose().partialPivLu().solve(g_pre);

  const StationaryMoments moments = stationary_moments(X, data);
  ev.x_bar = moments.x_bar;
  ev.Sigma_K = moments.Sigma_K;

  ev.G_X = ev.R_K * X.l + data.B.transpose() * ev.P_K * data.noise.w_bar +
           0.5 * data.B.transpose() * ev.g_X;

  ev.Phi_X.resize(n + 1, n + 1);
  ev.Phi_X.topLeftCorner(n, n) = ev.Sigma_K + ev.x_bar * ev.x_bar.transpose();
  ev.Phi_X.topRightCorner(n, 1) = -ev.x_bar;
  ev.Phi_X.bottomLeftCorner(1, n) = -ev.x_bar.transpose();
  ev.Phi_X(n, n) = 1.0;

  const Eigen::VectorXd drift = data.B * X.l + data.noise.w_bar;
  ev.value = (ev.P_K * (data.noise.W + drift * drift.transpose())).trace() +
             ev.g_X.dot(drift) + X.l.dot(data.R * X.l) - mu * data.rho_bar;
  return ev;
}

Gradient lagrangian_gradient(const LagrangianEval& ev) {
  const auto m = ev.E_K.rows();
  const auto n = ev.E_K.cols();
  Eigen::MatrixXd blocks(m, n + 1);
  blocks << ev.E_K, ev.G_X;
  const Eigen::MatrixXd full = 2.0 * blocks * ev.Phi_X;
  return Gradient{full.leftCols(n), full.col(n)};
}

Gradient lagrangian_gradient(const Policy& X, double mu, const ProblemData& data) {
  return lagrangian_gradient(evaluate_lagrangian(X, mu, data));
}

Policy critical_point(double mu, const ProblemData& data) {
  if (mu < 0.0) throw ConfigError("critical_point: mu must be nonnegative");
  const ReshapedCostParams params = reshaped_params(mu, data);
  const Eigen::MatrixXd P = solve_dare(data.A, data.B, params.Q_mu, data.R);
  Policy X;
  X.K = dare_gain(data.A, data.B, data.R, P);

  const Eigen::MatrixXd F = data.A - data.B * X.K;
  const auto n = F.rows();
  const Eigen::MatrixXd R_K = data.R + data.B.transpose() * P * data.B;
  // l = -R_K⁻¹ Bᵀ Vᵀ (P w̄ + S), V = (I - F)⁻¹.
  const Eigen::VectorXd vt_term = (Eigen::MatrixXd::Identity(n, n) - F)
                                      .transpose()
                                      .partialPivLu()
                                      .solve(P * data.noise.w_bar + params.S);
  X.l = -R_K.ldlt().solve(data.B.transpose() * vt_term);
  return X;
}

double lagrangian_gap(const Policy& X, const Policy& X_prime, double mu, const ProblemData& data) {
  require_stabilizing(X, data, "lagrangian_gap");
  require_stabilizing(X_prime, data, "lagrangian_gap (X')");

  const LagrangianEval ev = evaluate_lagrangian(X, mu, data);
  const StationaryMoments prime = stationary_moments(X_prime, data);
  const Eigen::MatrixXd second_moment =
      prime.Sigma_K + prime.x_bar * prime.x_bar.transpose();

  const Eigen::MatrixXd dK = X_prime.K - X.K;
  const Eigen::VectorXd dl = X_prime.l - X.l;

  double gap = 0.0;
  gap += (dK.transpose() * ev.R_K * dK * second_moment).trace();
  gap += 2.0 * (dK.transpose() * ev.E_K * second_moment).trace();
  gap -= 2.0 * ev.G_X.dot(dK * prime.x_bar);
  gap -= 2.0 * dl.dot(ev.R_K * dK * prime.x_bar);
  gap += dl.dot(ev.R_K * dl);
  gap -= 2.0 * dl.dot(ev.E_K * prime.x_bar);
  gap += 2.0 * dl.dot(ev.G_X);
  return gap;
}

double advantage_limit(const Policy& X, const Policy& X_prime, const Eigen::VectorXd& x, double mu,
                       const ProblemData& data) {
  const LagrangianEval ev = evaluate_lagrangian(X, mu, data);
  const Eigen::VectorXd residual = ev.E_K * x - ev.G_X;
  const Eigen::VectorXd delta =
      (X_prime.K - X.K) * x - (X_prime.l - X.l) + ev.R_K.ldlt().solve(residual);
  return delta.dot(ev.R_K * delta) - residual.dot(ev.R_K.ldlt().solve(residual));
}

double mean_advantage_under_stationary(const Policy& X, const Policy& X_prime, double mu,
                                       const ProblemData& data) {
  const LagrangianEval ev = evaluate_lagrangian(X, mu, data);
  const StationaryMoments prime = stationary_moments(X_prime, data);

  // advantage(x) = (Mx + c)ᵀ R_K (Mx + c) - (E_K x - G_X)ᵀ R_K⁻¹ (E_K x - G_X)
  const Eigen::MatrixXd R_K_inv_E = ev.R_K.ldlt().solve(ev.E_K);
  const Eigen::VectorXd R_K_inv_G = ev.R_K.ldlt().solve(ev.G_X);
  const Eigen::MatrixXd M = (X_prime.K - X.K) + R_K_inv_E;
  const Eigen::VectorXd c = -(X_prime.l - X.l) - R_K_inv_G;

  // E[(Mx+c)ᵀ R (Mx+c)] = tr{Mᵀ R M Sigma'} + (M x̄' + c)ᵀ R (M x̄' + c)
  const Eigen::VectorXd mean_first = M * prime.x_bar + c;
  double out = (M.transpose() * ev.R_K * M * prime.Sigma_K).trace() +
               mean_first.dot(ev.R_K * mean_first);
  const Eigen::VectorXd mean_second = ev.E_K * prime.x_bar - ev.G_X;
  out -= (ev.E_K.transpose() * ev.R_K.ldlt().solve(ev.E_K) * prime.Sigma_K).trace() +
         mean_second.dot(ev.R_K.ldlt().solve(mean_second));
  return out;
}

}  // namespace rclqr
