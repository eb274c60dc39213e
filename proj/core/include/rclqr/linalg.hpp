#pragma once

#include <Eigen/Dense>

namespace rclqr {

/// Solution of a discrete Lyapunov equation P = C + Fᵀ P F together with the
/// Frobenius residual of the defining equation.
struct LyapunovSolution {
  Eigen::MatrixXd P;
  double residual = 0.0;
};

/// Largest eigenvalue modulus of a square matrix.
double spectral_radius(const Eigen::MatrixXd& M);

/// True iff rho(A - B K) < 1 - margin, the stabilizing-policy membership test.
bool is_stabilizing(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& K,
                    double margin = 1e-9);

/// Unique symmetric P with P = C + Fᵀ P F, for rho(F) < 1 and symmetric C.
///
/// Solved by Kronecker vectorization, (I - Fᵀ⊗Fᵀ) vec(P) = vec(C), which is
/// exact to machine precision at the problem sizes this library targets
/// (n <= ~50). Larger systems fall back to the quadratically convergent
/// doubling iteration P <- P + FᵀPF, F <- F².
///
/// Throws UnstableClosedLoop if rho(F) >= 1 - margin and SingularSystem if
/// the linear solve cannot meet the residual tolerance.
LyapunovSolution solve_dlyap(const Eigen::MatrixXd& F, const Eigen::MatrixXd& C);

/// Stabilizing solution of the discrete algebraic Riccati equation
/// P = Q + AᵀPA - AᵀPB (R + BᵀPB)⁻¹ BᵀPA, found by iterating the Riccati map
/// from P0 = Q to a 1e-12 fixed-point tolerance.
///
/// Throws NoStabilizingSolution if the iteration budget is exhausted or the
/// induced gain fails to stabilize.
Eigen::MatrixXd solve_dare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R);

/// Gain induced by a DARE solution: K = (R + BᵀPB)⁻¹ BᵀPA.
Eigen::MatrixXd dare_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                          const Eigen::MatrixXd& R, const Eigen::MatrixXd& P);

}  // namespace rclqr
