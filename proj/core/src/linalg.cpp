#include "rclqr/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include "rclqr/errors.hpp"

namespace rclqr {
namespace {

constexpr double kStabilityMargin = 1e-9;
constexpr int kKroneckerMaxDim = 50;

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& M) { return 0.5 * (M + M.transpose()); }

double lyap_residual(const Eigen::MatrixXd& F, const Eigen::MatrixXd& C,
                     const Eigen::MatrixXd& P) {
  return (P - C - F.transpose() * P * F).norm();
}

Eigen::MatrixXd dlyap_kronecker(const Eigen::MatrixXd& F, const Eigen::MatrixXd& C) {
  const auto n = F.rows();
  const Eigen::MatrixXd Ft = F.transpose();
  Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(n * n, n * n) -
                        Eigen::kroneckerProduct(Ft, Ft).eval();
  Eigen::Map<const Eigen::VectorXd> rhs(C.data(), C.size());
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(lhs);
  Eigen::VectorXd vec_p = lu.solve(rhs);
  return Eigen::Map<Eigen::MatrixXd>(vec_p.data(), n, n);
}

Eigen::MatrixXd dlyap_doubling(const Eigen::MatrixXd& F, const Eigen::MatrixXd& C) {
  Eigen::MatrixXd P = C;
  Eigen::MatrixXd Fj = F;
  for (int j = 0; j < 200; ++j) {
    const Eigen::MatrixXd update = Fj.transpose() * P * Fj;
    P += update;
    if (update.norm() <= 1e-16 * std::max(1.0, P.norm())) break;
    Fj = (Fj * Fj).eval();
  }
  return P;
}

}  // namespace

double spectral_radius(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols()) throw SingularSystem("spectral_radius: matrix must be square");
  if (M.rows() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw SingularSystem("spectral_radius: eigenvalue solver failed");
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool is_stabilizing(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& K,
                    double margin) {
  return spectral_radius(A - B * K) <= 1.0 - margin;
}

LyapunovSolution solve_dlyap(const Eigen::MatrixXd& F, const Eigen::MatrixXd& C) {
  if (F.rows() != F.cols() || C.rows() != C.cols() || F.rows() != C.rows()) {
    throw SingularSystem("solve_dlyap: dimension mismatch");
  }
  if (spectral_radius(F) > 1.0 - kStabilityMargin) {
    throw UnstableClosedLoop("solve_dlyap: rho(F) >= 1, no stationary solution");
  }
  Eigen::MatrixXd P = (F.rows() <= kKroneckerMaxDim) ? dlyap_kronecker(F, C)
                                                     : dlyap_doubling(F, C);
  P = symmetrize(P);
  LyapunovSolution sol{P, lyap_residual(F, C, P)};
  if (!P.allFinite() || sol.residual > 1e-10 * std::max(1.0, P.norm())) {
    throw SingularSystem("solve_dlyap: ill-conditioned solve, residual " +
                         std::to_string(sol.residual));
  }
  return sol;
}

Eigen::MatrixXd dare_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                          const Eigen::MatrixXd& R, const Eigen::MatrixXd& P) {
  return (R + B.transpose() * P * B).ldlt().solve(B.transpose() * P * A);
}

Eigen::MatrixXd solve_dare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
  constexpr int kMaxIters = 100000;
  constexpr double kFixedPointTol = 1e-12;

  Eigen::MatrixXd P = symmetrize(Q);
  bool converged = false;
  for (int i = 0; i < kMaxIters; ++i) {
    const Eigen::MatrixXd BtP = B.transpose() * P;
    const Eigen::MatrixXd gain = (R + BtP * B).ldlt().solve(BtP * A);
    const Eigen::MatrixXd next =
        symmetrize(Q + A.transpose() * P * A - A.transpose() * BtP.transpose() * gain);
    const double change = (next - P).norm();
    P = next;
    if (!P.allFinite()) {
      throw NoStabilizingSolution("solve_dare: iteration diverged");
    }
    if (change <= kFixedPointTol * std::max(1.0, P.norm())) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw NoStabilizingSolution("solve_dare: iteration budget exhausted");
  }
  const Eigen::MatrixXd residual =
      P - Q - A.transpose() * P * A +
      A.transpose() * P * B * (R + B.transpose() * P * B).ldlt().solve(B.transpose() * P * A);
  if (residual.norm() > 1e-8 * std::max(1.0, P.norm())) {
    throw NoStabilizingSolution("solve_dare: residual check failed");
  }
  if (spectral_radius(A - B * dare_gain(A, B, R, P)) >= 1.0) {
    throw NoStabilizingSolution("solve_dare: induced gain does not stabilize");
  }
  return P;
}

}  // namespace rclqr
