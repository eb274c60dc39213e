#include "rclqr/presets.hpp"

namespace rclqr {
namespace {

Eigen::MatrixXd paper_A() {
  Eigen::MatrixXd A(4, 4);
  A << 1, 0.5, 0, 0,
       0, 1, 0, 0,
       0, 0, 1, 0.5,
       0, 0, 0, 1;
  return A;
}

Eigen::MatrixXd paper_B() {
  Eigen::MatrixXd B(4, 2);
  B << 0.125, 0,
       0.5, 0,
       0, 0.125,
       0, 0.5;
  return B;
}

}  // namespace

const NoiseSampler& paper_noise_sampler() {
  static const NoiseSampler sampler = NoiseSampler::paper_mixed(paper_B());
  return sampler;
}

const ProblemData& paper_problem() {
  static const ProblemData data = [] {
    const Eigen::MatrixXd A = paper_A();
    const Eigen::MatrixXd B = paper_B();
    const Eigen::MatrixXd Q = Eigen::Vector4d(1.0, 0.1, 2.0, 0.2).asDiagonal();
    const Eigen::MatrixXd R = Eigen::MatrixXd::Identity(2, 2);
    const NoiseStats stats =
        estimate_noise_stats(paper_noise_sampler(), Q, kPaperStatsSamples, kPaperStatsSeed);
    return ProblemData::make(A, B, Q, R, stats, /*rho_bar=*/15.0);
  }();
  return data;
}

Policy paper_initial_policy() {
  Policy X;
  X.K.resize(2, 4);
  X.K << 0.5, 0.5, 0, 0,
         0, 0, 0.5, 0.5;
  X.l.resize(2);
  X.l << -6.0, 0.0;
  return X;
}

bool is_known_preset(const std::string& name) { return name == "paper-model"; }

}  // namespace rclqr
