#include "rclqr/simulator.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <numeric>

#include "rclqr/csv.hpp"
#include "rclqr/errors.hpp"

namespace rclqr {
namespace {

constexpr double kOverflowNorm = 1e12;
constexpr double kPaperClip = 1e4;

Eigen::VectorXd clip(Eigen::VectorXd v, std::optional<double> bound) {
  if (bound) {
    v = v.cwiseMax(-*bound).cwiseMin(*bound);
  }
  return v;
}

// Mixture components of the benchmark's first driving channel:
// N(3, 30) and N(8, 60) with variances as the second parameter.
double sample_mixed_channel(RngStream& rng, double first_weight) {
  const bool first = rng.uniform() < first_weight;
  const double mean = first ? 3.0 : 8.0;
  const double stddev = std::sqrt(first ? 30.0 : 60.0);
  return mean + stddev * rng.normal();
}

double mixed_channel_mean(double first_weight) {
  return first_weight * 3.0 + (1.0 - first_weight) * 8.0;
}

double mixed_channel_variance(double first_weight) {
  const double second_moment =
      first_weight * (30.0 + 3.0 * 3.0) + (1.0 - first_weight) * (60.0 + 8.0 * 8.0);
  const double mean = mixed_channel_mean(first_weight);
  return second_moment - mean * mean;
}

constexpr double kMixVar2 = 0.01;
constexpr double kAdditiveVar = 0.01;

}  // namespace

NoiseSampler NoiseSampler::gaussian(Eigen::VectorXd mean, Eigen::MatrixXd covariance,
                                    std::optional<double> clip_bound) {
  NoiseSampler s;
  s.kind_ = Kind::Gaussian;
  s.dim_ = static_cast<int>(mean.size());
  s.clip_bound_ = clip_bound;
  s.mean_ = std::move(mean);
  s.cov_ = std::move(covariance);
  Eigen::LLT<Eigen::MatrixXd> llt(s.cov_);
  if (llt.info() != Eigen::Success) {
    // allow PSD covariances (including exactly zero) via eigen factorization
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.cov_);
    if (es.eigenvalues().minCoeff() < -1e-12) {
      throw ConfigError("NoiseSampler: covariance must be PSD");
    }
    s.chol_ = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  } else {
    s.chol_ = llt.matrixL();
  }
  return s;
}

NoiseSampler NoiseSampler::paper_mixed(Eigen::MatrixXd B, double first_weight) {
  if (B.cols() != 2) throw ConfigError("NoiseSampler: paper_mixed expects an n x 2 input map");
  if (first_weight < 0.0 || first_weight > 1.0) {
    throw ConfigError("NoiseSampler: mixture weight must be in [0, 1]");
  }
  NoiseSampler s;
  s.kind_ = Kind::PaperMixed;
  s.dim_ = static_cast<int>(B.rows());
  s.clip_bound_ = kPaperClip;
  s.mix_B_ = std::move(B);
  s.mix_first_weight_ = first_weight;
  return s;
}

NoiseSampler NoiseSampler::custom_table(std::vector<Eigen::VectorXd> support,
                                        std::vector<double> weights) {
  if (support.empty()) throw ConfigError("NoiseSampler: empty support table");
  NoiseSampler s;
  s.kind_ = Kind::CustomTable;
  s.dim_ = static_cast<int>(support[0].size());
  if (weights.empty()) weights.assign(support.size(), 1.0);
  if (weights.size() != support.size()) {
    throw ConfigError("NoiseSampler: weights/support size mismatch");
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (total <= 0.0) throw ConfigError("NoiseSampler: weights must sum to a positive value");
  double acc = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw ConfigError("NoiseSampler: negative weight");
    acc += w / total;
    s.cumweights_.push_back(acc);
  }
  s.cumweights_.back() = 1.0;
  s.support_ = std::move(support);
  return s;
}

Eigen::VectorXd NoiseSampler::sample(RngStream& rng) const {
  switch (kind_) {
    case Kind::Gaussian:
      return clip(mean_ + chol_ * rng.normal_vector(dim_), clip_bound_);
    case Kind::PaperMixed: {
      Eigen::VectorXd v(2);
      v[0] = sample_mixed_channel(rng, mix_first_weight_);
      v[1] = std::sqrt(kMixVar2) * rng.normal();
      const Eigen::VectorXd e = std::sqrt(kAdditiveVar) * rng.normal_vector(dim_);
      return clip(mix_B_ * v + e, clip_bound_);
    }
    case Kind::CustomTable: {
      const double u = rng.uniform();
      const auto it = std::lower_bound(cumweights_.begin(), cumweights_.end(), u);
      const auto idx = std::min<std::size_t>(it - cumweights_.begin(), support_.size() - 1);
      return clip(support_[idx], clip_bound_);
    }
  }
  throw ConfigError("NoiseSampler: unknown kind");
}

Eigen::VectorXd NoiseSampler::mean() const {
  switch (kind_) {
    case Kind::Gaussian:
      return mean_;
    case Kind::PaperMixed: {
      Eigen::VectorXd v(2);
      v << mixed_channel_mean(mix_first_weight_), 0.0;
      return mix_B_ * v;
    }
    case Kind::CustomTable: {
      Eigen::VectorXd m = Eigen::VectorXd::Zero(dim_);
      double prev = 0.0;
      for (std::size_t i = 0; i < support_.size(); ++i) {
        m += (cumweights_[i] - prev) * support_[i];
        prev = cumweights_[i];
      }
      return m;
    }
  }
  throw ConfigError("NoiseSampler: unknown kind");
}

Eigen::MatrixXd NoiseSampler::covariance() const {
  switch (kind_) {
    case Kind::Gaussian:
      return cov_;
    case Kind::PaperMixed: {
      Eigen::Matrix2d driver_cov;
      driver_cov << mixed_channel_variance(mix_first_weight_), 0.0, 0.0, kMixVar2;
      return mix_B_ * driver_cov * mix_B_.transpose() +
             kAdditiveVar * Eigen::MatrixXd::Identity(dim_, dim_);
    }
    case Kind::CustomTable: {
      const Eigen::VectorXd m = mean();
      Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim_, dim_);
      double prev = 0.0;
      for (std::size_t i = 0; i < support_.size(); ++i) {
        const Eigen::VectorXd c = support_[i] - m;
        cov += (cumweights_[i] - prev) * c * c.transpose();
        prev = cumweights_[i];
      }
      return cov;
    }
  }
  throw ConfigError("NoiseSampler: unknown kind");
}

void Trajectory::write_csv(const std::filesystem::path& path) const {
  const int n = states.empty() ? 0 : static_cast<int>(states[0].size());
  const int m = inputs.empty() ? 0 : static_cast<int>(inputs[0].size());
  std::vector<std::string> columns{"t"};
  for (int i = 1; i <= n; ++i) columns.push_back("x" + std::to_string(i));
  for (int i = 1; i <= m; ++i) columns.push_back("u" + std::to_string(i));
  CsvWriter csv(path, columns);
  for (std::size_t t = 0; t < states.size(); ++t) {
    std::vector<double> row{static_cast<double>(t)};
    for (int i = 0; i < n; ++i) row.push_back(states[t][i]);
    for (int i = 0; i < m; ++i) row.push_back(t < inputs.size() ? inputs[t][i] : 0.0);
    csv.write_row(row);
  }
}

NoiseStats estimate_noise_stats(const NoiseSampler& sampler, const Eigen::MatrixXd& Q, int N,
                                std::uint64_t seed) {
  if (N < 2) throw ConfigError("estimate_noise_stats: N must be at least 2");
  RngStream rng(seed);
  const int n = sampler.dim();

  std::vector<Eigen::VectorXd> samples;
  samples.reserve(N);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < N; ++i) {
    samples.push_back(sampler.sample(rng));
    mean += samples.back();
  }
  mean /= N;

  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
  for (const auto& w : samples) {
    const Eigen::VectorXd c = w - mean;
    W += c * c.transpose();
  }
  W /= (N - 1);

  Eigen::LLT<Eigen::MatrixXd> llt(W);
  if (llt.info() != Eigen::Success) {
    throw DegenerateCovariance("estimate_noise_stats: sample covariance is not PD");
  }

  const double trWQ = (W * Q).trace();
  Eigen::VectorXd M3 = Eigen::VectorXd::Zero(n);
  double m4 = 0.0;
  for (const auto& w : samples) {
    const Eigen::VectorXd c = w - mean;
    const double q = c.dot(Q * c);
    M3 += c * q;
    m4 += (q - trWQ) * (q - trWQ);
  }
  M3 /= N;
  m4 /= N;

  NoiseStats stats;
  stats.w_bar = mean;
  stats.W = W;
  stats.M3 = M3;
  stats.m4 = m4;
  return stats;
}

Trajectory rollout(const Policy& X, int T, const Eigen::VectorXd& x0, const ProblemData& data,
                   const NoiseSampler& sampler, std::uint64_t seed) {
  if (T <= 0) throw ConfigError("rollout: T must be positive");
  RngStream rng(seed);
  Trajectory traj;
  traj.seed = seed;
  traj.states.reserve(T + 1);
  traj.inputs.reserve(T);

  Eigen::VectorXd x = x0;
  traj.states.push_back(x);
  for (int t = 0; t < T; ++t) {
    const Eigen::VectorXd u = -X.K * x + X.l;
    x = data.A * x + data.B * u + sampler.sample(rng);
    if (x.norm() > kOverflowNorm) {
      throw Overflow("rollout: state norm exceeded 1e12 at t=" + std::to_string(t));
    }
    traj.inputs.push_back(u);
    traj.states.push_back(x);
  }
  return traj;
}

double noisy_lagrangian(const Policy& X, double mu, int T, const ProblemData& data,
                        const NoiseSampler& sampler, std::uint64_t seed, int burn_in) {
  if (T <= 0) throw ConfigError("noisy_lagrangian: T must be positive");
  if (burn_in < 0) throw ConfigError("noisy_lagrangian: burn_in must be nonnegative");
  RngStream rng(seed);
  const ReshapedCostParams params = reshaped_params(mu, data);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(data.state_dim());
  double total = 0.0;
  for (int t = -burn_in; t < T; ++t) {
    const Eigen::VectorXd u = -X.K * x + X.l;
    if (t >= 0) total += stage_cost(x, u, params, data.R, data.rho_bar);
    x = data.A * x + data.B * u + sampler.sample(rng);
    if (x.norm() > kOverflowNorm) {
      throw Overflow("noisy_lagrangian: state norm exceeded 1e12");
    }
  }
  return total / T;
}

double noisy_constraint(const Policy& X, int T, const ProblemData& data,
                        const NoiseSampler& sampler, std::uint64_t seed, int burn_in) {
  if (T <= 0) throw ConfigError("noisy_constraint: T must be positive");
  if (burn_in < 0) throw ConfigError("noisy_constraint: burn_in must be nonnegative");
  RngStream rng(seed);
  const Eigen::MatrixXd QWQ = data.Q * data.noise.W * data.Q;
  const Eigen::VectorXd QM3 = data.Q * data.noise.M3;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(data.state_dim());
  double total = 0.0;
  for (int t = -burn_in; t < T; ++t) {
    if (t >= 0) total += 4.0 * x.dot(QWQ * x) + 4.0 * x.dot(QM3);
    const Eigen::VectorXd u = -X.K * x + X.l;
    x = data.A * x + data.B * u + sampler.sample(rng);
    if (x.norm() > kOverflowNorm) {
      throw Overflow("noisy_constraint: state norm exceeded 1e12");
    }
  }
  return total / T;
}

double empirical_risk(const Policy& X, int T, const ProblemData& data,
                      const NoiseSampler& sampler, std::uint64_t seed, int burn_in) {
  if (T <= 0) throw ConfigError("empirical_risk: T must be positive");
  if (burn_in < 0) throw ConfigError("empirical_risk: burn_in must be nonnegative");
  RngStream rng(seed);
  const Eigen::VectorXd noise_mean = sampler.mean();
  const double tr_QW = (data.Q * sampler.covariance()).trace();

  Eigen::VectorXd x = Eigen::VectorXd::Zero(data.state_dim());
  double total = 0.0;
  for (int t = -burn_in; t < T; ++t) {
    const Eigen::VectorXd u = -X.K * x + X.l;
    const Eigen::VectorXd predicted = data.A * x + data.B * u + noise_mean;
    const double conditional_mean = predicted.dot(data.Q * predicted) + tr_QW;
    x = data.A * x + data.B * u + sampler.sample(rng);
    if (x.norm() > kOverflowNorm) {
      throw Overflow("empirical_risk: state norm exceeded 1e12");
    }
    if (t >= 0) {
      const double deviation = x.dot(data.Q * x) - conditional_mean;
      total += deviation * deviation;
    }
  }
  return total / T;
}

}  // namespace rclqr
