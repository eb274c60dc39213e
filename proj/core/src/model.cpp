#include "rclqr/model.hpp"

#include <Eigen/Eigenvalues>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "rclqr/errors.hpp"

namespace rclqr {
namespace {

constexpr double kRankTol = 1e-9;

bool is_symmetric(const Eigen::MatrixXd& M, double tol = 1e-9) {
  return (M - M.transpose()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, M.cwiseAbs().maxCoeff());
}

bool is_psd(const Eigen::MatrixXd& M, double tol = 1e-9) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  return es.info() == Eigen::Success && es.eigenvalues().minCoeff() >= -tol;
}

bool is_pd(const Eigen::MatrixXd& M, double tol = 1e-12) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  return es.info() == Eigen::Success && es.eigenvalues().minCoeff() > tol;
}

// Rank of the Kalman matrix [B, AB, ..., A^{n-1}B] via SVD with the tolerance
// the rank test in Assumption 1 leaves unspecified.
int kalman_rank(const Eigen::MatrixXd& A, const Eigen::MatrixXd& cols) {
  const int n = static_cast<int>(A.rows());
  const int p = static_cast<int>(cols.cols());
  Eigen::MatrixXd K(n, n * p);
  Eigen::MatrixXd block = cols;
  for (int i = 0; i < n; ++i) {
    K.middleCols(i * p, p) = block;
    block = A * block;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(K);
  const auto& sv = svd.singularValues();
  const double cutoff = kRankTol * std::max(1.0, sv.size() > 0 ? sv[0] : 0.0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv[i] > cutoff) ++rank;
  }
  return rank;
}

Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& M) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const char* name) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw ConfigError(std::string(name) + ": expected an array of row arrays");
  }
  const auto rows = j.size();
  const auto cols = j[0].size();
  Eigen::MatrixXd M(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      throw ConfigError(std::string(name) + ": ragged rows");
    }
    for (std::size_t c = 0; c < cols; ++c) M(i, c) = j[i][c].get<double>();
  }
  return M;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j, const char* name) {
  if (!j.is_array()) throw ConfigError(std::string(name) + ": expected an array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

}  // namespace

void NoiseStats::validate() const {
  const auto n = w_bar.size();
  if (W.rows() != n || W.cols() != n || M3.size() != n) {
    throw ConfigError("NoiseStats: inconsistent dimensions");
  }
  if (!is_symmetric(W)) throw ConfigError("NoiseStats: W must be symmetric");
  if (!is_pd(W)) throw ConfigError("NoiseStats: W must be positive definite");
  if (m4 < 0.0) throw ConfigError("NoiseStats: m4 must be nonnegative");
}

void ProblemData::validate() const {
  const int n = state_dim();
  const int m = input_dim();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != m ||
      R.cols() != m) {
    throw ConfigError("ProblemData: inconsistent matrix dimensions");
  }
  if (!is_symmetric(Q) || !is_psd(Q)) throw ConfigError("ProblemData: Q must be symmetric PSD");
  if (!is_symmetric(R) || !is_pd(R)) throw ConfigError("ProblemData: R must be symmetric PD");
  noise.validate();
  if (noise.w_bar.size() != n) throw ConfigError("ProblemData: noise dimension mismatch");
  if (kalman_rank(A, B) != n) throw ConfigError("ProblemData: (A, B) is not controllable");
  if (kalman_rank(A.transpose(), matrix_sqrt_psd(Q).transpose()) != n) {
    throw ConfigError("ProblemData: (A, Q^{1/2}) is not observable");
  }
}

ProblemData ProblemData::make(Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::MatrixXd Q,
                              Eigen::MatrixXd R, NoiseStats noise, double rho_bar) {
  ProblemData data{std::move(A), std::move(B), std::move(Q), std::move(R), std::move(noise),
                   rho_bar};
  data.validate();
  return data;
}

double derive_rho_bar(double rho, const NoiseStats& noise, const Eigen::MatrixXd& Q) {
  const Eigen::MatrixXd WQ = noise.W * Q;
  return rho - noise.m4 + 4.0 * (WQ * WQ).trace();
}

double derive_rho(double rho_bar, const NoiseStats& noise, const Eigen::MatrixXd& Q) {
  const Eigen::MatrixXd WQ = noise.W * Q;
  return rho_bar + noise.m4 - 4.0 * (WQ * WQ).trace();
}

ReshapedCostParams reshaped_params(double mu, const ProblemData& data) {
  if (mu < 0.0) throw ConfigError("reshaped_params: mu must be nonnegative");
  ReshapedCostParams p;
  p.mu = mu;
  p.Q_mu = data.Q + 4.0 * mu * data.Q * data.noise.W * data.Q;
  p.Q_mu = 0.5 * (p.Q_mu + p.Q_mu.transpose()).eval();
  p.S = 2.0 * mu * data.Q * data.noise.M3;
  return p;
}

double stage_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                  const ReshapedCostParams& params, const Eigen::MatrixXd& R, double rho_bar) {
  return x.dot(params.Q_mu * x) + 2.0 * x.dot(params.S) + u.dot(R * u) - params.mu * rho_bar;
}

std::string problem_to_json(const ProblemData& data) {
  nlohmann::json j;
  j["A"] = matrix_to_json(data.A);
  j["B"] = matrix_to_json(data.B);
  j["Q"] = matrix_to_json(data.Q);
  j["R"] = matrix_to_json(data.R);
  j["w_bar"] = vector_to_json(data.noise.w_bar);
  j["W"] = matrix_to_json(data.noise.W);
  j["M3"] = vector_to_json(data.noise.M3);
  j["m4"] = data.noise.m4;
  j["rho_bar"] = data.rho_bar;
  return j.dump(2);
}

ProblemData problem_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("ProblemData: invalid JSON: ") + e.what());
  }
  for (const char* key : {"A", "B", "Q", "R", "w_bar", "W", "M3", "m4"}) {
    if (!j.contains(key)) throw ConfigError(std::string("ProblemData: missing field ") + key);
  }
  NoiseStats noise;
  noise.w_bar = vector_from_json(j["w_bar"], "w_bar");
  noise.W = matrix_from_json(j["W"], "W");
  noise.M3 = vector_from_json(j["M3"], "M3");
  noise.m4 = j["m4"].get<double>();

  const Eigen::MatrixXd Q = matrix_from_json(j["Q"], "Q");
  const bool has_rho_bar = j.contains("rho_bar");
  const bool has_rho = j.contains("rho");
  if (has_rho_bar && has_rho) {
    throw ConfigError("ProblemData: specify exactly one of rho and rho_bar");
  }
  if (!has_rho_bar && !has_rho) {
    throw ConfigError("ProblemData: one of rho or rho_bar is required");
  }
  const double rho_bar = has_rho_bar ? j["rho_bar"].get<double>()
                                     : derive_rho_bar(j["rho"].get<double>(), noise, Q);
  return ProblemData::make(matrix_from_json(j["A"], "A"), matrix_from_json(j["B"], "B"), Q,
                           matrix_from_json(j["R"], "R"), std::move(noise), rho_bar);
}

ProblemData problem_from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open problem file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return problem_from_json(ss.str());
}

}  // namespace rclqr
