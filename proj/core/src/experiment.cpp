#include "rclqr/experiment.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "rclqr/constraint.hpp"
#include "rclqr/csv.hpp"
#include "rclqr/errors.hpp"
#include "rclqr/lagrangian.hpp"
#include "rclqr/linalg.hpp"
#include "rclqr/presets.hpp"

namespace rclqr {
namespace {

using nlohmann::json;

Eigen::MatrixXd json_matrix(const json& j, const char* name) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw ConfigError(std::string(name) + ": expected an array of row arrays");
  }
  Eigen::MatrixXd M(j.size(), j[0].size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i].size() != j[0].size()) throw ConfigError(std::string(name) + ": ragged rows");
    for (std::size_t c = 0; c < j[i].size(); ++c) M(i, c) = j[i][c].get<double>();
  }
  return M;
}

Eigen::VectorXd json_vector(const json& j, const char* name) {
  if (!j.is_array()) throw ConfigError(std::string(name) + ": expected an array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

json matrix_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(i, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

ExperimentMode parse_mode(const std::string& s) {
  if (s == "inner-compare") return ExperimentMode::InnerCompare;
  if (s == "model-based-pd") return ExperimentMode::ModelBasedPd;
  if (s == "sample-based-pd") return ExperimentMode::SampleBasedPd;
  if (s == "risk-demo") return ExperimentMode::RiskDemo;
  throw ConfigError("unknown mode: " + s);
}

InnerMethod parse_method(const std::string& s) {
  if (s == "pg") return InnerMethod::PG;
  if (s == "npg") return InnerMethod::NPG;
  if (s == "gn") return InnerMethod::GN;
  throw ConfigError("unknown inner method: " + s);
}

InnerConfig parse_inner(const json& j) {
  InnerConfig cfg;
  if (j.contains("method")) cfg.method = parse_method(j["method"].get<std::string>());
  cfg.eta = j.value("eta", InnerConfig::preset_eta(cfg.method));
  cfg.backtracking = j.value("backtracking", false);
  cfg.alpha = j.value("alpha", 0.25);
  cfg.beta = j.value("beta", 0.5);
  cfg.grad_tol = j.value("grad_tol", 1e-9);
  cfg.max_iters = j.value("max_iters", 100000);
  cfg.validate();
  return cfg;
}

NoiseSampler parse_noise(const json& j, const ProblemData& problem) {
  const std::string kind = j.value("kind", std::string("gaussian"));
  std::optional<double> clip;
  if (j.contains("clip")) clip = j["clip"].get<double>();
  if (kind == "paper-mixed") {
    return NoiseSampler::paper_mixed(problem.B);
  }
  if (kind == "gaussian") {
    const Eigen::VectorXd mean =
        j.contains("mean") ? json_vector(j["mean"], "noise.mean") : problem.noise.w_bar;
    const Eigen::MatrixXd cov =
        j.contains("cov") ? json_matrix(j["cov"], "noise.cov") : problem.noise.W;
    return NoiseSampler::gaussian(mean, cov, clip);
  }
  if (kind == "table") {
    if (!j.contains("support")) throw ConfigError("noise.table: missing support");
    std::vector<Eigen::VectorXd> support;
    for (const auto& row : j["support"]) support.push_back(json_vector(row, "noise.support"));
    std::vector<double> weights;
    if (j.contains("weights")) {
      for (const auto& w : j["weights"]) weights.push_back(w.get<double>());
    }
    return NoiseSampler::custom_table(std::move(support), std::move(weights));
  }
  throw ConfigError("unknown noise kind: " + kind);
}

int thread_cap() {
  if (const char* env = std::getenv("RCLQR_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

/// Runs fn(trial) for trial in [0, trials) across worker threads; the first
/// exception, if any, is rethrown on the calling thread.
template <typename Fn>
void parallel_trials(int trials, Fn&& fn) {
  const int workers = std::min(trials, thread_cap());
  if (workers <= 1) {
    for (int t = 0; t < trials; ++t) fn(t);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int t = next.fetch_add(1); t < trials; t = next.fetch_add(1)) {
        try {
          fn(t);
        } catch (...) {
          std::scoped_lock lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

json resolved_config_json(const ExperimentConfig& cfg) {
  json j;
  j["version"] = kVersion;
  j["mode"] = to_string(cfg.mode);
  if (!cfg.problem_preset.empty()) j["problem_preset"] = cfg.problem_preset;
  j["problem"] = json::parse(problem_to_json(cfg.problem));
  j["initial_policy"] = {{"K", matrix_json(cfg.initial_policy.K)},
                         {"l", vector_json(cfg.initial_policy.l)}};
  j["mu"] = cfg.mu;
  j["inner"] = {{"method", to_string(cfg.inner.method)},
                {"eta", cfg.inner.eta},
                {"backtracking", cfg.inner.backtracking},
                {"alpha", cfg.inner.alpha},
                {"beta", cfg.inner.beta},
                {"grad_tol", cfg.inner.grad_tol},
                {"max_iters", cfg.inner.max_iters}};
  j["dual"] = {{"mu_init", cfg.dual.mu_init},
               {"step_constant", cfg.dual.step_constant},
               {"max_outer", cfg.dual.max_outer},
               {"mu_cap", cfg.dual.mu_cap},
               {"stop_tol", cfg.dual.stop_tol}};
  j["search"] = {{"N", cfg.search.search.N},
                 {"r", cfg.search.search.r},
                 {"eta", cfg.search.search.eta},
                 {"T", cfg.search.search.T},
                 {"guard", cfg.search.search.guard == StabilityGuard::ModelCheck
                               ? "model-check"
                               : "overflow-reject"},
                 {"perturb_gain_only", cfg.search.search.perturb_gain_only},
                 {"trace_stride", cfg.search.search.trace_stride}};
  j["risk_horizon"] = cfg.risk_horizon;
  j["demo_horizon"] = cfg.demo_horizon;
  j["output_dir"] = cfg.output_dir.string();
  j["trials"] = cfg.trials;
  j["base_seed"] = cfg.base_seed;
  j["emit_plot_script"] = cfg.emit_plot_script;
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for writing: " + path.string());
  out << text;
}

// Caps how many rows a long trace writes so artifact files stay reviewable.
std::size_t csv_stride(std::size_t rows, std::size_t cap = 20000) {
  return rows <= cap ? 1 : (rows + cap - 1) / cap;
}

ExperimentArtifacts run_inner_compare(const ExperimentConfig& cfg) {
  ExperimentArtifacts artifacts;
  const double L_star = dual_value(cfg.mu, cfg.problem).value;

  for (InnerMethod method : {InnerMethod::PG, InnerMethod::NPG, InnerMethod::GN}) {
    InnerConfig inner = cfg.inner;
    inner.method = method;
    inner.backtracking = cfg.inner.backtracking && method != InnerMethod::GN;
    if (inner.backtracking) {
      // Line-search initial stepsizes tuned for the benchmark model.
      inner.eta = method == InnerMethod::PG ? 0.01 : 0.05;
    } else {
      inner.eta = InnerConfig::preset_eta(method);
    }
    const InnerResult result = solve_inner(cfg.mu, cfg.initial_policy, inner, cfg.problem);

    const auto path = cfg.output_dir / (std::string("inner_") + to_string(method) + ".csv");
    CsvWriter csv(path, {"iter", "lagrangian", "grad_norm", "eta", "rel_error"});
    const std::size_t stride = csv_stride(result.trace.iterates.size());
    for (std::size_t i = 0; i < result.trace.iterates.size(); ++i) {
      if (i % stride != 0 && i + 1 != result.trace.iterates.size()) continue;
      const auto& it = result.trace.iterates[i];
      csv.write_row({static_cast<double>(it.iter), it.lagrangian, it.grad_norm, it.eta,
                     (it.lagrangian - L_star) / std::abs(L_star)});
    }
    artifacts.files.push_back(path);
  }
  return artifacts;
}

ExperimentArtifacts run_model_based_pd(const ExperimentConfig& cfg) {
  ExperimentArtifacts artifacts;
  const PrimalDualResult result = run_model_based(cfg.dual, cfg.problem, cfg.initial_policy);
  const auto trace_path = cfg.output_dir / "model_based_trace.csv";
  result.trace.write_csv(trace_path);
  artifacts.files.push_back(trace_path);

  const auto solution_path = cfg.output_dir / "solution.json";
  write_text(solution_path, solution_to_json(result));
  artifacts.files.push_back(solution_path);
  return artifacts;
}

ExperimentArtifacts run_sample_based_pd(const ExperimentConfig& cfg) {
  ExperimentArtifacts artifacts;
  const ExactSolution exact = solve_exact_bisection(cfg.problem);

  std::vector<PrimalDualResult> results(cfg.trials);
  std::vector<std::uint64_t> seeds(cfg.trials);
  parallel_trials(cfg.trials, [&](int t) {
    SampleBasedConfig sb = cfg.search;
    sb.search.seed = derive_seed(cfg.base_seed, "trial", static_cast<std::uint64_t>(t));
    seeds[t] = sb.search.seed;
    results[t] = sample_based_pd(sb, cfg.problem, cfg.sampler, cfg.initial_policy);
  });

  for (int t = 0; t < cfg.trials; ++t) {
    char name[64];
    std::snprintf(name, sizeof(name), "sample_based_trial_%03d.csv", t);
    const auto path = cfg.output_dir / name;
    results[t].trace.write_csv(path, seeds[t]);
    artifacts.files.push_back(path);
  }

  // Per-iteration mean/variance bands of the relative optimality gap and the
  // relative constraint violation across trials.
  const auto summary_path = cfg.output_dir / "sample_based_summary.csv";
  CsvWriter csv(summary_path,
                {"k", "mean_rel_gap", "var_rel_gap", "mean_violation", "var_violation"});
  std::size_t max_rows = 0;
  for (const auto& r : results) max_rows = std::max(max_rows, r.trace.records.size());
  for (std::size_t i = 0; i < max_rows; ++i) {
    double sum_gap = 0.0, sum_gap2 = 0.0, sum_v = 0.0, sum_v2 = 0.0;
    int count = 0;
    for (const auto& r : results) {
      if (i >= r.trace.records.size()) continue;
      const auto& rec = r.trace.records[i];
      const double gap = std::abs(rec.J - exact.J) / std::abs(exact.J);
      const double violation = std::max(rec.Jc - cfg.problem.rho_bar, 0.0) / cfg.problem.rho_bar;
      sum_gap += gap;
      sum_gap2 += gap * gap;
      sum_v += violation;
      sum_v2 += violation * violation;
      ++count;
    }
    const double mean_gap = sum_gap / count;
    const double mean_v = sum_v / count;
    csv.write_row({static_cast<double>(i + 1), mean_gap,
                   std::max(0.0, sum_gap2 / count - mean_gap * mean_gap), mean_v,
                   std::max(0.0, sum_v2 / count - mean_v * mean_v)});
  }
  artifacts.files.push_back(summary_path);
  return artifacts;
}

ExperimentArtifacts run_risk_demo(const ExperimentConfig& cfg) {
  ExperimentArtifacts artifacts;
  const Policy lqr = critical_point(0.0, cfg.problem);
  const ExactSolution rc = solve_exact_bisection(cfg.problem);
  const double rho = derive_rho(cfg.problem.rho_bar, cfg.problem.noise, cfg.problem.Q);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(cfg.problem.state_dim());

  const auto summary_path = cfg.output_dir / "risk_summary.csv";
  CsvWriter summary(summary_path,
                    {"trial", "seed", "risk_lqr", "risk_rclqr", "rho", "Jc_lqr", "Jc_rclqr"});
  const double jc_lqr = eval_constraint(lqr, cfg.problem).value;
  const double jc_rc = eval_constraint(rc.X, cfg.problem).value;

  for (int t = 0; t < cfg.trials; ++t) {
    const std::uint64_t seed = derive_seed(cfg.base_seed, "risk-demo", t);
    // Shared seed: both controllers see the same noise realization.
    const Trajectory lqr_traj = rollout(lqr, cfg.demo_horizon, x0, cfg.problem, cfg.sampler, seed);
    const Trajectory rc_traj = rollout(rc.X, cfg.demo_horizon, x0, cfg.problem, cfg.sampler, seed);

    char lqr_name[64], rc_name[64];
    std::snprintf(lqr_name, sizeof(lqr_name), "trajectory_lqr_%03d.csv", t);
    std::snprintf(rc_name, sizeof(rc_name), "trajectory_rclqr_%03d.csv", t);
    lqr_traj.write_csv(cfg.output_dir / lqr_name);
    rc_traj.write_csv(cfg.output_dir / rc_name);
    artifacts.files.push_back(cfg.output_dir / lqr_name);
    artifacts.files.push_back(cfg.output_dir / rc_name);

    summary.write_row_raw(
        {std::to_string(t), std::to_string(seed),
         format_double(empirical_risk(lqr, cfg.risk_horizon, cfg.problem, cfg.sampler, seed)),
         format_double(empirical_risk(rc.X, cfg.risk_horizon, cfg.problem, cfg.sampler, seed)),
         format_double(rho), format_double(jc_lqr), format_double(jc_rc)});
  }
  artifacts.files.push_back(summary_path);
  return artifacts;
}

}  // namespace

const char* to_string(ExperimentMode mode) {
  switch (mode) {
    case ExperimentMode::InnerCompare:
      return "inner-compare";
    case ExperimentMode::ModelBasedPd:
      return "model-based-pd";
    case ExperimentMode::SampleBasedPd:
      return "sample-based-pd";
    case ExperimentMode::RiskDemo:
      return "risk-demo";
  }
  return "?";
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("mode")) {
    throw ConfigError("config: missing required field 'mode'");
  }
  ExperimentConfig cfg;
  cfg.mode = parse_mode(j["mode"].get<std::string>());

  if (!j.contains("problem")) throw ConfigError("config: missing required field 'problem'");
  if (j["problem"].is_string()) {
    const std::string name = j["problem"].get<std::string>();
    if (!is_known_preset(name)) throw ConfigError("config: unknown problem preset: " + name);
    cfg.problem_preset = name;
    cfg.problem = paper_problem();
  } else {
    cfg.problem = problem_from_json(j["problem"].dump());
  }

  if (j.contains("noise")) {
    cfg.sampler = parse_noise(j["noise"], cfg.problem);
  } else if (!cfg.problem_preset.empty()) {
    cfg.sampler = paper_noise_sampler();
  } else {
    cfg.sampler = NoiseSampler::gaussian(cfg.problem.noise.w_bar, cfg.problem.noise.W);
  }
  if (cfg.sampler.dim() != cfg.problem.state_dim()) {
    throw ConfigError("config: noise dimension does not match the state dimension");
  }

  if (j.contains("initial_policy")) {
    cfg.initial_policy.K = json_matrix(j["initial_policy"]["K"], "initial_policy.K");
    cfg.initial_policy.l = json_vector(j["initial_policy"]["l"], "initial_policy.l");
    if (cfg.initial_policy.K.rows() != cfg.problem.input_dim() ||
        cfg.initial_policy.K.cols() != cfg.problem.state_dim() ||
        cfg.initial_policy.l.size() != cfg.problem.input_dim()) {
      throw ConfigError("config: initial_policy dimensions do not match the problem");
    }
  } else if (!cfg.problem_preset.empty()) {
    cfg.initial_policy = paper_initial_policy();
  } else {
    cfg.initial_policy = critical_point(0.0, cfg.problem);
  }
  if (!is_stabilizing(cfg.problem.A, cfg.problem.B, cfg.initial_policy.K)) {
    throw ConfigError("config: initial_policy is not stabilizing");
  }

  cfg.mu = j.value("mu", 2.0);
  if (cfg.mu < 0.0) throw ConfigError("config: mu must be nonnegative");
  cfg.inner = j.contains("inner") ? parse_inner(j["inner"]) : InnerConfig::preset(InnerMethod::GN);

  const json dual = j.value("dual", json::object());
  cfg.dual.mu_init = dual.value("mu_init", 0.0);
  cfg.dual.step_constant = dual.value("step_constant", 1.0 / 15.0);
  cfg.dual.max_outer = dual.value("max_outer", 200);
  cfg.dual.mu_cap = dual.value("mu_cap", 1e3);
  cfg.dual.stop_tol = dual.value("stop_tol", 1e-4);
  cfg.dual.inner = cfg.inner;
  cfg.dual.validate();

  const json search = j.value("search", json::object());
  cfg.search.mu_init = cfg.dual.mu_init;
  cfg.search.step_constant = cfg.dual.step_constant;
  cfg.search.max_outer = cfg.dual.max_outer;
  cfg.search.mu_cap = cfg.dual.mu_cap;
  cfg.search.search.N = search.value("N", 1000);
  cfg.search.search.r = search.value("r", 0.2);
  cfg.search.search.eta = search.value("eta", 1e-5);
  cfg.search.search.T = search.value("T", 100);
  cfg.search.search.perturb_gain_only = search.value("perturb_gain_only", false);
  cfg.search.search.trace_stride = search.value("trace_stride", 1);
  const std::string guard = search.value("guard", std::string("model-check"));
  if (guard == "model-check") {
    cfg.search.search.guard = StabilityGuard::ModelCheck;
  } else if (guard == "overflow-reject") {
    cfg.search.search.guard = StabilityGuard::OverflowReject;
  } else {
    throw ConfigError("config: unknown stability guard: " + guard);
  }
  cfg.search.validate();

  cfg.risk_horizon = j.value("risk_horizon", 100000);
  cfg.demo_horizon = j.value("demo_horizon", 100);
  if (cfg.risk_horizon <= 0 || cfg.demo_horizon <= 0) {
    throw ConfigError("config: horizons must be positive");
  }
  cfg.output_dir = j.value("output_dir", std::string("out"));
  cfg.trials = j.value("trials", 1);
  if (cfg.trials < 1) throw ConfigError("config: trials must be at least 1");
  cfg.base_seed = j.value("base_seed", std::uint64_t{0});
  cfg.emit_plot_script = j.value("emit_plot_script", false);
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

namespace {

// gnuplot sources for the emitted CSVs; kept deliberately plain so any
// CSV-aware tool can reuse the column choices.
std::string plot_script_for(const ExperimentConfig& cfg) {
  std::string s = "set datafile separator ','\nset key autotitle columnhead\n";
  switch (cfg.mode) {
    case ExperimentMode::InnerCompare:
      s += "set logscale y\nset xlabel 'iteration'\nset ylabel 'relative Lagrangian error'\n"
           "plot 'inner_pg.csv' using 1:5 with lines, \\\n"
           "     'inner_npg.csv' using 1:5 with lines, \\\n"
           "     'inner_gn.csv' using 1:5 with lines\n";
      break;
    case ExperimentMode::ModelBasedPd:
      s += "set xlabel 'outer iteration k'\n"
           "plot 'model_based_trace.csv' using 1:3 with lines title 'J', \\\n"
           "     'model_based_trace.csv' using 1:4 with lines title 'Jc', \\\n"
           "     'model_based_trace.csv' using 1:2 with lines title 'mu'\n";
      break;
    case ExperimentMode::SampleBasedPd:
      s += "set xlabel 'outer iteration k'\n"
           "plot 'sample_based_summary.csv' using 1:2 with lines title 'mean rel gap', \\\n"
           "     'sample_based_summary.csv' using 1:4 with lines title 'mean violation'\n";
      break;
    case ExperimentMode::RiskDemo:
      s += "set xlabel 't'\nset ylabel 'x1'\n"
           "plot 'trajectory_lqr_000.csv' using 1:2 with lines title 'LQR', \\\n"
           "     'trajectory_rclqr_000.csv' using 1:2 with lines title 'RC-LQR'\n";
      break;
  }
  return s;
}

}  // namespace

ExperimentArtifacts run_experiment(const ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.output_dir);
  ExperimentArtifacts artifacts;
  switch (cfg.mode) {
    case ExperimentMode::InnerCompare:
      artifacts = run_inner_compare(cfg);
      break;
    case ExperimentMode::ModelBasedPd:
      artifacts = run_model_based_pd(cfg);
      break;
    case ExperimentMode::SampleBasedPd:
      artifacts = run_sample_based_pd(cfg);
      break;
    case ExperimentMode::RiskDemo:
      artifacts = run_risk_demo(cfg);
      break;
  }

  if (cfg.emit_plot_script) {
    const auto path = cfg.output_dir / "plot.gp";
    write_text(path, plot_script_for(cfg));
    artifacts.files.push_back(path);
  }

  json manifest = resolved_config_json(cfg);
  json seeds = json::array();
  for (int t = 0; t < cfg.trials; ++t) {
    seeds.push_back(derive_seed(cfg.base_seed,
                                cfg.mode == ExperimentMode::RiskDemo ? "risk-demo" : "trial",
                                static_cast<std::uint64_t>(t)));
  }
  manifest["trial_seeds"] = std::move(seeds);
  json outputs = json::array();
  for (const auto& f : artifacts.files) outputs.push_back(f.filename().string());
  manifest["outputs"] = std::move(outputs);

  artifacts.manifest = cfg.output_dir / "manifest.json";
  write_text(artifacts.manifest, manifest.dump(2) + "\n");
  return artifacts;
}

ExperimentArtifacts run_experiment(const std::filesystem::path& config_path) {
  return run_experiment(ExperimentConfig::from_file(config_path));
}

}  // namespace rclqr
