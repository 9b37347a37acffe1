#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "ihgp/gradients.hpp"
#include "ihgp/lgcp.hpp"
#include "ihgp/likelihoods.hpp"

namespace ihgp {

/// Parsed run configuration shared by the CLI subcommands.
struct RunConfig {
  KernelSpec kernel;
  Likelihood likelihood = Likelihood::gaussian(0.1);
  GridOptions grid;
  std::string method = "ihgp";  // or "exact"
  std::uint64_t seed = 0;

  // fit
  int fit_max_iters = 200;
  double fit_tol = 1e-4;
  std::string fit_objective = "steady";  // "steady" | "exact"
  bool optimize_noise = true;

  // online
  int window = 1000;
  int window_step = 0;  // 0: = window
  std::vector<double> learning_rates = {1e-3};
  bool emit_predictions = false;

  // lgcp
  double lgcp_t0 = 0.0;
  double lgcp_t1 = 0.0;
  double lgcp_bin_width = 0.0;

  // bench
  std::vector<int> bench_m = {2, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  int bench_n = 10000;
  int bench_reps = 3;
  double bench_noise_var = 0.1;

  // gen
  std::string gen_mode = "regression";
  int gen_n = 1000;
  double gen_noise_var = 0.1;
  double gen_poisson_base = 12.0;
  double gen_poisson_amplitude = 1.0;

  static RunConfig from_json(const nlohmann::json& doc);
  static RunConfig from_file(const std::string& path);
};

/// Regression/ADF inference over a `t,y` CSV -> results.csv + metrics.json.
void cmd_infer(const RunConfig& cfg, const std::string& data_path,
               const std::string& out_dir);

/// Batch hyperparameter optimization -> theta.json.
void cmd_fit(const RunConfig& cfg, const std::string& data_path,
             const std::string& out_dir);

/// Rolling-window online adaptation -> theta_trajectory.csv (+ rolling
/// predictions when enabled), flushed per step.
void cmd_online(const RunConfig& cfg, const std::string& data_path,
                const std::string& out_dir);

/// Log-Gaussian Cox process pipeline over a timestamp CSV -> intensity.csv.
void cmd_lgcp(const RunConfig& cfg, const std::string& data_path,
              const std::string& out_dir);

struct BenchRow {
  int m = 0;
  std::string bench_method;
  double runtime_ms = 0.0;
  double rmse_vs_exact = 0.0;
};

struct BenchSummary {
  std::vector<BenchRow> rows;
  double ihgp_slope = 0.0;
  double exact_slope = 0.0;
};

/// Runtime scaling study over summed Matern(3/2) priors -> bench.csv.
BenchSummary cmd_bench(const RunConfig& cfg, const std::string& out_dir);

/// Synthetic benchmark data -> data.csv.
void cmd_gen(const RunConfig& cfg, const std::string& out_dir);

}  // namespace ihgp
