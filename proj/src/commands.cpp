#include "ihgp/commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "ihgp/datagen.hpp"
#include "ihgp/errors.hpp"
#include "ihgp/infinite_horizon.hpp"
#include "ihgp/kalman.hpp"
#include "ihgp/optim.hpp"

namespace ihgp {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start)
      .count();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory '" + dir + "'");
}

void write_json(const std::string& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << doc.dump(2) << "\n";
}

PosteriorMarginals infer_marginals(const RunConfig& cfg,
                                   const DiscreteModel& model,
                                   const Vector& y) {
  if (cfg.method == "exact") {
    return exact_marginals(model, y, cfg.likelihood);
  }
  if (cfg.method != "ihgp") {
    throw ConfigError("unknown method '" + cfg.method + "'");
  }
  GammaGrid grid(model, cfg.grid);
  if (cfg.likelihood.is_gaussian()) {
    grid.insert_exact(cfg.likelihood.noise_sigma2);
  }
  return ihgp_infer(model, grid, y, cfg.likelihood).marginals;
}

/// Derivative-free fit of the selected objective (exact-model or ADF NLL).
HyperParams fit_derivative_free(const RunConfig& cfg, HyperParams hp,
                                const Vector& y, double dt, int max_iters) {
  auto objective = [&](const Vector& theta) -> double {
    try {
      const HyperParams cand = hp.with_log_values(theta);
      const DiscreteModel model = discretize(build_sde(cand.kernel), dt);
      Likelihood lik = cfg.likelihood;
      if (lik.is_gaussian()) lik.noise_sigma2 = cand.noise_sigma2;
      if (cfg.method == "ihgp") {
        GammaGrid grid(model, cfg.grid);
        if (lik.is_gaussian()) grid.insert_exact(lik.noise_sigma2);
        return -ihgp_infer(model, grid, y, lik).marginals.log_lik;
      }
      return -adf_filter(model, y, lik).log_lik;
    } catch (const std::runtime_error&) {
      return std::numeric_limits<double>::max();
    }
  };
  NelderMeadOptions opts;
  opts.max_iters = max_iters;
  const NelderMeadResult res = nelder_mead(objective, hp.log_values(), opts);
  return hp.with_log_values(res.x);
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& doc) {
  RunConfig cfg;
  if (!doc.contains("kernel")) throw ConfigError("config is missing 'kernel'");
  cfg.kernel = KernelSpec::from_json(doc.at("kernel"));
  if (doc.contains("likelihood")) {
    cfg.likelihood = Likelihood::from_json(doc.at("likelihood"));
  }
  if (doc.contains("grid")) {
    const auto& g = doc.at("grid");
    cfg.grid.nodes = g.value("nodes", 32);
    cfg.grid.gamma_min = g.value("gamma_min", 1e-2);
    cfg.grid.gamma_max = g.value("gamma_max", 1e3);
  }
  cfg.method = doc.value("method", "ihgp");
  cfg.seed = doc.value("seed", 0);

  if (doc.contains("fit")) {
    const auto& f = doc.at("fit");
    cfg.fit_max_iters = f.value("max_iters", 200);
    cfg.fit_tol = f.value("tol", 1e-4);
    cfg.fit_objective = f.value("objective", "steady");
    cfg.optimize_noise = f.value("optimize_noise", true);
  }
  if (doc.contains("online")) {
    const auto& o = doc.at("online");
    cfg.window = o.value("window", 1000);
    cfg.window_step = o.value("step", 0);
    cfg.emit_predictions = o.value("emit_predictions", false);
    if (o.contains("learning_rates")) {
      const auto& lr = o.at("learning_rates");
      cfg.learning_rates.clear();
      if (lr.is_number()) {
        cfg.learning_rates.push_back(lr.get<double>());
      } else {
        for (const auto& v : lr) cfg.learning_rates.push_back(v.get<double>());
      }
    }
  }
  if (doc.contains("lgcp")) {
    const auto& l = doc.at("lgcp");
    cfg.lgcp_t0 = l.value("t0", 0.0);
    cfg.lgcp_t1 = l.value("t1", 0.0);
    cfg.lgcp_bin_width = l.value("bin_width", 0.0);
  }
  if (doc.contains("bench")) {
    const auto& b = doc.at("bench");
    if (b.contains("m_list")) {
      cfg.bench_m.clear();
      for (const auto& v : b.at("m_list")) cfg.bench_m.push_back(v.get<int>());
    }
    cfg.bench_n = b.value("n", 10000);
    cfg.bench_reps = b.value("reps", 3);
    cfg.bench_noise_var = b.value("noise_sigma2", 0.1);
  }
  if (doc.contains("gen")) {
    const auto& g = doc.at("gen");
    cfg.gen_mode = g.value("mode", "regression");
    cfg.gen_n = g.value("n", 1000);
    cfg.gen_noise_var = g.value("noise_var", 0.1);
    cfg.gen_poisson_base = g.value("poisson_base_rate", 12.0);
    cfg.gen_poisson_amplitude = g.value("poisson_amplitude", 1.0);
  }
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }
  return from_json(doc);
}

void cmd_infer(const RunConfig& cfg, const std::string& data_path,
               const std::string& out_dir) {
  const auto start = Clock::now();
  const TimeSeries series = read_series(data_path);
  const double dt = check_equidistant(series.t);
  const DiscreteModel model = discretize(build_sde(cfg.kernel), dt);

  const PosteriorMarginals marginals = infer_marginals(cfg, model, series.y);

  ensure_dir(out_dir);
  const int n = static_cast<int>(series.y.size());
  Vector lower(n), upper(n);
  for (int i = 0; i < n; ++i) {
    const double sd = std::sqrt(std::max(0.0, marginals.var(i)));
    lower(i) = marginals.mean(i) - 1.96 * sd;
    upper(i) = marginals.mean(i) + 1.96 * sd;
  }
  write_csv(out_dir + "/results.csv",
            {"t", "y", "mean", "var", "lower95", "upper95"},
            {series.t, series.y, marginals.mean, marginals.var, lower, upper});
  write_json(out_dir + "/metrics.json",
             {{"nll", -marginals.log_lik},
              {"runtime_ms", elapsed_ms(start)},
              {"method", cfg.method},
              {"m", model.dim()},
              {"n", n}});
}

void cmd_fit(const RunConfig& cfg, const std::string& data_path,
             const std::string& out_dir) {
  const TimeSeries series = read_series(data_path);
  const double dt = check_equidistant(series.t);

  HyperParams hp = HyperParams::make(
      cfg.kernel, cfg.likelihood.noise_sigma2,
      cfg.optimize_noise && cfg.likelihood.is_gaussian());

  nlohmann::json result;
  if (cfg.likelihood.is_gaussian() && cfg.fit_objective == "steady") {
    FitOptions opts;
    opts.max_iters = cfg.fit_max_iters;
    opts.grad_tol = cfg.fit_tol;
    const FitResult fit = fit_batch(hp, series.y, dt, opts);
    hp = fit.theta;
    result["nll"] = fit.nll;
    result["iterations"] = fit.iterations;
    result["grad_inf_norm"] = fit.grad_inf_norm;
    result["trace"] = fit.trace;
    result["objective"] = "steady";
  } else {
    hp = fit_derivative_free(cfg, hp, series.y, dt, cfg.fit_max_iters);
    const DiscreteModel model = discretize(build_sde(hp.kernel), dt);
    Likelihood lik = cfg.likelihood;
    if (lik.is_gaussian()) lik.noise_sigma2 = hp.noise_sigma2;
    result["nll"] = -adf_filter(model, series.y, lik).log_lik;
    result["objective"] =
        cfg.likelihood.is_gaussian() ? cfg.fit_objective : "adf";
  }

  nlohmann::json theta;
  const Vector logv = hp.log_values();
  const auto names = hp.names();
  for (int j = 0; j < hp.size(); ++j) {
    theta[names[j]] = std::exp(logv(j));
  }
  result["theta"] = theta;
  result["kernel"] = hp.kernel.to_json();
  if (hp.optimize_noise) result["noise_sigma2"] = hp.noise_sigma2;

  ensure_dir(out_dir);
  write_json(out_dir + "/theta.json", result);
}

void cmd_online(const RunConfig& cfg, const std::string& data_path,
                const std::string& out_dir) {
  const TimeSeries series = read_series(data_path);
  const double dt = check_equidistant(series.t);
  const int n = static_cast<int>(series.y.size());
  const int window = cfg.window;
  const int step = cfg.window_step > 0 ? cfg.window_step : window;
  if (window < 2 || window > n) {
    throw ConfigError("online window must fit the stream");
  }
  if (!cfg.likelihood.is_gaussian()) {
    throw ConfigError("online adaptation supports the Gaussian likelihood");
  }

  HyperParams hp = HyperParams::make(cfg.kernel, cfg.likelihood.noise_sigma2,
                                     cfg.optimize_noise);
  Vector etas;
  if (cfg.learning_rates.size() == 1) {
    etas = Vector::Constant(hp.size(), cfg.learning_rates[0]);
  } else {
    if (static_cast<int>(cfg.learning_rates.size()) != hp.size()) {
      throw ConfigError("learning_rates length must be 1 or match theta");
    }
    etas = Eigen::Map<const Vector>(cfg.learning_rates.data(),
                                    cfg.learning_rates.size());
  }

  ensure_dir(out_dir);
  std::ofstream traj(out_dir + "/theta_trajectory.csv");
  if (!traj) throw InputError("cannot write theta_trajectory.csv");
  traj << "step,window_start";
  for (const auto& name : hp.names()) traj << "," << name;
  traj << ",window_nll,accepted,wall_ms\n";
  traj.flush();

  std::ofstream preds;
  if (cfg.emit_predictions) {
    preds.open(out_dir + "/rolling_predictions.csv");
    preds << "step,t,y,mean,var\n";
  }

  int step_idx = 0;
  for (int start = 0; start + window <= n; start += step, ++step_idx) {
    const auto tic = Clock::now();
    const Vector chunk = series.y.segment(start, window);
    const OnlineStepResult res = online_step(hp, chunk, dt, etas);
    const double wall = elapsed_ms(tic);
    if (res.accepted) hp = res.theta;

    const Vector logv = hp.log_values();
    traj << step_idx << "," << format_double(series.t(start));
    for (int j = 0; j < hp.size(); ++j) {
      traj << "," << format_double(std::exp(logv(j)));
    }
    traj << "," << format_double(res.window_nll) << ","
         << (res.accepted ? 1 : 0) << "," << format_double(wall) << "\n";
    traj.flush();

    if (cfg.emit_predictions) {
      const PosteriorMarginals post = steady_gaussian_marginals(
          discretize(build_sde(hp.kernel), dt), chunk, hp.noise_sigma2);
      for (int i = 0; i < window; ++i) {
        preds << step_idx << "," << format_double(series.t(start + i)) << ","
              << format_double(chunk(i)) << "," << format_double(post.mean(i))
              << "," << format_double(post.var(i)) << "\n";
      }
      preds.flush();
    }
  }
  if (step_idx == 0) throw ConfigError("stream shorter than one window");
}

void cmd_lgcp(const RunConfig& cfg, const std::string& data_path,
              const std::string& out_dir) {
  const std::vector<double> stamps = read_timestamps(data_path);
  double t0 = cfg.lgcp_t0, t1 = cfg.lgcp_t1;
  if (!(t1 > t0)) {
    t0 = stamps.front();
    t1 = std::nextafter(stamps.back(), std::numeric_limits<double>::max());
  }
  double width = cfg.lgcp_bin_width;
  if (!(width > 0.0)) width = (t1 - t0) / 200.0;

  const BinnedCounts counts = bin_events(stamps, t0, t1, width);
  const IntensityPosterior post = fit_intensity(
      counts, cfg.kernel, cfg.method == "ihgp", cfg.grid,
      cfg.likelihood.quadrature_order);

  ensure_dir(out_dir);
  write_csv(out_dir + "/intensity.csv",
            {"t", "count", "median", "lower95", "upper95"},
            {post.centers, post.counts, post.median, post.lower95,
             post.upper95});
  write_json(out_dir + "/metrics.json",
             {{"nll", -post.log_lik},
              {"method", cfg.method},
              {"n_bins", counts.size()},
              {"bin_width", width},
              {"events", counts.counts.sum()},
              {"dropped", counts.dropped},
              {"intensity_unit", "events per bin; per-time-unit rate = median / bin_width"}});
}

BenchSummary cmd_bench(const RunConfig& cfg, const std::string& out_dir) {
  if (cfg.bench_reps < 1) throw ConfigError("bench reps must be >= 1");
  BenchSummary summary;

  std::vector<double> log_m_i, log_t_i, log_m_e, log_t_e;
  for (int m : cfg.bench_m) {
    if (m < 2 || m % 2 != 0) {
      throw ConfigError("bench m values must be even and >= 2");
    }
    const int parts = m / 2;
    // Increasing-length sum of Matern(3/2) components.
    std::vector<KernelSpec> kernels;
    for (int j = 1; j <= parts; ++j) {
      kernels.push_back(
          KernelSpec::matern(1.5, 1.0 / parts, 2.0 * j));
    }
    const KernelSpec spec = parts == 1
                                ? kernels[0]
                                : KernelSpec::sum(std::move(kernels));
    const DiscreteModel model = discretize(build_sde(spec), 1.0);
    const Simulation sim =
        simulate_gaussian(model, cfg.bench_n, cfg.seed + m, cfg.bench_noise_var);

    auto median_of = [](std::vector<double> v) {
      std::sort(v.begin(), v.end());
      return v[v.size() / 2];
    };

    PosteriorMarginals exact;
    std::vector<double> times_exact, times_ihgp;
    for (int rep = 0; rep < cfg.bench_reps; ++rep) {
      const auto tic = Clock::now();
      exact = exact_marginals(model, sim.y,
                              Likelihood::gaussian(cfg.bench_noise_var));
      times_exact.push_back(elapsed_ms(tic));
    }
    PosteriorMarginals fast;
    for (int rep = 0; rep < cfg.bench_reps; ++rep) {
      const auto tic = Clock::now();
      fast = steady_gaussian_marginals(model, sim.y, cfg.bench_noise_var);
      times_ihgp.push_back(elapsed_ms(tic));
    }

    const double rmse = std::sqrt((fast.mean - exact.mean).squaredNorm() /
                                  exact.mean.size());
    const double t_exact = median_of(times_exact);
    const double t_ihgp = median_of(times_ihgp);
    summary.rows.push_back({m, "exact", t_exact, 0.0});
    summary.rows.push_back({m, "ihgp", t_ihgp, rmse});
    if (m >= 20) {
      log_m_e.push_back(std::log(m));
      log_t_e.push_back(std::log(t_exact));
      log_m_i.push_back(std::log(m));
      log_t_i.push_back(std::log(t_ihgp));
    }
  }

  auto slope = [](const std::vector<double>& xs, const std::vector<double>& ys) {
    const int n = static_cast<int>(xs.size());
    if (n < 2) return 0.0;
    double mx = 0, my = 0;
    for (int i = 0; i < n; ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= n;
    my /= n;
    double num = 0, den = 0;
    for (int i = 0; i < n; ++i) {
      num += (xs[i] - mx) * (ys[i] - my);
      den += (xs[i] - mx) * (xs[i] - mx);
    }
    return num / den;
  };
  summary.exact_slope = slope(log_m_e, log_t_e);
  summary.ihgp_slope = slope(log_m_i, log_t_i);

  if (!out_dir.empty()) {
    ensure_dir(out_dir);
    std::ofstream out(out_dir + "/bench.csv");
    out << "m,method,runtime_ms,rmse_vs_exact\n";
    for (const auto& row : summary.rows) {
      out << row.m << "," << row.bench_method << ","
          << format_double(row.runtime_ms) << ","
          << format_double(row.rmse_vs_exact) << "\n";
    }
    write_json(out_dir + "/metrics.json",
               {{"ihgp_slope", summary.ihgp_slope},
                {"exact_slope", summary.exact_slope},
                {"n", cfg.bench_n},
                {"reps", cfg.bench_reps}});
  }
  return summary;
}

void cmd_gen(const RunConfig& cfg, const std::string& out_dir) {
  SincOptions opts;
  if (cfg.gen_mode == "regression") {
    opts.mode = SincMode::Regression;
  } else if (cfg.gen_mode == "classification") {
    opts.mode = SincMode::Classification;
  } else if (cfg.gen_mode == "poisson") {
    opts.mode = SincMode::Poisson;
  } else {
    throw ConfigError("unknown gen mode '" + cfg.gen_mode + "'");
  }
  opts.noise_var = cfg.gen_noise_var;
  opts.poisson_base_rate = cfg.gen_poisson_base;
  opts.poisson_amplitude = cfg.gen_poisson_amplitude;

  const TimeSeries data = gen_sinc(cfg.gen_n, cfg.seed, opts);
  ensure_dir(out_dir);
  write_csv(out_dir + "/data.csv", {"t", "y"}, {data.t, data.y});
}

}  // namespace ihgp
