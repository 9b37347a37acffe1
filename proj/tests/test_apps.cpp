#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "ihgp/commands.hpp"
#include "ihgp/datagen.hpp"
#include "ihgp/errors.hpp"
#include "ihgp/io.hpp"

using namespace ihgp;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    dir_ = fs::temp_directory_path() /
           ("ihgp_test_" + std::to_string(counter_++));
    fs::create_directories(dir_);
  }
  ~TempDir() { fs::remove_all(dir_); }
  std::string path(const std::string& name) const {
    return (dir_ / name).string();
  }
  std::string dir() const { return dir_.string(); }

 private:
  fs::path dir_;
  static inline int counter_ = 0;
};

RunConfig base_config() {
  return RunConfig::from_json(nlohmann::json::parse(R"({
    "kernel": {"matern": {"nu": 1.5, "sigma2": 1.0, "ell": 1.0}},
    "likelihood": {"name": "gaussian", "sigma2": 0.1},
    "seed": 7
  })"));
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  nlohmann::json doc;
  in >> doc;
  return doc;
}

}  // namespace

TEST(GenSinc, DeterministicWithSeed) {
  const TimeSeries a = gen_sinc(100, 3, {});
  const TimeSeries b = gen_sinc(100, 3, {});
  EXPECT_EQ(a.y, b.y);
  const TimeSeries c = gen_sinc(100, 4, {});
  EXPECT_NE(a.y, c.y);
}

TEST(GenSinc, NoiseVarianceInBand) {
  const TimeSeries data = gen_sinc(1000, 11, {});
  Vector residual(1000);
  for (int i = 0; i < 1000; ++i) {
    residual(i) = data.y(i) - sinc(data.t(i) - 6.0);
  }
  const double mean = residual.mean();
  const double var =
      (residual.array() - mean).square().sum() / (residual.size() - 1);
  EXPECT_GE(var, 0.08);
  EXPECT_LE(var, 0.12);
}

TEST(GenSinc, ClassificationLabels) {
  SincOptions opts;
  opts.mode = SincMode::Classification;
  const TimeSeries data = gen_sinc(500, 1, opts);
  for (int i = 0; i < 500; ++i) {
    EXPECT_TRUE(data.y(i) == 1.0 || data.y(i) == -1.0);
  }
}

TEST(GenSinc, PeakValue) {
  EXPECT_EQ(sinc(0.0), 1.0);
  EXPECT_NEAR(sinc(1.0), 0.0, 1e-16);
  EXPECT_NEAR(sinc(0.5), 2.0 / M_PI, 1e-15);
}

TEST(Io, SeriesRoundTripWithMissing) {
  TempDir tmp;
  Vector t(4), y(4);
  t << 0.0, 0.1, 0.2, 0.3;
  y << 1.5, std::nan(""), -0.25, 0.75;
  write_csv(tmp.path("data.csv"), {"t", "y"}, {t, y});
  const TimeSeries read = read_series(tmp.path("data.csv"));
  EXPECT_EQ(read.t, t);
  EXPECT_TRUE(std::isnan(read.y(1)));
  EXPECT_EQ(read.y(3), 0.75);
}

TEST(Io, EquidistanceValidation) {
  Vector good(4), bad(4);
  good << 0.0, 0.5, 1.0, 1.5;
  bad << 0.0, 0.5, 1.2, 1.5;
  EXPECT_NEAR(check_equidistant(good), 0.5, 1e-12);
  try {
    check_equidistant(bad);
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("row"), std::string::npos);
  }
}

TEST(Io, HeaderOnlyFileFails) {
  TempDir tmp;
  write_text_file(tmp.path("empty.csv"), "t,y\n");
  EXPECT_THROW(read_series(tmp.path("empty.csv")), InputError);
}

TEST(Io, FormatDoubleRoundTrips) {
  for (double v : {0.1, -3.25e-7, 12345.6789, 1.0 / 3.0}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(std::nan("")), "");
}

TEST(CmdGen, WritesDataCsv) {
  TempDir tmp;
  RunConfig cfg = base_config();
  cfg.gen_n = 50;
  cmd_gen(cfg, tmp.dir());
  const TimeSeries data = read_series(tmp.path("data.csv"));
  EXPECT_EQ(data.y.size(), 50);
}

TEST(CmdInfer, ProducesResultsAndMetrics) {
  TempDir tmp;
  RunConfig cfg = base_config();
  cfg.gen_n = 200;
  cmd_gen(cfg, tmp.dir());

  for (const std::string method : {"exact", "ihgp"}) {
    RunConfig run = cfg;
    run.method = method;
    cmd_infer(run, tmp.path("data.csv"), tmp.path(method));
    const auto metrics = read_json(tmp.path(method) + "/metrics.json");
    EXPECT_TRUE(std::isfinite(metrics.at("nll").get<double>()));
    EXPECT_EQ(metrics.at("n").get<int>(), 200);
    EXPECT_EQ(metrics.at("m").get<int>(), 2);
    EXPECT_EQ(metrics.at("method").get<std::string>(), method);

    const TimeSeries results = read_series(tmp.path(method) + "/results.csv");
    EXPECT_EQ(results.y.size(), 200);
  }
}

TEST(CmdInfer, RejectsNonEquidistant) {
  TempDir tmp;
  write_text_file(tmp.path("bad.csv"), "t,y\n0,1\n0.5,1\n1.2,1\n");
  EXPECT_THROW(cmd_infer(base_config(), tmp.path("bad.csv"), tmp.dir()),
               InputError);
}

TEST(CmdFit, RecoversSimulatedLengthScale) {
  TempDir tmp;
  const double true_ell = 1.5;
  const DiscreteModel gen = discretize(
      build_sde(KernelSpec::matern(1.5, 1.0, true_ell)), 0.01);
  const Simulation sim = simulate_gaussian(gen, 5000, 31, 0.1);
  write_csv(tmp.path("data.csv"), {"t", "y"}, {sim.t, sim.y});

  RunConfig cfg = base_config();
  cmd_fit(cfg, tmp.path("data.csv"), tmp.dir());
  const auto theta = read_json(tmp.path("theta.json"));
  const double ell = theta.at("theta").at("matern32.ell").get<double>();
  EXPECT_NEAR(ell, true_ell, 0.25 * true_ell);
  EXPECT_TRUE(std::isfinite(theta.at("nll").get<double>()));
  EXPECT_GE(theta.at("iterations").get<int>(), 1);
}

TEST(CmdOnline, DeterministicReplayAndSchema) {
  TempDir tmp;
  RunConfig cfg = base_config();
  cfg.gen_n = 600;
  cmd_gen(cfg, tmp.dir());
  cfg.window = 200;
  cfg.window_step = 200;
  cfg.learning_rates = {1e-3};

  cmd_online(cfg, tmp.path("data.csv"), tmp.path("run1"));
  cmd_online(cfg, tmp.path("data.csv"), tmp.path("run2"));
  // Strip the wall-clock column; everything else must replay bit-identically.
  const auto strip_timing = [](const std::string& text) {
    std::string out;
    size_t pos = 0;
    while (pos < text.size()) {
      const size_t eol = text.find('\n', pos);
      const std::string line = text.substr(pos, eol - pos);
      out += line.substr(0, line.rfind(',')) + "\n";
      pos = eol + 1;
    }
    return out;
  };
  const std::string a =
      strip_timing(read_text_file(tmp.path("run1") + "/theta_trajectory.csv"));
  const std::string b =
      strip_timing(read_text_file(tmp.path("run2") + "/theta_trajectory.csv"));
  EXPECT_EQ(a, b);
  EXPECT_NE(a.find("step,window_start"), std::string::npos);
  // Three windows of 200 over 600 samples.
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 4);
}

TEST(CmdBench, SmokeRunOnTinyGrid) {
  TempDir tmp;
  RunConfig cfg = base_config();
  cfg.bench_m = {2, 4};
  cfg.bench_n = 500;
  cfg.bench_reps = 1;
  const BenchSummary summary = cmd_bench(cfg, tmp.dir());
  ASSERT_EQ(summary.rows.size(), 4u);
  for (const auto& row : summary.rows) {
    EXPECT_GE(row.runtime_ms, 0.0);
    if (row.bench_method == "ihgp") EXPECT_LT(row.rmse_vs_exact, 0.05);
  }
  EXPECT_TRUE(fs::exists(tmp.path("bench.csv")));
}

TEST(CmdLgcp, EndToEndOnSyntheticEvents) {
  TempDir tmp;
  const auto events = simulate_poisson_events(
      0.0, 100.0, [](double) { return std::log(3.0); }, 4.0, 17);
  std::ofstream out(tmp.path("events.csv"));
  out << "timestamp\n";
  for (double t : events) out << format_double(t) << "\n";
  out.close();

  RunConfig cfg = RunConfig::from_json(nlohmann::json::parse(R"({
    "kernel": {"matern": {"nu": 2.5, "sigma2": 1.0, "ell": 15.0}},
    "likelihood": {"name": "poisson"},
    "lgcp": {"t0": 0.0, "t1": 100.0, "bin_width": 1.0}
  })"));
  cfg.method = "exact";
  cmd_lgcp(cfg, tmp.path("events.csv"), tmp.dir());

  const auto metrics = read_json(tmp.path("metrics.json"));
  EXPECT_EQ(metrics.at("n_bins").get<int>(), 100);
  EXPECT_EQ(metrics.at("events").get<double>(),
            static_cast<double>(events.size()));
}

TEST(RunConfig, RejectsMissingKernel) {
  EXPECT_THROW(RunConfig::from_json(nlohmann::json::parse("{}")), ConfigError);
}
