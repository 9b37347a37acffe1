#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "ihgp/commands.hpp"
#include "ihgp/errors.hpp"

namespace {

const char* error_kind(const std::exception& e) {
  if (dynamic_cast<const ihgp::ParameterError*>(&e)) return "parameter";
  if (dynamic_cast<const ihgp::StabilityError*>(&e)) return "stability";
  if (dynamic_cast<const ihgp::ConvergenceError*>(&e)) return "convergence";
  if (dynamic_cast<const ihgp::ConditioningError*>(&e)) return "conditioning";
  if (dynamic_cast<const ihgp::NumericalError*>(&e)) return "numerical";
  if (dynamic_cast<const ihgp::InputError*>(&e)) return "input";
  if (dynamic_cast<const ihgp::ConfigError*>(&e)) return "config";
  return "error";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"State-space Gaussian process inference (exact and infinite-horizon)"};
  app.require_subcommand(1);

  std::string config_path, data_path, out_dir = ".", method;

  auto add_common = [&](CLI::App* cmd, bool needs_data) {
    cmd->add_option("--config", config_path, "JSON run configuration")
        ->required();
    if (needs_data) {
      cmd->add_option("--data", data_path, "input CSV")->required();
    }
    cmd->add_option("--out", out_dir, "output directory (default: .)");
    cmd->add_option("--method", method, "override method: exact | ihgp");
  };

  add_common(app.add_subcommand("infer", "posterior marginals over a series"),
             true);
  add_common(app.add_subcommand("fit", "batch hyperparameter optimization"),
             true);
  add_common(app.add_subcommand("online", "rolling-window adaptation"), true);
  add_common(app.add_subcommand("lgcp", "event-intensity estimation"), true);
  add_common(app.add_subcommand("bench", "runtime scaling study"), false);
  add_common(app.add_subcommand("gen", "synthetic benchmark data"), false);

  CLI11_PARSE(app, argc, argv);

  try {
    ihgp::RunConfig cfg = ihgp::RunConfig::from_file(config_path);
    if (!method.empty()) cfg.method = method;
    const std::string sub = app.get_subcommands().front()->get_name();
    if (sub == "infer") {
      ihgp::cmd_infer(cfg, data_path, out_dir);
    } else if (sub == "fit") {
      ihgp::cmd_fit(cfg, data_path, out_dir);
    } else if (sub == "online") {
      ihgp::cmd_online(cfg, data_path, out_dir);
    } else if (sub == "lgcp") {
      ihgp::cmd_lgcp(cfg, data_path, out_dir);
    } else if (sub == "bench") {
      ihgp::cmd_bench(cfg, out_dir);
    } else if (sub == "gen") {
      ihgp::cmd_gen(cfg, out_dir);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << error_kind(e) << ": " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
