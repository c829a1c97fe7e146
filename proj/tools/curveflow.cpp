// curveflow <command> --config <file> [--out <dir>] [--svg]
//
// Commands mirror the config's [section]: flow, rescaled, profile, wave,
// curve, classify. Exit codes: 0 ok, 2 config error, 3 numerical failure.

#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "curveflow/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"curveflow - slow-speed curvature contraction flow laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  bool svg = false;

  for (const char* name : {"flow", "rescaled", "profile", "wave", "curve", "classify"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "experiment config file")->required();
    sub->add_option("--out", out_dir, "output directory (default: out)");
    sub->add_flag("--svg", svg, "emit SVG renderings where applicable");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  curveflow::ExperimentConfig config;
  try {
    config = curveflow::load_config(config_path);
  } catch (const std::exception& err) {
    curveflow::JsonValue msg = curveflow::JsonValue::object();
    msg.set("error", curveflow::JsonValue::str(err.what()));
    msg.set("kind", curveflow::JsonValue::str("config"));
    std::cout << msg.dump();
    return 2;
  }
  if (config.command != command) {
    curveflow::JsonValue msg = curveflow::JsonValue::object();
    msg.set("error", curveflow::JsonValue::str("config section [" + config.command +
                                               "] does not match subcommand " + command));
    msg.set("kind", curveflow::JsonValue::str("config"));
    std::cout << msg.dump();
    return 2;
  }

  const curveflow::RunOutcome outcome = curveflow::run_experiment(config, out_dir, svg);
  if (outcome.exit_code != 0) {
    std::cout << outcome.error;
    return outcome.exit_code;
  }
  std::cout << "wrote " << out_dir << "\n";
  return 0;
}
