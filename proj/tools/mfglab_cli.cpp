#include <CLI11.hpp>
#include <iostream>

#include "mfglab/checks.hpp"
#include "mfglab/experiment.hpp"

namespace {

enum ExitCode { kOk = 0, kCheckFailure = 1, kConfigError = 2, kSolverError = 3 };

int run(const std::string& command, const std::string& config_path,
        const std::string& mode, const std::string& out_override) {
  using namespace mfglab;
  const ExperimentConfig cfg = load_config(config_path);
  const std::string out = out_override.empty() ? cfg.output_dir : out_override;
  if (command == "forward") {
    std::cout << run_forward(cfg, out) << "\n";
  } else if (command == "linearize") {
    std::cout << run_linearize(cfg, out) << "\n";
  } else if (command == "measure") {
    std::cout << run_measure(cfg, out) << "\n";
  } else if (command == "verify") {
    bool all_pass = true;
    for (const CheckResult& c : verify_checks()) {
      std::cout << (c.pass ? "PASS" : "FAIL") << " " << c.name << ": " << c.detail
                << "\n";
      all_pass = all_pass && c.pass;
    }
    return all_pass ? kOk : kCheckFailure;
  } else if (command == "reconstruct") {
    std::cout << run_reconstruct(cfg, mode, out) << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mean-field-game forward and inverse experiment runner"};
  app.require_subcommand(1);
  std::string config_path, out_override;
  std::string mode = "oracle";
  for (const char* name : {"forward", "linearize", "measure", "verify", "reconstruct"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "experiment config file")->required();
    sub->add_option("--out", out_override, "output directory override");
    if (std::string(name) == "reconstruct") {
      sub->add_option("--mode", mode, "oracle | measurement");
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  try {
    return run(app.get_subcommands().front()->get_name(), config_path, mode,
               out_override);
  } catch (const mfglab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const mfglab::PreconditionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const mfglab::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kSolverError;
  } catch (const std::exception& e) {
    std::cerr << "check failure: " << e.what() << "\n";
    return kCheckFailure;
  }
}
