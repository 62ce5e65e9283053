// qftsim: command-line runner for frequency-translation scenarios.
//
//   qftsim <phasematch|translate|acceptance|g2|efficiency|sweep>
//          (--config FILE | --scenario NAME) [--seed N] [--out DIR]
//   qftsim translate ... --sweep kappaL START:STOP:STEPS
//
// Exit status: 0 success, 2 configuration error, 3 numerical failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "qft/config.hpp"
#include "qft/scenario.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericError = 3;

struct Options {
  std::string config_path;
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> kappa_sweep;
};

int run(qft::scenario::Command command, const Options& opt) {
  using namespace qft;
  config::ScenarioConfig cfg;
  if (!opt.config_path.empty() == !opt.scenario.empty()) {
    throw config::ConfigError("", "give exactly one of --config and --scenario");
  }
  if (!opt.scenario.empty()) {
    auto builtin = config::builtin_scenario(opt.scenario);
    if (!builtin) throw config::ConfigError("", fmt::format("unknown scenario '{}'", opt.scenario));
    cfg = *builtin;
  } else {
    cfg = config::load_config(opt.config_path);
  }
  if (opt.seed) cfg.seed = *opt.seed;
  cfg.validate();

  std::optional<scenario::KappaSweep> sweep;
  if (!opt.kappa_sweep.empty()) {
    if (command != scenario::Command::translate) {
      throw config::ConfigError("--sweep", "only the translate subcommand takes --sweep");
    }
    if (opt.kappa_sweep[0] != "kappaL") {
      throw config::ConfigError("--sweep", fmt::format("cannot sweep '{}'; only kappaL", opt.kappa_sweep[0]));
    }
    sweep = scenario::parse_kappa_sweep(opt.kappa_sweep[1]);
  }

  const std::filesystem::path dir = opt.out.empty() ? cfg.output_dir : opt.out;
  const auto artifacts = scenario::run_scenario(cfg, command, sweep);
  scenario::write_artifacts(artifacts, dir);
  for (const auto& a : artifacts) {
    std::cout << (dir / a.filename).string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum frequency translation simulator"};
  app.require_subcommand(1);
  Options opt;
  std::optional<qft::scenario::Command> chosen;

  for (auto command : {qft::scenario::Command::phasematch, qft::scenario::Command::translate,
                       qft::scenario::Command::acceptance, qft::scenario::Command::g2,
                       qft::scenario::Command::efficiency, qft::scenario::Command::sweep}) {
    auto* sub = app.add_subcommand(qft::scenario::command_name(command));
    sub->add_option("--config", opt.config_path, "scenario YAML file");
    sub->add_option("--scenario", opt.scenario, "built-in scenario name");
    sub->add_option("--seed", opt.seed, "random seed (overrides the config)");
    sub->add_option("--out", opt.out, "output directory (overrides the config)");
    if (command == qft::scenario::Command::translate) {
      sub->add_option("--sweep", opt.kappa_sweep, "kappaL START:STOP:STEPS")->expected(2);
    }
    sub->callback([&chosen, command] { chosen = command; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    return run(*chosen, opt);
  } catch (const qft::config::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericError;
  }
}
