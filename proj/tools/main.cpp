#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "safeimm/config.hpp"

int main(int argc, char** argv) {
  using namespace safeimm::cli;

  CLI::App app{"SAFE-IMM tracking benchmark"};
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", args.config, "YAML run configuration")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", args.seed, "Run only this seed");
    sub->add_option("--override", args.overrides, "Override a config field, key=value")
        ->allow_extra_args(false);
  };

  auto* simulate = app.add_subcommand("simulate", "Write truth and measurement CSVs");
  auto* track = app.add_subcommand("track", "Run the tracker and score it");
  auto* ablate = app.add_subcommand("ablate", "Gate x likelihood x TPM ablation");
  auto* bench = app.add_subcommand("bench", "Throughput and latency report");
  for (auto* sub : {simulate, track, ablate, bench}) add_common(sub);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) return cmd_simulate(args);
    if (*track) return cmd_track(args);
    if (*ablate) return cmd_ablate(args);
    if (*bench) return cmd_bench(args);
  } catch (const safeimm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
