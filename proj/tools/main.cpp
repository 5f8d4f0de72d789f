#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "config.hpp"

int main(int argc, char** argv) {
  using namespace sbm::cli;
  CLI::App app{"Subordinate Brownian motion experiments"};
  app.require_subcommand(1);

  RunRequest req;
  std::uint64_t seed = 0;
  int lanes = 0;
  std::string out;
  auto* run = app.add_subcommand("run", "run the experiment named in a config file");
  run->add_option("config", req.config, "config file (key = value)")->required();
  auto* seed_opt = run->add_option("--seed", seed, "master seed (overrides the config)");
  auto* lanes_opt = run->add_option("--lanes", lanes, "worker threads (overrides the config)")->check(CLI::Range(1, 1024));
  auto* out_opt = run->add_option("--out", out, "output root (overrides the config and $SBM_OUTPUT_ROOT)");

  std::string dir;
  auto* report = app.add_subcommand("report", "merge run summaries under a directory into one table");
  report->add_option("dir", dir, "artifact directory")->required();

  app.add_subcommand("defaults", "print the default configuration table");

  CLI11_PARSE(app, argc, argv);

  if (*run) {
    if (*seed_opt) req.seed = seed;
    if (*lanes_opt) req.lanes = lanes;
    if (*out_opt) req.out = out;
    return run_command(req, std::cout, std::cerr).status;
  }
  if (*report) return report_command(dir, std::cout, std::cerr);
  std::cout << render_defaults();
  return 0;
}
