#include "epsb/app.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App cli{"Exclusion process with slow boundary: simulations, PDE solves and large deviation experiments"};
  std::string config;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  std::string out = "out";
  cli.add_option("--config", config, "JSON config or a manifest from an earlier run")->required();
  auto* seed_opt = cli.add_option("--seed", seed, "override the config seed");
  auto* workers_opt = cli.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  cli.add_option("--out", out, "output directory");
  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : epsb::app::kConfigError;
  }
  epsb::app::RunOptions opt;
  if (seed_opt->count()) opt.seed = seed;
  if (workers_opt->count()) opt.workers = workers;
  opt.out = out;
  return epsb::app::run_file(config, opt, std::cerr);
}
