#include <CLI11.hpp>

#include <iostream>

#include "commands.hpp"
#include "mpmsa/linalg.hpp"

int main(int argc, char** argv) {
  mpmsa::ensure_sane_lapack(argv);
  CLI::App app{"Multi-particle multiscale analysis experiments"};
  app.require_subcommand(1, 1);
  mpmsa::cli::RunOptions opt;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  int threads = 1;
  for (const auto& name : mpmsa::cli::subcommands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", opt.config, "experiment config (YAML)")->required();
    sub->add_option("--out-dir", opt.out_dir, "run directory");
    sub->add_option("--seed", seed, "base seed (overrides run.seed)");
    sub->add_option("--trials", trials, "trial count (overrides run.trials)");
    sub->add_option("--threads", threads, "worker threads, 0 = auto");
  }
  CLI11_PARSE(app, argc, argv);
  auto* chosen = app.get_subcommands().front();
  if (chosen->count("--seed")) opt.seed = seed;
  if (chosen->count("--trials")) opt.trials = trials;
  if (chosen->count("--threads")) opt.threads = threads;
  return mpmsa::cli::run(chosen->get_name(), opt);
}
