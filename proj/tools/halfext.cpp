// Batch driver: `halfext run <experiment> [flags]`.
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "experiments.hpp"

namespace app = halfext::app;

int main(int argc, char** argv) {
  CLI::App cli{"Numerical experiments for Poisson extensions to the upper half-space"};
  cli.require_subcommand(0, 1);
  std::string fixtures_out;
  auto* regen = cli.add_option("--regenerate-fixtures", fixtures_out,
                               "Recompute derived_constants.csv into DIR (default: $HALFEXT_FIXTURES or ./fixtures)")
                    ->expected(0, 1);

  auto* run = cli.add_subcommand("run", "Run one experiment");
  std::string experiment, config_file;
  double p = 0.0;
  int quad_order = 0;
  app::ExperimentConfig flags;
  run->add_option("experiment", experiment, "Experiment name")->required();
  run->add_option("--config", config_file, "Flat JSON config; flags override its values");
  auto* o_n = run->add_option("--n", flags.n, "Half-space dimension");
  auto* o_p = run->add_option("--p", p, "Boundary exponent");
  auto* o_grid = run->add_option("--grid-n", flags.grid_n, "Radial nodes");
  auto* o_height = run->add_option("--height-count", flags.height_count, "Height nodes");
  auto* o_quad = run->add_option("--quad-order", quad_order, "Quadrature order of the main integral");
  auto* o_trials = run->add_option("--trials", flags.trials, "Random trials");
  auto* o_seed = run->add_option("--seed", flags.seed, "Random seed");
  auto* o_threads = run->add_option("--threads", flags.threads, "Worker thread cap (0: all cores)");
  auto* o_repro = run->add_flag("--reproducible", flags.reproducible, "Single thread, deterministic output");
  auto* o_out = run->add_option("--out", flags.out, "Output directory");
  auto* o_init = run->add_option("--init", flags.init, "Initial profile: gaussian, bump, wrong-family");
  auto* o_iters = run->add_option("--max-iters", flags.max_iters, "Iteration budget");
  auto* o_tol = run->add_option("--tol", flags.tol, "Residual tolerance");
  auto* o_damp = run->add_option("--damping", flags.damping, "Damping in (0, 1]");
  auto* o_norm = run->add_option("--normalization", flags.normalization, "mass_half or unit_lp");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return cli.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return cli.exit(e);
  } catch (const CLI::ParseError& e) {
    cli.exit(e);
    return 2;
  }

  if (regen->count() > 0) {
    const std::string dir = fixtures_out.empty() ? app::fixtures_dir() : fixtures_out;
    try {
      app::regenerate_fixtures(dir, std::cout);
    } catch (const std::exception& e) {
      std::cerr << "fixture regeneration failed: " << e.what() << "\n";
      return 1;
    }
    if (!run->parsed()) return 0;
  }
  if (!run->parsed()) {
    std::cerr << cli.help();
    return 2;
  }

  app::ExperimentConfig cfg;
  try {
    if (!config_file.empty()) {
      std::ifstream is(config_file);
      if (!is) throw app::UsageError("cannot open config " + config_file);
      nlohmann::json j;
      try {
        is >> j;
      } catch (const nlohmann::json::exception& e) {
        throw app::UsageError(std::string("config: ") + e.what());
      }
      app::merge_json(cfg, j);
    }
  } catch (const app::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }
  cfg.experiment = experiment;
  if (o_n->count()) cfg.n = flags.n;
  if (o_p->count()) cfg.p = p;
  if (o_grid->count()) cfg.grid_n = flags.grid_n;
  if (o_height->count()) cfg.height_count = flags.height_count;
  if (o_quad->count()) cfg.quad_order = quad_order;
  if (o_trials->count()) cfg.trials = flags.trials;
  if (o_seed->count()) cfg.seed = flags.seed;
  if (o_threads->count()) cfg.threads = flags.threads;
  if (o_repro->count()) cfg.reproducible = true;
  if (o_out->count()) cfg.out = flags.out;
  if (o_init->count()) cfg.init = flags.init;
  if (o_iters->count()) cfg.max_iters = flags.max_iters;
  if (o_tol->count()) cfg.tol = flags.tol;
  if (o_damp->count()) cfg.damping = flags.damping;
  if (o_norm->count()) cfg.normalization = flags.normalization;
  return app::run(cfg, std::cerr);
}
