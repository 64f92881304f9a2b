#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <omp.h>

#include "dunkl/config.hpp"
#include "dunkl/experiments.hpp"

int main(int argc, char** argv) {
  if (const char* env = std::getenv("DUNKL_LAB_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) omp_set_num_threads(n);
  }

  CLI::App app{"Monte Carlo and exact checks for Dunkl processes and their lattice systems"};
  app.require_subcommand(1);
  std::string config;
  std::uint64_t seed = 0;
  std::string out = "out";
  for (const auto& name : dunkl::subcommand_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "JSON config")->required();
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("--out", out, "output directory");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : dunkl::kExitSchema;
  }

  CLI::App* sub = app.get_subcommands().front();
  dunkl::RunOptions opt;
  if (sub->count("--seed")) opt.seed = seed;
  opt.out = out;
  dunkl::Json cfg;
  try {
    cfg = dunkl::load_config(config);
  } catch (const dunkl::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return dunkl::kExitSchema;
  }
  try {
    return dunkl::run_subcommand(sub->get_name(), cfg, opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return dunkl::kExitFail;
  }
}
