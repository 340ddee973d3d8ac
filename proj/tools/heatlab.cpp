#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "heatlab/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Pseudospectral heat-flow simulator and inequality lab"};
  app.require_subcommand(1);

  std::string config;
  int jobs = 0;
  std::string output;
  bool plots = false;

  for (const char* name : {"simulate", "verify", "decay-sweep", "decompose"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "Run configuration (INI)")->required();
    sub->add_option("--jobs", jobs, "Ensemble worker threads (capped by HEATLAB_THREADS)")->check(CLI::NonNegativeNumber);
    sub->add_option("--output", output, "Output directory (overrides run.output_dir)");
    sub->add_flag("--plots", plots, "Emit SVG plots");
  }
  app.get_subcommand("simulate")->description("Evolve one initial datum and write its trajectory");
  app.get_subcommand("verify")->description("Run the inequality suites over the seed ensemble");
  app.get_subcommand("decay-sweep")->description("Fit L2 decay slopes over gamma0 and seeds");
  app.get_subcommand("decompose")->description("Measure the v0/w0 split of the initial data across N");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  heatlab::RunOptions opt;
  opt.jobs = jobs;
  if (!output.empty()) opt.output_dir = output;
  opt.plots = plots;
  opt.log = &std::cerr;
  return heatlab::run_command(app.get_subcommands().front()->get_name(), config, opt);
}
