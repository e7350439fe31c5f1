#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sfl/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Singular first-order BVP experiments: run one scenario config"};
  app.require_subcommand(1);
  sfl::RunRequest req;
  std::string config, out;
  int grid_n = 0;
  for (auto kind : sfl::kScenarioKinds) {
    auto* sub = app.add_subcommand(std::string(kind), "run a " + std::string(kind) + " scenario");
    sub->add_option("--config", config, "scenario TOML file")->required();
    sub->add_option("--out", out, "base output directory (default $SFL_OUT, else ./sfl_out)");
    sub->add_option("--grid-n", grid_n, "override grid.N (power of two, 32..65536)");
    sub->add_flag("--quiet", req.quiet, "no progress line");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : sfl::kExitConfig;
  }
  req.kind = app.get_subcommands().front()->get_name();
  req.config = config;
  if (!out.empty()) req.out = out;
  if (grid_n != 0) req.grid_n = grid_n;
  return sfl::run_scenario(req, std::cout, std::cerr);
}
