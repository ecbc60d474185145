#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "eqm/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"equilibrium-measure toolkit"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir;
  auto* run = app.add_subcommand("run", "execute a scenario file");
  run->add_option("scenario", scenario_path, "scenario JSON file")->required();
  run->add_option("-o,--out", out_dir, "output directory (default: env EQM_OUTPUT_ROOT or .)");

  std::string dir_a, dir_b;
  auto* cmp = app.add_subcommand("compare", "compare the artifacts of two runs");
  cmp->add_option("dirA", dir_a)->required();
  cmp->add_option("dirB", dir_b)->required();

  auto* self = app.add_subcommand("selftest", "run the built-in sanity suite");

  CLI11_PARSE(app, argc, argv);

  eqm::RunOutcome rc;
  if (run->parsed()) {
    if (out_dir.empty()) {
      const char* root = std::getenv("EQM_OUTPUT_ROOT");
      out_dir = root ? std::string(root) : ".";
    }
    rc = eqm::run_scenario_file(scenario_path, out_dir);
  } else if (cmp->parsed()) {
    rc = eqm::compare_runs(dir_a, dir_b);
  } else if (self->parsed()) {
    rc = eqm::run_selftest();
    if (rc.exit_code == 0) rc.messages.push_back("selftest passed");
  }
  for (const auto& m : rc.messages)
    (rc.exit_code == 0 ? std::cout : std::cerr) << m << "\n";
  return rc.exit_code;
}
