// bozk: batch front door for the BO-ZK numerical laboratory.
//
//   bozk --config run.json [--out DIR] [--force] [--jobs N]
//
// Exit codes: 0 success, 2 invalid config, 3 regime violation,
// 4 non-convergence (diagnostics are still written).

#include <iostream>

#include <CLI11.hpp>

#include "bozk/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"BO-ZK solitary waves: solve, classify, evolve, sweep"};
  std::string config_path;
  std::string out_dir;
  bool force = false;
  int jobs = 1;
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out", out_dir, "output directory (overrides config)");
  app.add_flag("--force", force, "override the solitary-wave regime gate");
  app.add_option("--jobs", jobs, "concurrent jobs for sweep commands")
      ->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  bozk::RunConfig cfg;
  try {
    cfg = bozk::parse_config_file(config_path);
  } catch (const std::exception& e) {
    std::cerr << "bozk: " << e.what() << '\n';
    return 2;
  }
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  cfg.force = cfg.force || force;
  cfg.jobs = jobs;
  return bozk::run(cfg);
}
