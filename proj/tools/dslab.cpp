// dslab <subcommand> [--param value ...] [--config file] [--output path]
//       [--workers n] [--seed s] [--csv]

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dslab/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Duffin-Schaeffer laboratory: exact measures, edge sets and checkers"};
  app.allow_extras();
  app.usage("Usage: dslab <subcommand> [--param value ...] [OPTIONS]");
  std::string subcommand, config_path;
  bool csv = false, list = false;
  app.add_option("--config", config_path, "key = value experiment file; flags override it");
  app.add_flag("--csv", csv, "flatten records to CSV");
  app.add_flag("--list", list, "list subcommands and their parameters");
  // The subcommand is the first argument only; later bare words are flag values.
  int skip = 0;
  if (argc > 1 && argv[1][0] != '-') {
    subcommand = argv[1];
    skip = 1;
  }
  try {
    app.parse(argc - skip, argv + skip);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  if (list) {
    std::cout << dslab::cli::usage();
    return 0;
  }

  dslab::experiment_config cfg;
  try {
    if (!config_path.empty()) cfg = dslab::load_config(config_path);
    if (!subcommand.empty()) {
      if (!cfg.subcommand.empty() && cfg.subcommand != subcommand) {
        throw dslab::cli::usage_error("subcommand '" + subcommand + "' conflicts with config file's '" + cfg.subcommand + "'");
      }
      cfg.subcommand = subcommand;
    }
    if (cfg.subcommand.empty()) throw dslab::cli::usage_error("no subcommand given (see --list)");
    dslab::cli::apply_flags(cfg, app.remaining());
  } catch (const dslab::precondition_error& e) {
    std::cerr << "dslab: " << e.what() << '\n';
    return 1;
  }
  return dslab::cli::run(cfg, std::cout, std::cerr, {csv});
}
