// lowmach <verb> [--config PATH] [--out DIR] [--seed N] [--eps-override LIST]
#include "lowmach/harness.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Low Mach number limit of compressible non-isentropic MHD"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::vector<double> eps_override;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (overrides out_dir)");
  app.add_option("--seed", seed, "global seed (overrides seed)");
  app.add_option("--eps-override", eps_override, "comma-separated Mach numbers replacing eps_list")
      ->delimiter(',');
  app.fallthrough();

  auto* run_c = app.add_subcommand("run-compressible", "integrate one eps and write diagnostics.csv");
  auto* run_i = app.add_subcommand("run-incompressible", "integrate the incompressible reference");
  auto* sweep = app.add_subcommand("sweep", "run every eps in eps_list against one reference");
  auto* ident = app.add_subcommand("check-identities", "vector-calculus and coupling identities on random fields");

  CLI11_PARSE(app, argc, argv);

  lowmach::RunConfig config;
  try {
    if (!config_path.empty()) config = lowmach::load_config(config_path);
  } catch (const std::exception& e) {
    lowmach::report_error(out_dir.empty() ? config.out_dir : out_dir, "configuration_error", e.what());
    return 2;
  }
  if (!out_dir.empty()) config.out_dir = out_dir;
  if (seed) config.seed = *seed;
  if (!eps_override.empty()) config.eps_list = eps_override;

  if (run_c->parsed()) return lowmach::cmd_run_compressible(config);
  if (run_i->parsed()) return lowmach::cmd_run_incompressible(config);
  if (sweep->parsed()) return lowmach::cmd_sweep(config);
  if (ident->parsed()) return lowmach::cmd_check_identities(config);
  return 2;
}
