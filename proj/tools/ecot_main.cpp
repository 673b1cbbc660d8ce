// Command-line front end: simulate (Monte Carlo experiment grids), test
// (score and test a CSV dataset), oracle-check (brute-force equivalence
// suites).

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ecot/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"conformalized multiple testing with finite-sample FDR control"};
  app.require_subcommand(1);

  ecot::cli::CommonOverrides overrides;
  std::uint64_t seed_flag = 0;
  double alpha_flag = 0.0;
  int threads_flag = 0;
  std::string out_flag, format_flag;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed_flag, "override the config seed")
        ->each([&](const std::string&) { overrides.seed = seed_flag; });
    cmd->add_option("--alpha", alpha_flag, "override the FDR target level")
        ->each([&](const std::string&) { overrides.alpha = alpha_flag; });
    cmd->add_option("--threads", threads_flag, "worker threads for replicates")
        ->each([&](const std::string&) { overrides.threads = threads_flag; });
    cmd->add_option("--out", out_flag, "output directory")
        ->each([&](const std::string&) { overrides.out_dir = out_flag; });
    cmd->add_option("--format", format_flag, "report format: json, csv or both")
        ->each([&](const std::string&) { overrides.format = format_flag; });
  };

  std::string sim_config;
  CLI::App* simulate = app.add_subcommand("simulate", "run a Monte Carlo experiment grid");
  simulate->add_option("--config", sim_config, "JSON config file")->required();
  add_common(simulate);

  std::string test_config;
  std::string d0_flag, d1_flag, du_flag;
  ecot::cli::TestPathOverrides paths;
  CLI::App* test = app.add_subcommand("test", "test a CSV dataset for outliers");
  test->add_option("--config", test_config, "JSON config file")->required();
  test->add_option("--d0", d0_flag, "labeled null CSV")
      ->each([&](const std::string&) { paths.d0 = d0_flag; });
  test->add_option("--d1", d1_flag, "labeled non-null CSV")
      ->each([&](const std::string&) { paths.d1 = d1_flag; });
  test->add_option("--du", du_flag, "test CSV")
      ->each([&](const std::string&) { paths.du = du_flag; });
  add_common(test);

  std::string oracle_config;
  bool inject_broken = false;
  CLI::App* oracle = app.add_subcommand("oracle-check", "run the brute-force equivalence suites");
  oracle->add_option("--config", oracle_config, "JSON config file (optional)");
  oracle->add_flag("--inject-broken-scorer", inject_broken,
                   "test hook: use an order-sensitive scorer, expecting failure");
  add_common(oracle);

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      return ecot::cli::cmd_simulate(sim_config, overrides);
    }
    if (test->parsed()) {
      return ecot::cli::cmd_test(test_config, overrides, paths);
    }
    if (oracle->parsed()) {
      return ecot::cli::cmd_oracle_check(oracle_config, overrides, inject_broken);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ecot::cli::kExitInputError;
  }
  return ecot::cli::kExitInputError;
}
