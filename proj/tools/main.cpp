// Copyright 2026. MIT license.
#include <CLI11.hpp>

#include "ndgd/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Distributed gradient descent with saddle-escaping noise: "
               "experiment runner, parameter schedules, and empirical bound "
               "verification"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run configured experiments");
  run->add_option("config", config_path, "experiment config file")
      ->required();

  std::string suite = "all";
  double rho = 6.0;
  long long trials = 0;
  std::uint64_t seed = 42;
  std::string report = "verification_report.json";
  auto* verify =
      app.add_subcommand("verify", "Run empirical bound verification");
  verify->add_option("suite", suite,
                     "all|lemma1|lemma3|lemma7|lemma10|chisq|azuma");
  verify->add_option("--rho", rho, "confidence parameter");
  verify->add_option("--trials", trials, "trial count override");
  verify->add_option("--seed", seed, "master seed");
  verify->add_option("--report", report, "report output path");

  double srho = 6.0;
  std::string sconfig;
  auto* sched = app.add_subcommand("schedule", "Print parameter schedules");
  sched->add_option("--rho", srho, "confidence parameter");
  sched->add_option("--config", sconfig, "experiment config file");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return ndgd::cmd_run(config_path);
  if (verify->parsed())
    return ndgd::cmd_verify(suite, rho, trials, seed, report);
  if (sched->parsed())
    return ndgd::cmd_schedule(
        srho, sconfig.empty()
                  ? std::nullopt
                  : std::optional<std::filesystem::path>(sconfig));
  return 0;
}
