// Copyright 2026. MIT license.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ndgd/analysis.hpp"

namespace ndgd {

struct ExperimentConfig {
  std::string experiment = "quartic";  // quartic | logistic
  int m = 20;
  int degree = 4;
  std::uint64_t graph_seed = 7;
  std::uint64_t objective_seed = 42;
  double eta = 0.1;                    // logistic ridge weight
  std::vector<std::string> algorithms = {"DGD", "NDGD"};
  std::string init = "paper_fig2";     // paper_fig2 | paper_fig3 | "x,y"
  std::string alpha_mode = "manual";   // manual | schedule
  double rho = 6.0;
  double alpha = 0.05;
  double sigma = 0.05;
  long max_iters = 5000;
  long record_every = 1;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  double box_half_width = 0.0;         // 0 -> objective default
  int constants_samples = 2000;

  Eigen::Vector2d init_point() const;
};

// Flat "key = value" lines; '#' starts a comment. Unknown keys are errors.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::filesystem::path& path);

// Assembled problem instance shared by the commands.
struct Instance {
  Graph graph;
  MixingMatrix mixing;
  ObjectiveSet objective;
  int logistic_resamples = 0;
};

Instance build_instance(const ExperimentConfig& cfg);

// First recorded iteration where every agent is closer to the minimizer set
// than `fraction` of the shared initial distance (or closer than `absolute`).
std::optional<long> escape_iteration_relative(const RunTrace& trace,
                                              double fraction);
std::optional<long> escape_iteration_absolute(const RunTrace& trace,
                                              double absolute);

// Exit codes: run 0 ok / 1 parse / 2 schedule infeasible / 3 divergence;
// verify 0 ok / 1 failing check or parse; schedule 0 ok / 2 infeasible.
int cmd_run(const std::filesystem::path& config_path);
int cmd_verify(const std::string& suite, double rho, long long trials,
               std::uint64_t seed, const std::filesystem::path& report_path);
int cmd_schedule(double rho,
                 const std::optional<std::filesystem::path>& config_path);

}  // namespace ndgd
