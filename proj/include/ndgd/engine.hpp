// Copyright 2026. MIT license.
#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ndgd/objective.hpp"

namespace ndgd {

// All confidence-parameter-driven quantities. The theoretical iteration
// count K is typically astronomical; it is computed exactly and reported,
// never used as an execution budget.
struct Schedule {
  double rho = 1.0;
  double alpha = 0.0;   // step size: lambda_min(W) / (L_g sqrt(rho))
  double sigma = 0.0;   // noise std: alpha / (40 sqrt(mn) L_H rho^3)
  double zeta = 0.0;    // consensus-error bound
  double d = 0.0;       // localization radius: sqrt(alpha)/(40 L_H rho^{3/2})
  double eps_g = 0.0;   // gradient threshold sqrt(alpha)
  double eps_H = 0.0;   // curvature threshold sqrt(L_H sqrt(alpha))
  long long r = 0;      // escape-window length ceil(alpha^{-3/2} rho)
  boost::multiprecision::cpp_int K;  // ceil((Q0 - f_star_sum) alpha^-4 rho^5)
  double log10_K = 0.0;
};

struct ScheduleInfeasible : std::runtime_error {
  explicit ScheduleInfeasible(const std::string& what, double required_rho_)
      : std::runtime_error(what), required_rho(required_rho_) {}
  double required_rho;  // smallest rho making the zeta denominator positive
};

Schedule build_schedule(double rho, const RegularityConstants& constants,
                        const MixingMatrix& W, int m, int n, double Q0,
                        double f_star_sum);

enum class Algorithm { DGD, NDGD, GDQ };

std::string algorithm_name(Algorithm a);
std::optional<Algorithm> parse_algorithm(const std::string& name);

struct StationarityThresholds {
  double eta = 0.0;    // consensus error
  double eps = 0.0;    // gradient-sum norm
  double gamma = 0.0;  // Hessian-sum eigenvalue slack
};

struct RunConfig {
  Algorithm algorithm = Algorithm::DGD;
  Eigen::VectorXd x0;  // stacked start, length m*n
  long max_iters = 1000;
  std::uint64_t seed = 0;
  long record_every = 1;
  std::optional<StationarityThresholds> stop_on_stationarity;
};

struct TraceRow {
  long k = 0;
  double consensus_error = 0.0;
  double grad_q_norm = 0.0;
  double q_value = 0.0;
  double grad_sum_norm = 0.0;
  double lmin_hess_sum = 0.0;
  std::vector<double> dist_to_minimizers;  // per agent; empty if set unknown
};

struct RunTrace {
  std::vector<TraceRow> rows;
  Eigen::VectorXd final_x;
  std::uint64_t rng_digest = 0;
  long iters = 0;
  bool diverged = false;
  bool stopped_stationary = false;

  std::uint64_t digest() const;  // content hash over rows and final iterate
};

// One distributed step: agent i mixes neighbor blocks through row i of W and
// takes a local gradient step.
Eigen::VectorXd dgd_step(const ObjectiveSet& obj, const MixingMatrix& W,
                         double alpha, const Eigen::VectorXd& xhat);

// Plain gradient descent on the penalized objective; algebraically identical
// to dgd_step.
Eigen::VectorXd gdq_step(const ObjectiveSet& obj, const MixingMatrix& W,
                         double alpha, const Eigen::VectorXd& xhat);

// Stacked i.i.d. Normal(0, sigma^2) perturbation, filled agent-major.
Eigen::VectorXd sample_perturbation(int m, int n, double sigma, Rng& rng);

Eigen::VectorXd ndgd_step(const ObjectiveSet& obj, const MixingMatrix& W,
                          double alpha, const Eigen::VectorXd& xhat,
                          const Eigen::VectorXd& noise);

RunTrace run(const RunConfig& config, const ObjectiveSet& obj,
             const MixingMatrix& W, double alpha, double sigma);

struct StationarityReport {
  bool consensus_ok = false;
  bool gradient_ok = false;
  bool hessian_ok = false;
  double consensus_error = 0.0;
  double grad_sum_norm = 0.0;
  double lmin_hess_sum = 0.0;

  bool all() const { return consensus_ok && gradient_ok && hessian_ok; }
};

StationarityReport check_consensual_stationarity(const ObjectiveSet& obj,
                                                 const Eigen::VectorXd& xhat,
                                                 double eta, double eps,
                                                 double gamma);

// CSV schema: k,consensus_error,grad_q_norm,q_value,grad_sum_norm,
// lmin_hess_sum,dist_agent_0,... with 17-significant-digit floats.
void write_trace_csv(const RunTrace& trace, std::ostream& out);

}  // namespace ndgd
