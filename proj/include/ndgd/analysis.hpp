// Copyright 2026. MIT license.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ndgd/engine.hpp"

namespace ndgd {

struct WilsonInterval {
  double low = 0.0;
  double high = 1.0;
};

// 95% Wilson score interval for a binomial proportion.
WilsonInterval wilson95(long long successes, long long trials);

struct TrialStats {
  long long trials = 0;
  long long successes = 0;
  double bound_probability = 0.0;  // guaranteed lower/upper bound being tested
  double empirical_rate = 0.0;
  WilsonInterval wilson;
};

TrialStats make_trial_stats(long long successes, long long trials,
                            double bound_probability);

// Runs fn(trial_index) -> success over [0, trials) on a thread pool; the
// success count is order-independent, so the aggregate is deterministic.
long long parallel_success_count(long long trials,
                                 const std::function<bool(long long)>& fn);

// Eigenvalue sandwich: at random (x, alpha),
//   lmin(H_F) <= lmin(H_Q) <= (1/m) lmin(sum_i H_i).
// Exact inequality; every trial must succeed (1e-8 slack).
TrialStats eig_sandwich_check(const ObjectiveSet& obj, const MixingMatrix& W,
                              int trials, std::uint64_t seed);

// Consensus-error bound after k noisy steps from a random start:
//   ce(x^k) <= (lambda_2 + alpha L_g)^k ce(x^0) + zeta,
// tested against success probability 1 - k e^{-rho}.
TrialStats consensus_bound_trial(const ObjectiveSet& obj,
                                 const MixingMatrix& W, const Schedule& sched,
                                 int k, int trials, std::uint64_t seed);

// Accumulated-descent bound over t noisy steps:
//   Q(x^t) - Q(x^0) <= -(alpha/2) sum_k |grad Q(x^k)|^2
//                      + mn alpha sigma^2 (t + sqrt(t rho) + rho),
// tested against success probability 1 - 2 e^{-rho}.
TrialStats descent_bound_trial(const ObjectiveSet& obj, const MixingMatrix& W,
                               const Schedule& sched, int t, int trials,
                               std::uint64_t seed);

// Two runs started at the same point sharing all randomness except that the
// noise component along e_alpha (the minimal-curvature direction of the
// penalized Hessian at the start) is mirrored between them.
struct CouplingPair {
  Eigen::VectorXd e_alpha;
  std::vector<Eigen::VectorXd> y, z;        // iterate histories, length steps+1
  std::vector<Eigen::VectorXd> delta;       // y^k - z^k
  std::vector<Eigen::VectorXd> delta_noise; // n_y^k - n_z^k, length steps
};

CouplingPair evolve_coupling(const ObjectiveSet& obj, const MixingMatrix& W,
                             double alpha, double sigma,
                             const Eigen::VectorXd& x0, int steps,
                             std::uint64_t seed);

// Splits the coupling difference into a Hessian-path term and a noise term,
//   delta^k = delta_1^k + delta_2^k,
// with the path-averaged Hessian integrated by Gauss-Legendre quadrature.
// Returns the max over k of the identity residual.
double decomposition_check(const CouplingPair& pair, const ObjectiveSet& obj,
                           const MixingMatrix& W, double alpha, int quad_nodes);

// Nodes and weights of n-point Gauss-Legendre quadrature on [0, 1].
std::vector<std::pair<double, double>> gauss_legendre_01(int n);

// Chi-square concentration: for U ~ chi2_D,
//   P[U - D >= 2 sqrt(D x) + 2 x] <= e^{-x}   (upper)
//   P[D - U >= 2 sqrt(D x)]       <= e^{-x}   (lower)
struct ChiSquareTails {
  TrialStats upper;
  TrialStats lower;
};

ChiSquareTails chi_square_tail_check(int D, double x, long long trials,
                                     std::uint64_t seed);

// Synthetic supermartingale for the relaxed Azuma bound
//   P[X^t >= X^0 + lambda]
//     <= exp(-lambda^2 / (2 (sum_k (sigma_k^2 + a_k^2) + M lambda / 3)))
//        + sum_k p_k.
struct AzumaProcess {
  int t = 0;
  std::function<double(int k, Rng&)> increment;  // conditionally centered
  double sum_sigma2_a2 = 0.0;                    // sum_k (sigma_k^2 + a_k^2)
  double M = 0.0;
  double sum_p = 0.0;

  double bound(double lambda) const;
};

AzumaProcess plus_minus_one_process(int t);
// Drift-compensated rare-jump process: increments are jump*(B - p) with
// B ~ Bernoulli(p); exceeds its a_k + M = 0 envelope exactly with
// probability p per step, exercising the sum(p_k) correction.
AzumaProcess rare_jump_process(int t, double jump, double p);

TrialStats relaxed_azuma_trial(const AzumaProcess& process, double lambda,
                               long long trials, std::uint64_t seed);

double distance_to_set(const Eigen::VectorXd& x,
                       const std::vector<Eigen::VectorXd>& set);

// One row of the verification report.
struct CheckResult {
  std::string check_name;
  std::string paper_ref;
  long long trials = 0;
  double empirical_rate = 0.0;
  double bound = 0.0;
  WilsonInterval wilson;
  std::string verdict;  // pass | fail | vacuous

  static CheckResult from_rate_bound(const std::string& name,
                                     const std::string& ref,
                                     const TrialStats& stats);
  static CheckResult from_tail_bound(const std::string& name,
                                     const std::string& ref,
                                     const TrialStats& stats);
  static CheckResult from_residual(const std::string& name,
                                   const std::string& ref, double residual,
                                   double tolerance);
};

std::string report_to_json(const std::vector<CheckResult>& results);

}  // namespace ndgd
