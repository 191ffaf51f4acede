// Copyright 2026. MIT license.
#include "ndgd/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

namespace ndgd {

WilsonInterval wilson95(long long successes, long long trials) {
  if (trials <= 0) throw std::invalid_argument("trials must be positive");
  const double z = 1.959963984540054;  // 97.5% normal quantile
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2n = z * z / n;
  const double center = (p + z2n / 2.0) / (1.0 + z2n);
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z2n / (4.0 * n)) / (1.0 + z2n);
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

TrialStats make_trial_stats(long long successes, long long trials,
                            double bound_probability) {
  TrialStats s;
  s.trials = trials;
  s.successes = successes;
  s.bound_probability = bound_probability;
  s.empirical_rate = static_cast<double>(successes) / trials;
  s.wilson = wilson95(successes, trials);
  return s;
}

long long parallel_success_count(long long trials,
                                 const std::function<bool(long long)>& fn) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers =
      static_cast<unsigned>(std::min<long long>(hw, std::max<long long>(
                                                        1, trials / 1024)));
  if (workers <= 1) {
    long long count = 0;
    for (long long i = 0; i < trials; ++i)
      if (fn(i)) ++count;
    return count;
  }
  std::atomic<long long> total{0};
  std::vector<std::thread> pool;
  const long long chunk = (trials + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const long long lo = w * chunk;
    const long long hi = std::min(trials, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      long long count = 0;
      for (long long i = lo; i < hi; ++i)
        if (fn(i)) ++count;
      total += count;
    });
  }
  for (auto& t : pool) t.join();
  return total.load();
}

TrialStats eig_sandwich_check(const ObjectiveSet& obj, const MixingMatrix& W,
                              int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  const auto& box = obj.constants.domain_box;
  const long long successes = parallel_success_count(
      trials, [&](long long trial) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(trial));
        Eigen::VectorXd x(obj.m * obj.n);
        for (int i = 0; i < obj.m; ++i)
          x.segment(i * obj.n, obj.n) = box.sample(rng);
        const double alpha = std::pow(10.0, rng.uniform(-2.0, 1.0));

        double lmin_F = std::numeric_limits<double>::infinity();
        for (int i = 0; i < obj.m; ++i) {
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
              obj.hess(i, x.segment(i * obj.n, obj.n)));
          lmin_F = std::min(lmin_F, es.eigenvalues()(0));
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esq(
            Q_hessian(obj, W, alpha, x));
        const double lmin_Q = esq.eigenvalues()(0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ess(
            hessian_sum(obj, x));
        const double lmin_avg = ess.eigenvalues()(0) / obj.m;
        return lmin_F <= lmin_Q + 1e-8 && lmin_Q <= lmin_avg + 1e-8;
      });
  return make_trial_stats(successes, trials, 1.0);
}

TrialStats consensus_bound_trial(const ObjectiveSet& obj,
                                 const MixingMatrix& W, const Schedule& sched,
                                 int k, int trials, std::uint64_t seed) {
  const double rate = W.lambda_2 + sched.alpha * obj.constants.L_g;
  if (rate >= 1.0)
    throw std::invalid_argument("consensus rate >= 1; schedule infeasible");
  const auto& box = obj.constants.domain_box;
  const long long successes = parallel_success_count(
      trials, [&](long long trial) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(trial));
        Eigen::VectorXd x(obj.m * obj.n);
        for (int i = 0; i < obj.m; ++i)
          x.segment(i * obj.n, obj.n) = box.sample(rng);
        const double ce0 = consensus_error(x, obj.m, obj.n);
        for (int step = 0; step < k; ++step) {
          const Eigen::VectorXd noise =
              sample_perturbation(obj.m, obj.n, sched.sigma, rng);
          x = ndgd_step(obj, W, sched.alpha, x, noise);
        }
        const double ce = consensus_error(x, obj.m, obj.n);
        return ce <= std::pow(rate, k) * ce0 + sched.zeta + 1e-12;
      });
  const double bound =
      std::clamp(1.0 - k * std::exp(-sched.rho), 0.0, 1.0);
  return make_trial_stats(successes, trials, bound);
}

TrialStats descent_bound_trial(const ObjectiveSet& obj, const MixingMatrix& W,
                               const Schedule& sched, int t, int trials,
                               std::uint64_t seed) {
  const auto& box = obj.constants.domain_box;
  const double mn = static_cast<double>(obj.m) * obj.n;
  const long long successes = parallel_success_count(
      trials, [&](long long trial) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(trial));
        Eigen::VectorXd x(obj.m * obj.n);
        for (int i = 0; i < obj.m; ++i)
          x.segment(i * obj.n, obj.n) = box.sample(rng);
        const double q0 = Q_value(obj, W, sched.alpha, x);
        double grad_sq_sum = 0.0;
        for (int step = 0; step < t; ++step) {
          grad_sq_sum += Q_grad(obj, W, sched.alpha, x).squaredNorm();
          const Eigen::VectorXd noise =
              sample_perturbation(obj.m, obj.n, sched.sigma, rng);
          x = ndgd_step(obj, W, sched.alpha, x, noise);
        }
        const double qt = Q_value(obj, W, sched.alpha, x);
        const double noise_term =
            mn * sched.alpha * sched.sigma * sched.sigma *
            (t + std::sqrt(static_cast<double>(t) * sched.rho) + sched.rho);
        return qt - q0 <=
               -(sched.alpha / 2.0) * grad_sq_sum + noise_term + 1e-12;
      });
  const double bound = std::clamp(1.0 - 2.0 * std::exp(-sched.rho), 0.0, 1.0);
  return make_trial_stats(successes, trials, bound);
}

CouplingPair evolve_coupling(const ObjectiveSet& obj, const MixingMatrix& W,
                             double alpha, double sigma,
                             const Eigen::VectorXd& x0, int steps,
                             std::uint64_t seed) {
  CouplingPair pair;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      Q_hessian(obj, W, alpha, x0));
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition failed");
  pair.e_alpha = es.eigenvectors().col(0);

  Rng rng = Rng::stream(seed, 0);
  Eigen::VectorXd y = x0, z = x0;
  pair.y.push_back(y);
  pair.z.push_back(z);
  pair.delta.push_back(Eigen::VectorXd::Zero(x0.size()));
  for (int k = 0; k < steps; ++k) {
    const Eigen::VectorXd ny = sample_perturbation(obj.m, obj.n, sigma, rng);
    // Mirror the component along e_alpha, keep the rest identical; the
    // reflected draw has the same marginal law.
    const Eigen::VectorXd nz = ny - 2.0 * pair.e_alpha.dot(ny) * pair.e_alpha;
    // Aggregate form x - alpha (grad Q + n); identical to the distributed
    // update, and matches the arithmetic of the decomposition identity.
    y = y - alpha * (Q_grad(obj, W, alpha, y) + ny);
    z = z - alpha * (Q_grad(obj, W, alpha, z) + nz);
    pair.y.push_back(y);
    pair.z.push_back(z);
    pair.delta.push_back(y - z);
    pair.delta_noise.push_back(ny - nz);
  }
  return pair;
}

std::vector<std::pair<double, double>> gauss_legendre_01(int n) {
  if (n < 1) throw std::invalid_argument("need at least one node");
  // Nodes on [-1, 1] by Newton iteration on P_n, then affine map to [0, 1].
  std::vector<std::pair<double, double>> out;
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      if (n == 1) p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      const double pn = (n == 1) ? x : p1;
      const double pn1 = (n == 1) ? 1.0 : p0;
      pp = n * (x * pn - pn1) / (x * x - 1.0);
      const double dx = pn / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    out.emplace_back(0.5 * (x + 1.0), 0.5 * w);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double decomposition_check(const CouplingPair& pair, const ObjectiveSet& obj,
                           const MixingMatrix& W, double alpha,
                           int quad_nodes) {
  const auto nodes = gauss_legendre_01(quad_nodes);
  const int steps = static_cast<int>(pair.delta_noise.size());
  const Eigen::Index dim = pair.delta.front().size();
  const Eigen::MatrixXd H0 = Q_hessian(obj, W, alpha, pair.y.front());
  const Eigen::MatrixXd propagate =
      Eigen::MatrixXd::Identity(dim, dim) - alpha * H0;

  Eigen::VectorXd d1 = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd d2 = Eigen::VectorXd::Zero(dim);
  double max_residual = 0.0;
  for (int k = 0; k < steps; ++k) {
    // Path-averaged Hessian between the two iterates at step k.
    Eigen::MatrixXd Ik = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto& [s, w] : nodes)
      Ik += w * Q_hessian(obj, W, alpha,
                          s * pair.y[k] + (1.0 - s) * pair.z[k]);
    d1 = propagate * d1 - alpha * (Ik - H0) * pair.delta[k];
    d2 = propagate * d2 - alpha * pair.delta_noise[k];
    max_residual =
        std::max(max_residual, (pair.delta[k + 1] - d1 - d2).norm());
  }
  return max_residual;
}

ChiSquareTails chi_square_tail_check(int D, double x, long long trials,
                                     std::uint64_t seed) {
  if (D < 1 || x <= 0.0) throw std::invalid_argument("need D >= 1 and x > 0");
  const double upper_gap = 2.0 * std::sqrt(D * x) + 2.0 * x;
  const double lower_gap = 2.0 * std::sqrt(D * x);
  std::atomic<long long> upper_hits{0}, lower_hits{0};
  parallel_success_count(trials, [&](long long trial) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(trial));
    double u = 0.0;
    for (int i = 0; i < D; ++i) {
      const double g = rng.normal();
      u += g * g;
    }
    if (u - D >= upper_gap) ++upper_hits;
    if (D - u >= lower_gap) ++lower_hits;
    return false;
  });
  const double bound = std::exp(-x);
  ChiSquareTails tails;
  tails.upper = make_trial_stats(upper_hits.load(), trials, bound);
  tails.lower = make_trial_stats(lower_hits.load(), trials, bound);
  return tails;
}

double AzumaProcess::bound(double lambda) const {
  return std::exp(-lambda * lambda /
                  (2.0 * (sum_sigma2_a2 + M * lambda / 3.0))) +
         sum_p;
}

AzumaProcess plus_minus_one_process(int t) {
  AzumaProcess p;
  p.t = t;
  p.increment = [](int, Rng& rng) {
    return rng.uniform() < 0.5 ? 1.0 : -1.0;
  };
  p.sum_sigma2_a2 = 2.0 * t;  // sigma_k = 1, a_k = 1
  p.M = 0.0;
  p.sum_p = 0.0;
  return p;
}

AzumaProcess rare_jump_process(int t, double jump, double p) {
  AzumaProcess proc;
  proc.t = t;
  proc.increment = [jump, p](int, Rng& rng) {
    return jump * ((rng.uniform() < p ? 1.0 : 0.0) - p);
  };
  proc.sum_sigma2_a2 = t * jump * jump * p * (1.0 - p);  // a_k = 0
  proc.M = 0.0;
  proc.sum_p = t * p;
  return proc;
}

TrialStats relaxed_azuma_trial(const AzumaProcess& process, double lambda,
                               long long trials, std::uint64_t seed) {
  const long long tail_hits = parallel_success_count(
      trials, [&](long long trial) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(trial));
        double x = 0.0;
        for (int k = 0; k < process.t; ++k) x += process.increment(k, rng);
        return x >= lambda;
      });
  return make_trial_stats(tail_hits, trials, process.bound(lambda));
}

double distance_to_set(const Eigen::VectorXd& x,
                       const std::vector<Eigen::VectorXd>& set) {
  if (set.empty()) throw std::invalid_argument("point set is empty");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : set) best = std::min(best, (x - p).norm());
  return best;
}

CheckResult CheckResult::from_rate_bound(const std::string& name,
                                         const std::string& ref,
                                         const TrialStats& stats) {
  CheckResult r;
  r.check_name = name;
  r.paper_ref = ref;
  r.trials = stats.trials;
  r.empirical_rate = stats.empirical_rate;
  r.bound = stats.bound_probability;
  r.wilson = stats.wilson;
  if (stats.bound_probability <= 0.0)
    r.verdict = "vacuous";
  else if (stats.bound_probability >= 1.0)
    // A sure-event bound leaves no statistical slack: demand 100% success.
    r.verdict = stats.successes == stats.trials ? "pass" : "fail";
  else
    r.verdict = stats.wilson.high >= stats.bound_probability ? "pass" : "fail";
  return r;
}

CheckResult CheckResult::from_tail_bound(const std::string& name,
                                         const std::string& ref,
                                         const TrialStats& stats) {
  CheckResult r;
  r.check_name = name;
  r.paper_ref = ref;
  r.trials = stats.trials;
  r.empirical_rate = stats.empirical_rate;
  r.bound = stats.bound_probability;
  r.wilson = stats.wilson;
  if (stats.bound_probability >= 1.0)
    r.verdict = "vacuous";
  else
    r.verdict = stats.wilson.low <= stats.bound_probability ? "pass" : "fail";
  return r;
}

CheckResult CheckResult::from_residual(const std::string& name,
                                       const std::string& ref,
                                       double residual, double tolerance) {
  CheckResult r;
  r.check_name = name;
  r.paper_ref = ref;
  r.trials = 1;
  r.empirical_rate = residual;
  r.bound = tolerance;
  r.wilson = {residual, residual};
  r.verdict = residual <= tolerance ? "pass" : "fail";
  return r;
}

std::string report_to_json(const std::vector<CheckResult>& results) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    arr.push_back({{"check_name", r.check_name},
                   {"paper_ref", r.paper_ref},
                   {"trials", r.trials},
                   {"empirical_rate", r.empirical_rate},
                   {"bound", r.bound},
                   {"wilson_low", r.wilson.low},
                   {"wilson_high", r.wilson.high},
                   {"verdict", r.verdict}});
  }
  return arr.dump(2) + "\n";
}

}  // namespace ndgd
