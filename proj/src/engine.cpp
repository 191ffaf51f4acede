// Copyright 2026. MIT license.
#include "ndgd/engine.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

namespace ndgd {

namespace mp = boost::multiprecision;
using BigFloat = mp::cpp_bin_float_50;

Schedule build_schedule(double rho, const RegularityConstants& constants,
                        const MixingMatrix& W, int m, int n, double Q0,
                        double f_star_sum) {
  if (rho < 1.0) throw std::invalid_argument("rho must be >= 1");
  Schedule s;
  s.rho = rho;
  s.alpha = W.lambda_min / (constants.L_g * std::sqrt(rho));

  const double denom = 1.0 - W.lambda_2 - s.alpha * constants.L_g;
  if (denom <= 0.0) {
    // alpha * L_g = lambda_min / sqrt(rho), so feasibility is a pure rho
    // threshold for a fixed mixing matrix.
    double required = std::numeric_limits<double>::infinity();
    if (W.lambda_2 < 1.0) {
      const double root = W.lambda_min / (1.0 - W.lambda_2);
      required = std::max(1.0, root * root) * (1.0 + 1e-9);
    }
    throw ScheduleInfeasible(
        fmt::format("consensus-rate denominator {:.6g} <= 0 at rho={:.6g}; "
                    "increase rho above {:.6g}",
                    denom, rho, required),
        required);
  }

  const double mn = static_cast<double>(m) * n;
  s.sigma = s.alpha / (40.0 * std::sqrt(mn) * constants.L_H * rho * rho * rho);
  s.d = std::sqrt(s.alpha) / (40.0 * constants.L_H * std::pow(rho, 1.5));
  s.zeta = (s.alpha * constants.D +
            s.alpha * s.sigma * (std::sqrt(2.0 * rho) + std::sqrt(mn))) /
           denom;
  s.eps_g = std::sqrt(s.alpha);
  s.eps_H = std::sqrt(s.eps_g * constants.L_H);
  s.r = static_cast<long long>(
      std::ceil(std::pow(s.alpha, -1.5) * rho));

  const double gap = std::max(Q0 - f_star_sum, 0.0);
  const BigFloat k_exact = BigFloat(gap) / mp::pow(BigFloat(s.alpha), 4) *
                           mp::pow(BigFloat(rho), 5);
  s.K = mp::cpp_int(mp::ceil(k_exact));
  s.log10_K = k_exact > 0 ? static_cast<double>(mp::log10(k_exact))
                          : -std::numeric_limits<double>::infinity();
  return s;
}

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::DGD: return "DGD";
    case Algorithm::NDGD: return "NDGD";
    case Algorithm::GDQ: return "GDQ";
  }
  return "?";
}

std::optional<Algorithm> parse_algorithm(const std::string& name) {
  if (name == "DGD") return Algorithm::DGD;
  if (name == "NDGD") return Algorithm::NDGD;
  if (name == "GDQ") return Algorithm::GDQ;
  return std::nullopt;
}

Eigen::VectorXd dgd_step(const ObjectiveSet& obj, const MixingMatrix& W,
                         double alpha, const Eigen::VectorXd& xhat) {
  if (alpha < 0.0) throw std::invalid_argument("alpha must be >= 0");
  const int m = obj.m, n = obj.n;
  Eigen::VectorXd out(m * n);
  for (int i = 0; i < m; ++i) {
    Eigen::VectorXd mixed = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < m; ++j) {
      if (W.W(i, j) != 0.0) mixed += W.W(i, j) * xhat.segment(j * n, n);
    }
    if (alpha != 0.0) mixed -= alpha * obj.grad(i, xhat.segment(i * n, n));
    out.segment(i * n, n) = mixed;
  }
  return out;
}

Eigen::VectorXd gdq_step(const ObjectiveSet& obj, const MixingMatrix& W,
                         double alpha, const Eigen::VectorXd& xhat) {
  return xhat - alpha * Q_grad(obj, W, alpha, xhat);
}

Eigen::VectorXd sample_perturbation(int m, int n, double sigma, Rng& rng) {
  if (sigma < 0.0) throw std::invalid_argument("sigma must be >= 0");
  Eigen::VectorXd noise = Eigen::VectorXd::Zero(m * n);
  if (sigma == 0.0) return noise;
  for (int i = 0; i < m * n; ++i) noise(i) = sigma * rng.normal();
  return noise;
}

Eigen::VectorXd ndgd_step(const ObjectiveSet& obj, const MixingMatrix& W,
                          double alpha, const Eigen::VectorXd& xhat,
                          const Eigen::VectorXd& noise) {
  if (noise.size() != xhat.size())
    throw std::invalid_argument("noise length mismatch");
  const int m = obj.m, n = obj.n;
  Eigen::VectorXd out(m * n);
  for (int i = 0; i < m; ++i) {
    Eigen::VectorXd mixed = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < m; ++j) {
      if (W.W(i, j) != 0.0) mixed += W.W(i, j) * xhat.segment(j * n, n);
    }
    mixed -= alpha * (obj.grad(i, xhat.segment(i * n, n)) +
                      noise.segment(i * n, n));
    out.segment(i * n, n) = mixed;
  }
  return out;
}

std::uint64_t RunTrace::digest() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& row : rows) {
    h = fnv1a(&row.k, sizeof(row.k), h);
    h = fnv1a(&row.consensus_error, sizeof(double), h);
    h = fnv1a(&row.grad_q_norm, sizeof(double), h);
    h = fnv1a(&row.q_value, sizeof(double), h);
    h = fnv1a(&row.grad_sum_norm, sizeof(double), h);
    h = fnv1a(&row.lmin_hess_sum, sizeof(double), h);
    for (double d : row.dist_to_minimizers) h = fnv1a(&d, sizeof(double), h);
  }
  if (final_x.size() > 0)
    h = fnv1a(final_x.data(), sizeof(double) * final_x.size(), h);
  h = fnv1a(&rng_digest, sizeof(rng_digest), h);
  return h;
}

static TraceRow make_row(long k, const ObjectiveSet& obj,
                         const MixingMatrix& W, double alpha,
                         const Eigen::VectorXd& x) {
  TraceRow row;
  row.k = k;
  row.consensus_error = consensus_error(x, obj.m, obj.n);
  row.grad_q_norm = Q_grad(obj, W, alpha, x).norm();
  row.q_value = Q_value(obj, W, alpha, x);
  row.grad_sum_norm = gradient_sum(obj, x).norm();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hessian_sum(obj, x));
  row.lmin_hess_sum = es.eigenvalues()(0);
  if (!obj.minimizer_set.empty()) {
    row.dist_to_minimizers.resize(obj.m);
    for (int i = 0; i < obj.m; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : obj.minimizer_set)
        best = std::min(best, (x.segment(i * obj.n, obj.n) - p).norm());
      row.dist_to_minimizers[i] = best;
    }
  }
  return row;
}

RunTrace run(const RunConfig& config, const ObjectiveSet& obj,
             const MixingMatrix& W, double alpha, double sigma) {
  if (config.max_iters < 1 || config.record_every < 1)
    throw std::invalid_argument("max_iters and record_every must be >= 1");
  if (config.x0.size() != static_cast<Eigen::Index>(obj.m) * obj.n)
    throw std::invalid_argument("x0 length mismatch");

  Rng rng = Rng::stream(config.seed, 0);
  RunTrace trace;
  Eigen::VectorXd x = config.x0;
  trace.rows.push_back(make_row(0, obj, W, alpha, x));

  long k = 0;
  for (; k < config.max_iters; ++k) {
    Eigen::VectorXd next;
    switch (config.algorithm) {
      case Algorithm::DGD:
        next = dgd_step(obj, W, alpha, x);
        break;
      case Algorithm::GDQ:
        next = gdq_step(obj, W, alpha, x);
        break;
      case Algorithm::NDGD: {
        const Eigen::VectorXd noise =
            sample_perturbation(obj.m, obj.n, sigma, rng);
        next = ndgd_step(obj, W, alpha, x, noise);
        break;
      }
    }
    if (!next.allFinite()) {
      trace.diverged = true;
      break;
    }
    x = next;
    const long step = k + 1;
    const bool record = step % config.record_every == 0 ||
                        step == config.max_iters;
    if (record) {
      TraceRow row = make_row(step, obj, W, alpha, x);
      // The iterate can be finite while derived quantities (quartic values
      // at huge coordinates) already overflow; that is divergence too.
      if (!std::isfinite(row.q_value) || !std::isfinite(row.grad_q_norm) ||
          !std::isfinite(row.grad_sum_norm)) {
        trace.diverged = true;
        break;
      }
      trace.rows.push_back(std::move(row));
    }
    if (config.stop_on_stationarity) {
      const auto& thr = *config.stop_on_stationarity;
      const auto rep =
          check_consensual_stationarity(obj, x, thr.eta, thr.eps, thr.gamma);
      if (rep.all()) {
        if (!record) trace.rows.push_back(make_row(step, obj, W, alpha, x));
        trace.stopped_stationary = true;
        ++k;
        break;
      }
    }
  }
  trace.iters = trace.diverged ? k : trace.rows.back().k;
  trace.final_x = x;
  const std::uint64_t state = rng.state();
  trace.rng_digest = fnv1a(&state, sizeof(state));
  return trace;
}

StationarityReport check_consensual_stationarity(const ObjectiveSet& obj,
                                                 const Eigen::VectorXd& xhat,
                                                 double eta, double eps,
                                                 double gamma) {
  StationarityReport rep;
  rep.consensus_error = consensus_error(xhat, obj.m, obj.n);
  rep.grad_sum_norm = gradient_sum(obj, xhat).norm();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hessian_sum(obj, xhat));
  rep.lmin_hess_sum = es.eigenvalues()(0);
  rep.consensus_ok = rep.consensus_error <= eta;
  rep.gradient_ok = rep.grad_sum_norm <= eps;
  rep.hessian_ok = rep.lmin_hess_sum >= -gamma;
  return rep;
}

void write_trace_csv(const RunTrace& trace, std::ostream& out) {
  out << "k,consensus_error,grad_q_norm,q_value,grad_sum_norm,lmin_hess_sum";
  const std::size_t agents =
      trace.rows.empty() ? 0 : trace.rows.front().dist_to_minimizers.size();
  for (std::size_t i = 0; i < agents; ++i)
    out << fmt::format(",dist_agent_{}", i);
  out << '\n';
  for (const auto& row : trace.rows) {
    out << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}", row.k,
                       row.consensus_error, row.grad_q_norm, row.q_value,
                       row.grad_sum_norm, row.lmin_hess_sum);
    for (double d : row.dist_to_minimizers) out << fmt::format(",{:.17g}", d);
    out << '\n';
  }
}

}  // namespace ndgd
