// Copyright 2026. MIT license.
#include "ndgd/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace ndgd {
namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

// Consensus-error bound for given step size and noise level; returns nullopt
// when the geometric rate is not contractive.
std::optional<double> zeta_value(double alpha, double sigma, double rho,
                                 const RegularityConstants& constants,
                                 const MixingMatrix& W, int m, int n) {
  const double denom = 1.0 - W.lambda_2 - alpha * constants.L_g;
  if (denom <= 0.0) return std::nullopt;
  const double mn = static_cast<double>(m) * n;
  return (alpha * constants.D +
          alpha * sigma * (std::sqrt(2.0 * rho) + std::sqrt(mn))) /
         denom;
}

}  // namespace

Eigen::Vector2d ExperimentConfig::init_point() const {
  if (init == "paper_fig2") return {1.0 - 1e-5, 1e-5};
  if (init == "paper_fig3") return {1.0 - 1e-5, -1.0 - 1e-5};
  const auto parts = split(init, ',');
  if (parts.size() != 2)
    throw std::invalid_argument("init must be paper_fig2, paper_fig3 or x,y");
  return {std::stod(parts[0]), std::stod(parts[1])};
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(
          fmt::format("line {}: expected key = value", lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "experiment") cfg.experiment = value;
      else if (key == "m") cfg.m = std::stoi(value);
      else if (key == "degree") cfg.degree = std::stoi(value);
      else if (key == "graph_seed") cfg.graph_seed = std::stoull(value);
      else if (key == "objective_seed") cfg.objective_seed = std::stoull(value);
      else if (key == "eta") cfg.eta = std::stod(value);
      else if (key == "algorithms") cfg.algorithms = split(value, ',');
      else if (key == "init") cfg.init = value;
      else if (key == "alpha_mode") cfg.alpha_mode = value;
      else if (key == "rho") cfg.rho = std::stod(value);
      else if (key == "alpha") cfg.alpha = std::stod(value);
      else if (key == "sigma") cfg.sigma = std::stod(value);
      else if (key == "max_iters") cfg.max_iters = std::stol(value);
      else if (key == "record_every") cfg.record_every = std::stol(value);
      else if (key == "seed") cfg.seed = std::stoull(value);
      else if (key == "output_dir") cfg.output_dir = value;
      else if (key == "box_half_width") cfg.box_half_width = std::stod(value);
      else if (key == "constants_samples")
        cfg.constants_samples = std::stoi(value);
      else
        throw std::invalid_argument("unknown key");
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(
          fmt::format("line {}: key '{}': {}", lineno, key, e.what()));
    }
  }
  if (cfg.experiment != "quartic" && cfg.experiment != "logistic")
    throw std::invalid_argument("experiment must be quartic or logistic");
  if (cfg.alpha_mode != "manual" && cfg.alpha_mode != "schedule")
    throw std::invalid_argument("alpha_mode must be manual or schedule");
  if (cfg.alpha_mode == "manual" && (cfg.alpha <= 0.0 || cfg.sigma < 0.0))
    throw std::invalid_argument("manual mode needs alpha > 0 and sigma >= 0");
  for (const auto& a : cfg.algorithms)
    if (!parse_algorithm(a))
      throw std::invalid_argument(fmt::format("unknown algorithm '{}'", a));
  (void)cfg.init_point();  // validates the init spelling
  return cfg;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

Instance build_instance(const ExperimentConfig& cfg) {
  Instance inst;
  inst.graph = cfg.degree == cfg.m - 1
                   ? make_complete_graph(cfg.m)
                   : build_regular_graph(cfg.m, cfg.degree, cfg.graph_seed);
  inst.mixing = lazy_metropolis_mixing(inst.graph);
  double half_width = cfg.box_half_width;
  if (cfg.experiment == "quartic") {
    if (half_width <= 0.0) half_width = 2.0;
    inst.objective =
        make_quartic(sample_quartic_coeffs(cfg.m, cfg.objective_seed),
                     half_width);
  } else {
    if (half_width <= 0.0) half_width = 3.0;
    const LogisticData data =
        sample_logistic_data(cfg.m, cfg.eta, cfg.objective_seed);
    inst.logistic_resamples = data.resamples;
    inst.objective = make_logistic(data, cfg.eta, half_width);
  }
  inst.objective.constants = estimate_constants(
      inst.objective, Box::cube(2, half_width), cfg.constants_samples,
      cfg.objective_seed ^ 0xc0ffee);
  return inst;
}

std::optional<long> escape_iteration_relative(const RunTrace& trace,
                                              double fraction) {
  if (trace.rows.empty() || trace.rows.front().dist_to_minimizers.empty())
    return std::nullopt;
  const auto& first = trace.rows.front().dist_to_minimizers;
  const double initial = *std::max_element(first.begin(), first.end());
  return escape_iteration_absolute(trace, fraction * initial);
}

std::optional<long> escape_iteration_absolute(const RunTrace& trace,
                                              double absolute) {
  for (const auto& row : trace.rows) {
    if (row.dist_to_minimizers.empty()) continue;
    const double worst = *std::max_element(row.dist_to_minimizers.begin(),
                                           row.dist_to_minimizers.end());
    if (worst < absolute) return row.k;
  }
  return std::nullopt;
}

int cmd_run(const std::filesystem::path& config_path) {
  ExperimentConfig cfg;
  try {
    cfg = parse_config_file(config_path);
  } catch (const std::exception& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return 1;
  }

  Instance inst;
  try {
    inst = build_instance(cfg);
  } catch (const std::exception& e) {
    fmt::print(stderr, "setup error: {}\n", e.what());
    return 1;
  }
  const ObjectiveSet& obj = inst.objective;

  const Eigen::Vector2d p0 = cfg.init_point();
  Eigen::VectorXd x0(obj.m * obj.n);
  for (int i = 0; i < obj.m; ++i) x0.segment(i * obj.n, obj.n) = p0;

  double alpha = cfg.alpha, sigma = cfg.sigma;
  std::optional<Schedule> sched;
  if (cfg.alpha_mode == "schedule") {
    try {
      sched = build_schedule(cfg.rho, obj.constants, inst.mixing, obj.m,
                             obj.n, Q_value(obj, inst.mixing, 1.0, x0),
                             obj.constants.f_star_sum);
    } catch (const ScheduleInfeasible& e) {
      fmt::print(stderr, "schedule infeasible: {}\n", e.what());
      return 2;
    }
    alpha = sched->alpha;
    sigma = sched->sigma;
  }
  const std::optional<double> zeta = zeta_value(
      alpha, sigma, cfg.rho, obj.constants, inst.mixing, obj.m, obj.n);

  std::filesystem::create_directories(cfg.output_dir);
  nlohmann::ordered_json meta;
  meta["config"] = {{"experiment", cfg.experiment},
                    {"m", cfg.m},
                    {"degree", cfg.degree},
                    {"graph_seed", cfg.graph_seed},
                    {"objective_seed", cfg.objective_seed},
                    {"eta", cfg.eta},
                    {"init", cfg.init},
                    {"alpha_mode", cfg.alpha_mode},
                    {"rho", cfg.rho},
                    {"max_iters", cfg.max_iters},
                    {"record_every", cfg.record_every},
                    {"seed", cfg.seed},
                    {"constants_samples", cfg.constants_samples}};
  meta["mixing"] = {{"lambda_min", inst.mixing.lambda_min},
                    {"lambda_2", inst.mixing.lambda_2}};
  meta["constants"] = {{"L_g", obj.constants.L_g},
                       {"L_H", obj.constants.L_H},
                       {"D", obj.constants.D},
                       {"f_star_sum", obj.constants.f_star_sum}};
  meta["alpha"] = alpha;
  meta["sigma"] = sigma;
  if (zeta) meta["zeta"] = *zeta;
  if (cfg.experiment == "logistic")
    meta["logistic_resamples"] = inst.logistic_resamples;
  if (sched) {
    meta["schedule"] = {{"rho", sched->rho},
                        {"alpha", sched->alpha},
                        {"sigma", sched->sigma},
                        {"zeta", sched->zeta},
                        {"d", sched->d},
                        {"eps_g", sched->eps_g},
                        {"eps_H", sched->eps_H},
                        {"r", sched->r},
                        {"K", sched->K.str()},
                        {"log10_K", sched->log10_K}};
  }

  bool diverged = false;
  fmt::print("{:<6} {:>14} {:>14} {:>10}\n", "algo", "escape_half",
             "escape_tenth", "iters");
  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  for (std::size_t a = 0; a < cfg.algorithms.size(); ++a) {
    RunConfig rc;
    rc.algorithm = *parse_algorithm(cfg.algorithms[a]);
    rc.x0 = x0;
    rc.max_iters = cfg.max_iters;
    rc.record_every = cfg.record_every;
    // Shared initialization, independent noise stream per algorithm.
    rc.seed = Rng::stream(cfg.seed, 1000 + a)();
    const RunTrace trace = run(rc, obj, inst.mixing, alpha, sigma);
    diverged = diverged || trace.diverged;

    const auto path = std::filesystem::path(cfg.output_dir) /
                      fmt::format("trace_{}.csv", cfg.algorithms[a]);
    std::ofstream out(path);
    write_trace_csv(trace, out);

    const auto half = escape_iteration_relative(trace, 0.5);
    const auto tenth = escape_iteration_absolute(trace, 0.1);
    auto show = [](const std::optional<long>& v) {
      return v ? std::to_string(*v) : std::string("-");
    };
    fmt::print("{:<6} {:>14} {:>14} {:>10}\n", cfg.algorithms[a], show(half),
               show(tenth), trace.iters);
    nlohmann::ordered_json rj = {{"algorithm", cfg.algorithms[a]},
                                 {"run_seed", rc.seed},
                                 {"iters", trace.iters},
                                 {"diverged", trace.diverged},
                                 {"rng_digest", trace.rng_digest},
                                 {"trace_digest", trace.digest()},
                                 {"final_consensus_error",
                                  consensus_error(trace.final_x, obj.m,
                                                  obj.n)}};
    if (half) rj["escape_half"] = *half;
    if (tenth) rj["escape_tenth"] = *tenth;
    runs.push_back(std::move(rj));
  }
  meta["runs"] = std::move(runs);

  std::ofstream mout(std::filesystem::path(cfg.output_dir) / "metadata.json");
  mout << meta.dump(2) << '\n';

  if (diverged) {
    fmt::print(stderr, "divergence: non-finite iterate encountered\n");
    return 3;
  }
  return 0;
}

namespace {

struct VerifyFixtures {
  Instance quartic;
  Instance logistic;
};

VerifyFixtures make_fixtures() {
  ExperimentConfig qc;
  qc.experiment = "quartic";
  qc.m = 20;
  qc.degree = 19;  // complete graph keeps the consensus rate contractive
  qc.objective_seed = 42;
  ExperimentConfig lc;
  lc.experiment = "logistic";
  lc.m = 5;
  lc.degree = 2;
  lc.graph_seed = 1;
  lc.objective_seed = 42;
  return {build_instance(qc), build_instance(lc)};
}

}  // namespace

int cmd_verify(const std::string& suite, double rho, long long trials,
               std::uint64_t seed,
               const std::filesystem::path& report_path) {
  const bool all = suite == "all";
  if (!all && suite != "lemma1" && suite != "lemma3" && suite != "lemma7" &&
      suite != "lemma10" && suite != "chisq" && suite != "azuma") {
    fmt::print(stderr, "unknown suite '{}'\n", suite);
    return 1;
  }
  const VerifyFixtures fx = make_fixtures();
  std::vector<CheckResult> results;
  auto n_trials = [&](long long dflt) { return trials > 0 ? trials : dflt; };

  if (all || suite == "lemma1") {
    results.push_back(CheckResult::from_rate_bound(
        "eigenvalue_sandwich_quartic", "Lemma 1",
        eig_sandwich_check(fx.quartic.objective, fx.quartic.mixing,
                           static_cast<int>(n_trials(1000)), seed)));
    results.push_back(CheckResult::from_rate_bound(
        "eigenvalue_sandwich_logistic", "Lemma 1",
        eig_sandwich_check(fx.logistic.objective, fx.logistic.mixing,
                           static_cast<int>(n_trials(1000)), seed + 1)));
  }
  if (all || suite == "lemma3" || suite == "lemma7") {
    Schedule sched;
    try {
      const Eigen::VectorXd origin =
          Eigen::VectorXd::Zero(fx.quartic.objective.m * 2);
      sched = build_schedule(rho, fx.quartic.objective.constants,
                             fx.quartic.mixing, fx.quartic.objective.m, 2,
                             F_value(fx.quartic.objective, origin),
                             fx.quartic.objective.constants.f_star_sum);
    } catch (const ScheduleInfeasible& e) {
      fmt::print(stderr, "schedule infeasible: {}\n", e.what());
      return 1;
    }
    if (all || suite == "lemma3") {
      results.push_back(CheckResult::from_rate_bound(
          "consensus_error_bound", "Lemma 3",
          consensus_bound_trial(fx.quartic.objective, fx.quartic.mixing,
                                sched, 50, static_cast<int>(n_trials(2000)),
                                seed + 2)));
      // Identical components and zero noise: the bound must hold in every
      // trial, not merely with high probability.
      ObjectiveSet identical = make_quartic(
          std::vector<std::array<double, 4>>(20, {1.0, 1.0, 1.0, -1.0}));
      identical.constants = estimate_constants(
          identical, Box::cube(2, 2.0), 2000, 99);
      Schedule quiet = build_schedule(
          rho, identical.constants, fx.quartic.mixing, 20, 2,
          F_value(identical, Eigen::VectorXd::Zero(40)),
          identical.constants.f_star_sum);
      quiet.sigma = 0.0;
      auto stats =
          consensus_bound_trial(identical, fx.quartic.mixing, quiet, 50,
                                static_cast<int>(n_trials(2000)), seed + 3);
      stats.bound_probability = 1.0;  // deterministic: must hold in every trial
      results.push_back(CheckResult::from_rate_bound(
          "consensus_error_bound_noiseless", "Lemma 3 (deterministic case)",
          stats));
    }
    if (all || suite == "lemma7") {
      results.push_back(CheckResult::from_rate_bound(
          "accumulated_descent_bound", "Lemma 7",
          descent_bound_trial(fx.quartic.objective, fx.quartic.mixing, sched,
                              100, static_cast<int>(n_trials(2000)),
                              seed + 4)));
      Schedule quiet = sched;
      quiet.sigma = 0.0;
      auto stats = descent_bound_trial(fx.quartic.objective,
                                       fx.quartic.mixing, quiet, 100,
                                       static_cast<int>(n_trials(2000)),
                                       seed + 5);
      stats.bound_probability = 1.0;
      results.push_back(CheckResult::from_rate_bound(
          "accumulated_descent_bound_noiseless", "Lemma 7 (pure descent)",
          stats));
    }
  }
  if (all || suite == "lemma10") {
    const ObjectiveSet& q = fx.quartic.objective;
    Eigen::VectorXd near_saddle(q.m * 2);
    for (int i = 0; i < q.m; ++i)
      near_saddle.segment(i * 2, 2) = Eigen::Vector2d(1e-3, 1e-3);
    const CouplingPair pair = evolve_coupling(q, fx.quartic.mixing, 0.05,
                                              0.05, near_saddle, 50, seed);
    results.push_back(CheckResult::from_residual(
        "coupling_decomposition_quartic", "Lemma 10",
        decomposition_check(pair, q, fx.quartic.mixing, 0.05, 3), 1e-9));

    std::vector<Eigen::MatrixXd> A(5, (Eigen::MatrixXd(2, 2) << 2.0, 0.3,
                                       0.3, 1.0)
                                          .finished());
    std::vector<Eigen::VectorXd> centers(5, Eigen::Vector2d(0.2, -0.1));
    const ObjectiveSet quad = make_quadratic(A, centers);
    const CouplingPair qpair =
        evolve_coupling(quad, fx.logistic.mixing, 0.05, 0.05,
                        Eigen::VectorXd::Zero(10), 50, seed + 1);
    results.push_back(CheckResult::from_residual(
        "coupling_decomposition_constant_hessian", "Lemma 10",
        decomposition_check(qpair, quad, fx.logistic.mixing, 0.05, 1),
        1e-11));

    const ObjectiveSet& lg = fx.logistic.objective;
    Eigen::VectorXd l0(lg.m * 2);
    for (int i = 0; i < lg.m; ++i)
      l0.segment(i * 2, 2) = Eigen::Vector2d(1e-3, -1e-3);
    const CouplingPair lpair = evolve_coupling(lg, fx.logistic.mixing, 0.05,
                                               0.05, l0, 50, seed + 2);
    results.push_back(CheckResult::from_residual(
        "coupling_decomposition_logistic", "Lemma 10",
        decomposition_check(lpair, lg, fx.logistic.mixing, 0.05, 32), 1e-6));
  }
  if (all || suite == "chisq") {
    int idx = 0;
    for (int D : {1, 40}) {
      for (double x : {3.0, 5.0}) {
        const auto tails =
            chi_square_tail_check(D, x, n_trials(1000000), seed + 10 + idx);
        results.push_back(CheckResult::from_tail_bound(
            fmt::format("chi_square_upper_tail_D{}_x{}", D, x),
            "Proposition 3", tails.upper));
        results.push_back(CheckResult::from_tail_bound(
            fmt::format("chi_square_lower_tail_D{}_x{}", D, x),
            "Proposition 3", tails.lower));
        ++idx;
      }
    }
  }
  if (all || suite == "azuma") {
    results.push_back(CheckResult::from_tail_bound(
        "azuma_bounded_increments", "Proposition 6",
        relaxed_azuma_trial(plus_minus_one_process(100), 30.0,
                            n_trials(1000000), seed + 20)));
    results.push_back(CheckResult::from_tail_bound(
        "azuma_rare_jumps", "Proposition 6",
        relaxed_azuma_trial(rare_jump_process(100, 100.0, 1e-3), 85.0,
                            n_trials(1000000), seed + 21)));
  }

  fmt::print("{:<42} {:>10} {:>12} {:>12} {:>8}\n", "check", "trials",
             "empirical", "bound", "verdict");
  bool any_fail = false;
  for (const auto& r : results) {
    fmt::print("{:<42} {:>10} {:>12.6g} {:>12.6g} {:>8}\n", r.check_name,
               r.trials, r.empirical_rate, r.bound, r.verdict);
    any_fail = any_fail || r.verdict == "fail";
  }
  std::ofstream out(report_path);
  out << report_to_json(results);
  return any_fail ? 1 : 0;
}

int cmd_schedule(double rho,
                 const std::optional<std::filesystem::path>& config_path) {
  ExperimentConfig cfg;
  try {
    if (config_path) cfg = parse_config_file(*config_path);
  } catch (const std::exception& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return 2;
  }
  Instance inst = build_instance(cfg);
  const ObjectiveSet& obj = inst.objective;
  const Eigen::Vector2d p0 = cfg.init_point();
  Eigen::VectorXd x0(obj.m * obj.n);
  for (int i = 0; i < obj.m; ++i) x0.segment(i * obj.n, obj.n) = p0;
  const double Q0 = F_value(obj, x0);  // consensual start: penalty vanishes

  auto print_row = [&](double r) -> bool {
    try {
      const Schedule s = build_schedule(r, obj.constants, inst.mixing, obj.m,
                                        obj.n, Q0, obj.constants.f_star_sum);
      fmt::print("{:>8.6g} {:>12.6g} {:>12.6g} {:>12.6g} {:>10.6g} "
                 "{:>10.6g} {:>12} {:>10.6g} {:>10.3f} {:>9}\n",
                 r, s.alpha, s.sigma, s.zeta, s.eps_g, s.eps_H, s.r, s.d,
                 s.log10_K, "feasible");
      return true;
    } catch (const ScheduleInfeasible& e) {
      fmt::print("{:>8.6g} {:>12} {:>12} {:>12} {:>10} {:>10} {:>12} "
                 "{:>10} {:>10} {:>9} (need rho > {:.4g})\n",
                 r, "-", "-", "-", "-", "-", "-", "-", "-", "infeasible",
                 e.required_rho);
      return false;
    }
  };

  fmt::print("lambda_min = {:.6g}, lambda_2 = {:.6g}, L_g = {:.6g}, "
             "L_H = {:.6g}, D = {:.6g}\n",
             inst.mixing.lambda_min, inst.mixing.lambda_2, obj.constants.L_g,
             obj.constants.L_H, obj.constants.D);
  fmt::print("{:>8} {:>12} {:>12} {:>12} {:>10} {:>10} {:>12} {:>10} "
             "{:>10} {:>9}\n",
             "rho", "alpha", "sigma", "zeta", "eps_g", "eps_H", "r", "d",
             "log10_K", "status");
  const bool ok = print_row(rho);
  for (double r : {1.0, 4.0, 16.0, 64.0, 256.0}) {
    if (r != rho) print_row(r);
  }
  return ok ? 0 : 2;
}

}  // namespace ndgd
