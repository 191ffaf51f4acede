// Copyright 2026. MIT license.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ndgd/analysis.hpp"

using namespace ndgd;

namespace {

ObjectiveSet quartic20() {
  ObjectiveSet obj = make_quartic(sample_quartic_coeffs(20, 42));
  obj.constants = estimate_constants(obj, Box::cube(2, 2.0), 2000, 1);
  return obj;
}

MixingMatrix complete20() {
  return lazy_metropolis_mixing(make_complete_graph(20));
}

}  // namespace

TEST_CASE("wilson interval") {
  const auto mid = wilson95(50, 100);
  CHECK(mid.low > 0.40);
  CHECK(mid.high < 0.60);
  CHECK(mid.low < 0.5);
  CHECK(mid.high > 0.5);
  // Degenerate endpoints stay inside [0, 1] and pin to the boundary when
  // every trial agrees.
  CHECK(wilson95(0, 100).low <= 1e-15);
  CHECK(wilson95(100, 100).high == 1.0);
  CHECK(wilson95(100, 100).low > 0.95);
  CHECK_THROWS_AS(wilson95(0, 0), std::invalid_argument);
}

TEST_CASE("parallel trial counting is deterministic") {
  auto fn = [](long long i) { return (i * 2654435761ull) % 7 == 0; };
  const long long a = parallel_success_count(100000, fn);
  const long long b = parallel_success_count(100000, fn);
  CHECK(a == b);
  long long serial = 0;
  for (long long i = 0; i < 100000; ++i)
    if (fn(i)) ++serial;
  CHECK(a == serial);
}

TEST_CASE("eigenvalue sandwich") {
  const ObjectiveSet obj = quartic20();
  const MixingMatrix mix = complete20();
  SUBCASE("holds on every random trial") {
    const TrialStats stats = eig_sandwich_check(obj, mix, 300, 7);
    CHECK(stats.successes == stats.trials);
  }
  SUBCASE("penalty vanishes as alpha grows") {
    Rng rng(3);
    Eigen::VectorXd x(40);
    for (int i = 0; i < 40; ++i) x(i) = rng.uniform(-2.0, 2.0);
    double lmin_F = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 20; ++i) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
          obj.hess(i, x.segment(i * 2, 2)));
      lmin_F = std::min(lmin_F, es.eigenvalues()(0));
    }
    double prev_gap = std::numeric_limits<double>::infinity();
    for (double alpha : {1.0, 10.0, 100.0}) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
          Q_hessian(obj, mix, alpha, x));
      const double gap = es.eigenvalues()(0) - lmin_F;
      CHECK(gap >= -1e-10);
      CHECK(gap <= prev_gap + 1e-12);
      prev_gap = gap;
    }
    CHECK(prev_gap < 0.05);
  }
}

TEST_CASE("coupling evolution") {
  const ObjectiveSet obj = quartic20();
  const MixingMatrix mix = complete20();
  Eigen::VectorXd x0(40);
  for (int i = 0; i < 20; ++i)
    x0.segment(i * 2, 2) = Eigen::Vector2d(1e-3, 1e-3);

  SUBCASE("mirror invariants hold at every step") {
    const CouplingPair pair = evolve_coupling(obj, mix, 0.05, 0.05, x0, 30, 5);
    CHECK(pair.y[0] == pair.z[0]);
    for (const auto& dn : pair.delta_noise) {
      // Noise difference lies in span(e_alpha)...
      const Eigen::VectorXd residual =
          dn - pair.e_alpha.dot(dn) * pair.e_alpha;
      CHECK(residual.norm() <= 1e-12);
    }
    // ...and the first difference is exactly -alpha * noise difference.
    CHECK((pair.delta[1] + 0.05 * pair.delta_noise[0]).norm() <= 1e-15);
  }
  SUBCASE("same seed reproduces the pair exactly") {
    const CouplingPair a = evolve_coupling(obj, mix, 0.05, 0.05, x0, 10, 6);
    const CouplingPair b = evolve_coupling(obj, mix, 0.05, 0.05, x0, 10, 6);
    for (size_t k = 0; k < a.y.size(); ++k) {
      CHECK(a.y[k] == b.y[k]);
      CHECK(a.z[k] == b.z[k]);
    }
  }
  SUBCASE("zero noise keeps the pair identical") {
    const CouplingPair pair = evolve_coupling(obj, mix, 0.05, 0.0, x0, 20, 7);
    for (const auto& d : pair.delta) CHECK(d.norm() == 0.0);
  }
}

TEST_CASE("gauss-legendre nodes") {
  SUBCASE("low orders match the classical values") {
    const auto one = gauss_legendre_01(1);
    CHECK(one[0].first == doctest::Approx(0.5));
    CHECK(one[0].second == doctest::Approx(1.0));
    const auto two = gauss_legendre_01(2);
    CHECK(two[0].first ==
          doctest::Approx(0.5 - 0.5 / std::sqrt(3.0)).epsilon(1e-14));
    CHECK(two[0].second == doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("n nodes integrate polynomials of degree 2n-1 exactly") {
    for (int n : {2, 3, 5}) {
      const auto nodes = gauss_legendre_01(n);
      for (int deg = 0; deg <= 2 * n - 1; ++deg) {
        double acc = 0.0;
        for (const auto& [s, w] : nodes) acc += w * std::pow(s, deg);
        CHECK(acc == doctest::Approx(1.0 / (deg + 1)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("coupling decomposition identity") {
  const ObjectiveSet obj = quartic20();
  const MixingMatrix mix = complete20();
  Eigen::VectorXd x0(40);
  for (int i = 0; i < 20; ++i)
    x0.segment(i * 2, 2) = Eigen::Vector2d(1e-3, 1e-3);

  SUBCASE("quartic with 3 nodes is exact to roundoff") {
    const CouplingPair pair = evolve_coupling(obj, mix, 0.05, 0.05, x0, 50, 9);
    CHECK(decomposition_check(pair, obj, mix, 0.05, 3) < 1e-9);
  }
  SUBCASE("constant Hessian with a single node") {
    std::vector<Eigen::MatrixXd> A(
        5, (Eigen::MatrixXd(2, 2) << 2.0, 0.3, 0.3, 1.0).finished());
    std::vector<Eigen::VectorXd> centers(5, Eigen::Vector2d(0.2, -0.1));
    const ObjectiveSet quad = make_quadratic(A, centers);
    const MixingMatrix ring =
        lazy_metropolis_mixing(build_regular_graph(5, 2, 1));
    const CouplingPair pair = evolve_coupling(
        quad, ring, 0.05, 0.05, Eigen::VectorXd::Zero(10), 50, 10);
    CHECK(decomposition_check(pair, quad, ring, 0.05, 1) < 1e-11);
  }
  SUBCASE("doubling nodes on a smooth non-polynomial objective converges") {
    const ObjectiveSet lg = make_logistic(sample_logistic_data(5, 0.1, 42),
                                          0.1);
    const MixingMatrix ring =
        lazy_metropolis_mixing(build_regular_graph(5, 2, 1));
    Eigen::VectorXd l0(10);
    for (int i = 0; i < 5; ++i)
      l0.segment(i * 2, 2) = Eigen::Vector2d(1e-3, -1e-3);
    const CouplingPair pair = evolve_coupling(lg, ring, 0.05, 0.05, l0, 50,
                                              11);
    const double r8 = decomposition_check(pair, lg, ring, 0.05, 8);
    const double r32 = decomposition_check(pair, lg, ring, 0.05, 32);
    CHECK(r32 <= r8 + 1e-12);
    CHECK(r32 < 1e-6);
  }
}

TEST_CASE("consensus and descent bounds at small scale") {
  ObjectiveSet obj = quartic20();
  const MixingMatrix mix = complete20();
  const Schedule sched = build_schedule(6.0, obj.constants, mix, 20, 2,
                                        F_value(obj, Eigen::VectorXd::Zero(40)),
                                        obj.constants.f_star_sum);
  SUBCASE("consensus bound holds at the guaranteed rate") {
    const TrialStats stats =
        consensus_bound_trial(obj, mix, sched, 50, 200, 12);
    CHECK(stats.bound_probability ==
          doctest::Approx(1.0 - 50.0 * std::exp(-6.0)));
    CHECK(stats.empirical_rate >= stats.bound_probability);
  }
  SUBCASE("bound holds across a range of rho") {
    for (double rho : {4.0, 6.0, 8.0}) {
      const Schedule s = build_schedule(rho, obj.constants, mix, 20, 2,
                                        F_value(obj,
                                                Eigen::VectorXd::Zero(40)),
                                        obj.constants.f_star_sum);
      const TrialStats stats = consensus_bound_trial(obj, mix, s, 50, 200, 13);
      CHECK(stats.wilson.high >= stats.bound_probability);
    }
  }
  SUBCASE("descent bound holds and is deterministic without noise") {
    const TrialStats noisy =
        descent_bound_trial(obj, mix, sched, 100, 200, 14);
    CHECK(noisy.wilson.high >= noisy.bound_probability);
    Schedule quiet = sched;
    quiet.sigma = 0.0;
    const TrialStats clean =
        descent_bound_trial(obj, mix, quiet, 100, 200, 15);
    CHECK(clean.successes == clean.trials);
  }
}

TEST_CASE("chi-square tails") {
  SUBCASE("upper and lower tails sit below the exponential bound") {
    const auto tails = chi_square_tail_check(40, 3.0, 200000, 1);
    CHECK(tails.upper.bound_probability == doctest::Approx(std::exp(-3.0)));
    CHECK(tails.upper.empirical_rate <= tails.upper.bound_probability);
    CHECK(tails.lower.empirical_rate <= tails.lower.bound_probability);
    // The bound is loose but not absurd: the upper tail event does happen.
    CHECK(tails.upper.successes > 0);
  }
  SUBCASE("impossible lower-tail event for D=1") {
    const auto tails = chi_square_tail_check(1, 3.0, 10000, 2);
    CHECK(tails.lower.successes == 0);
  }
  SUBCASE("tail verdict is vacuous only when the bound saturates") {
    const auto tails = chi_square_tail_check(5, 1e-9, 1000, 3);
    CHECK(tails.upper.bound_probability > 0.999);
    CHECK(tails.upper.bound_probability < 1.0);
    const auto saturated =
        CheckResult::from_tail_bound("x", "y", make_trial_stats(1, 10, 1.0));
    CHECK(saturated.verdict == "vacuous");
  }
}

TEST_CASE("relaxed azuma tail bound") {
  SUBCASE("zero process") {
    AzumaProcess zero;
    zero.t = 10;
    zero.increment = [](int, Rng&) { return 0.0; };
    zero.sum_sigma2_a2 = 10.0;
    const TrialStats stats = relaxed_azuma_trial(zero, 1.0, 1000, 4);
    CHECK(stats.successes == 0);
  }
  SUBCASE("plus-minus-one random walk") {
    const AzumaProcess walk = plus_minus_one_process(100);
    CHECK(walk.bound(30.0) == doctest::Approx(std::exp(-900.0 / 400.0)));
    const TrialStats stats = relaxed_azuma_trial(walk, 30.0, 100000, 5);
    CHECK(stats.empirical_rate <= walk.bound(30.0));
    CHECK(stats.successes > 0);  // the event is rare, not impossible
  }
  SUBCASE("rare jumps need the additive probability correction") {
    const AzumaProcess jumpy = rare_jump_process(100, 100.0, 1e-3);
    const TrialStats stats = relaxed_azuma_trial(jumpy, 85.0, 200000, 6);
    // Tail is driven by jump events: above the pure exponential part,
    // below the corrected bound.
    const double exp_part = jumpy.bound(85.0) - jumpy.sum_p;
    CHECK(stats.empirical_rate > exp_part);
    CHECK(stats.empirical_rate <= jumpy.bound(85.0));
  }
}

TEST_CASE("distance to a finite set") {
  const std::vector<Eigen::VectorXd> set = {Eigen::Vector2d(0, 1),
                                            Eigen::Vector2d(0, -1)};
  CHECK(distance_to_set(Eigen::Vector2d(0, 1), set) == 0.0);
  CHECK(distance_to_set(Eigen::Vector2d(0, 0), set) == doctest::Approx(1.0));
  CHECK_THROWS_AS(distance_to_set(Eigen::Vector2d(0, 0), {}),
                  std::invalid_argument);
}

TEST_CASE("check verdicts") {
  TrialStats good = make_trial_stats(1990, 2000, 0.9);
  CHECK(CheckResult::from_rate_bound("a", "b", good).verdict == "pass");
  TrialStats bad = make_trial_stats(1500, 2000, 0.9);
  CHECK(CheckResult::from_rate_bound("a", "b", bad).verdict == "fail");
  TrialStats vac = make_trial_stats(1500, 2000, 0.0);
  CHECK(CheckResult::from_rate_bound("a", "b", vac).verdict == "vacuous");
  TrialStats tail = make_trial_stats(10, 2000, 0.05);
  CHECK(CheckResult::from_tail_bound("a", "b", tail).verdict == "pass");
  TrialStats heavy = make_trial_stats(400, 2000, 0.05);
  CHECK(CheckResult::from_tail_bound("a", "b", heavy).verdict == "fail");
  const std::string json = report_to_json(
      {CheckResult::from_rate_bound("name", "ref", good)});
  CHECK(json.find("\"check_name\": \"name\"") != std::string::npos);
  CHECK(json.find("\"paper_ref\": \"ref\"") != std::string::npos);
  CHECK(json.find("\"verdict\": \"pass\"") != std::string::npos);
  CHECK(json.find("\"wilson_low\"") != std::string::npos);
}
