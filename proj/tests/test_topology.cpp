// Copyright 2026. MIT license.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "ndgd/graph.hpp"
#include "ndgd/rng.hpp"

using namespace ndgd;

TEST_CASE("regular graph generator") {
  SUBCASE("20 nodes degree 4 is connected and regular") {
    const Graph g = build_regular_graph(20, 4, 7);
    CHECK(g.m == 20);
    CHECK(check_connected(g));
    for (int d : g.degrees()) CHECK(d == 4);
    for (const auto& [i, j] : g.edges) {
      CHECK(i != j);
      CHECK(i >= 0);
      CHECK(j < 20);
    }
  }
  SUBCASE("5 nodes degree 2 is the cycle") {
    const Graph g = build_regular_graph(5, 2, 1);
    CHECK(check_connected(g));
    for (int d : g.degrees()) CHECK(d == 2);
    CHECK(g.edges.size() == 5);
  }
  SUBCASE("2 nodes degree 1 is the single edge") {
    const Graph g = build_regular_graph(2, 1, 0);
    REQUIRE(g.edges.size() == 1);
    CHECK(g.edges[0] == std::make_pair(0, 1));
  }
  SUBCASE("odd stub count is rejected") {
    CHECK_THROWS_AS(build_regular_graph(5, 3, 0), std::invalid_argument);
  }
  SUBCASE("reproducible per seed") {
    const Graph a = build_regular_graph(20, 4, 123);
    const Graph b = build_regular_graph(20, 4, 123);
    const Graph c = build_regular_graph(20, 4, 124);
    CHECK(a.edges == b.edges);
    CHECK(a.edges != c.edges);
  }
}

TEST_CASE("connectivity") {
  CHECK(check_connected(make_complete_graph(4)));
  CHECK_FALSE(check_connected(Graph{4, {{0, 1}, {2, 3}}}));
  CHECK(check_connected(Graph{5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}}}));
}

TEST_CASE("lazy metropolis mixing") {
  SUBCASE("single edge") {
    const MixingMatrix mix = lazy_metropolis_mixing(make_complete_graph(2));
    CHECK(mix.W(0, 0) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(mix.W(0, 1) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(mix.lambda_min == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(mix.lambda_2 == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("3-cycle") {
    const MixingMatrix mix = lazy_metropolis_mixing(make_complete_graph(3));
    CHECK(mix.W(0, 1) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    CHECK(mix.W(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(mix.lambda_min == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(mix.lambda_2 == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("row sums are exactly 1 and validation passes") {
    for (std::uint64_t seed : {1, 2, 3}) {
      const Graph g = build_regular_graph(12, 4, seed);
      const MixingMatrix mix = lazy_metropolis_mixing(g);
      const Eigen::VectorXd ones = Eigen::VectorXd::Ones(g.m);
      CHECK((mix.W * ones - ones).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((mix.W.transpose() * ones - ones).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK(mix.lambda_min > 0.0);  // lazy halving keeps W positive definite
      CHECK(validate_mixing(mix.W, g).all());
    }
  }
  SUBCASE("disconnected graph is rejected") {
    CHECK_THROWS(lazy_metropolis_mixing(Graph{4, {{0, 1}, {2, 3}}}));
  }
}

TEST_CASE("mixing validation catches bad matrices") {
  const Graph g = build_regular_graph(6, 2, 3);
  SUBCASE("identity fails sparsity and null-space simplicity") {
    const auto rep = validate_mixing(Eigen::MatrixXd::Identity(6, 6), g);
    CHECK_FALSE(rep.sparsity_ok);
    CHECK_FALSE(rep.simple_one_ok);
  }
  SUBCASE("uniform averaging matrix fails sparsity on a sparse graph") {
    const Eigen::MatrixXd J = Eigen::MatrixXd::Constant(6, 6, 1.0 / 6.0);
    CHECK_FALSE(validate_mixing(J, g).sparsity_ok);
  }
  SUBCASE("dimension mismatch is an error") {
    CHECK_THROWS_AS(validate_mixing(Eigen::MatrixXd::Identity(4, 4), g),
                    std::invalid_argument);
  }
}

TEST_CASE("spectral summary") {
  SUBCASE("2x2") {
    Eigen::MatrixXd W(2, 2);
    W << 0.75, 0.25, 0.25, 0.75;
    const auto [lmin, l2] = spectral_summary(W);
    CHECK(lmin == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(l2 == doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("identity keeps multiplicity") {
    const auto [lmin, l2] = spectral_summary(Eigen::MatrixXd::Identity(3, 3));
    CHECK(lmin == doctest::Approx(1.0));
    CHECK(l2 == doctest::Approx(1.0));
  }
}

TEST_CASE("consensus contraction by lambda_2") {
  const Graph g = build_regular_graph(10, 4, 5);
  const MixingMatrix mix = lazy_metropolis_mixing(g);
  const int n = 3;
  Rng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::VectorXd x(g.m * n);
    for (int i = 0; i < g.m * n; ++i) x(i) = rng.uniform(-2.0, 2.0);
    // Project out the consensual component, mix blockwise, compare norms.
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < g.m; ++i) mean += x.segment(i * n, n);
    mean /= g.m;
    Eigen::VectorXd centered = x;
    for (int i = 0; i < g.m; ++i) centered.segment(i * n, n) -= mean;
    Eigen::VectorXd mixed(g.m * n);
    for (int i = 0; i < g.m; ++i) {
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
      for (int j = 0; j < g.m; ++j)
        acc += mix.W(i, j) * centered.segment(j * n, n);
      mixed.segment(i * n, n) = acc;
    }
    CHECK(mixed.norm() <= mix.lambda_2 * centered.norm() + 1e-10);
  }
}

TEST_CASE("serialization round trips") {
  const Graph g = build_regular_graph(8, 3, 11);
  std::stringstream ss;
  save_edge_list(g, ss);
  const Graph back = load_edge_list(ss);
  CHECK(back.m == g.m);
  CHECK(back.edges == g.edges);

  const MixingMatrix mix = lazy_metropolis_mixing(g);
  std::stringstream csv;
  save_matrix_csv(mix.W, csv);
  std::string line;
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == g.m - 1);
  }
  CHECK(rows == g.m);
}
