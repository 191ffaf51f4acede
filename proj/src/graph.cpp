// Copyright 2026. MIT license.
#include "ndgd/graph.hpp"

#include <algorithm>
#include <deque>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "ndgd/rng.hpp"

namespace ndgd {

std::vector<int> Graph::degrees() const {
  std::vector<int> deg(m, 0);
  for (const auto& [i, j] : edges) {
    ++deg[i];
    ++deg[j];
  }
  return deg;
}

std::vector<std::vector<int>> Graph::adjacency_lists() const {
  std::vector<std::vector<int>> adj(m);
  for (const auto& [i, j] : edges) {
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  return adj;
}

bool Graph::has_edge(int i, int j) const {
  if (i > j) std::swap(i, j);
  return std::find(edges.begin(), edges.end(), std::make_pair(i, j)) !=
         edges.end();
}

Graph build_regular_graph(int m, int degree, std::uint64_t seed) {
  if (m < 2) throw std::invalid_argument("need at least 2 agents");
  if (degree < 1 || degree >= m)
    throw std::invalid_argument("degree must be in [1, m)");
  if ((static_cast<long long>(m) * degree) % 2 != 0)
    throw std::invalid_argument("m*degree must be even");

  Rng rng = Rng::stream(seed, 0);
  const int budget = 10 * m;
  for (int attempt = 0; attempt < budget; ++attempt) {
    std::vector<int> stubs;
    stubs.reserve(static_cast<std::size_t>(m) * degree);
    for (int v = 0; v < m; ++v)
      for (int k = 0; k < degree; ++k) stubs.push_back(v);
    for (std::size_t i = stubs.size() - 1; i > 0; --i)
      std::swap(stubs[i], stubs[rng.integer(i + 1)]);

    std::set<std::pair<int, int>> edge_set;
    bool simple = true;
    for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
      int a = stubs[i], b = stubs[i + 1];
      if (a == b) {
        simple = false;
        break;
      }
      if (a > b) std::swap(a, b);
      if (!edge_set.insert({a, b}).second) {
        simple = false;
        break;
      }
    }
    if (!simple) continue;

    Graph g{m, {edge_set.begin(), edge_set.end()}};
    if (check_connected(g)) return g;
  }
  throw std::runtime_error(
      fmt::format("regular graph construction failed after {} attempts",
                  budget));
}

Graph make_complete_graph(int m) {
  Graph g{m, {}};
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) g.edges.emplace_back(i, j);
  return g;
}

bool check_connected(const Graph& g) {
  if (g.m <= 0) return false;
  const auto adj = g.adjacency_lists();
  std::vector<char> seen(g.m, 0);
  std::deque<int> queue{0};
  seen[0] = 1;
  int count = 1;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int u : adj[v]) {
      if (!seen[u]) {
        seen[u] = 1;
        ++count;
        queue.push_back(u);
      }
    }
  }
  return count == g.m;
}

MixingMatrix lazy_metropolis_mixing(const Graph& g) {
  if (!check_connected(g))
    throw std::invalid_argument("mixing matrix requires a connected graph");
  const auto deg = g.degrees();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(g.m, g.m);
  for (const auto& [i, j] : g.edges) {
    const double w = 1.0 / (1.0 + std::max(deg[i], deg[j]));
    M(i, j) = w;
    M(j, i) = w;
  }
  for (int i = 0; i < g.m; ++i) M(i, i) = 1.0 - M.row(i).sum();

  MixingMatrix mix;
  mix.W = 0.5 * (Eigen::MatrixXd::Identity(g.m, g.m) + M);
  std::tie(mix.lambda_min, mix.lambda_2) = spectral_summary(mix.W);
  return mix;
}

MixingValidation validate_mixing(const Eigen::MatrixXd& W, const Graph& g) {
  if (W.rows() != W.cols() || W.rows() != g.m)
    throw std::invalid_argument("mixing matrix dimension mismatch");
  const int m = g.m;
  MixingValidation rep;

  rep.sparsity_ok = true;
  for (int i = 0; i < m && rep.sparsity_ok; ++i) {
    if (W(i, i) <= 0.0) rep.sparsity_ok = false;
    for (int j = i + 1; j < m && rep.sparsity_ok; ++j) {
      if (g.has_edge(i, j)) {
        if (W(i, j) <= 0.0) rep.sparsity_ok = false;
      } else if (std::abs(W(i, j)) > 1e-15) {
        rep.sparsity_ok = false;
      }
    }
  }

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m);
  rep.symmetry_ok = (W - W.transpose()).cwiseAbs().maxCoeff() <= 1e-12 &&
                    (W * ones - ones).cwiseAbs().maxCoeff() <= 1e-12 &&
                    (W.transpose() * ones - ones).cwiseAbs().maxCoeff() <=
                        1e-12;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (W + W.transpose()));
  const Eigen::VectorXd ev = es.eigenvalues();
  int near_one = 0;
  for (int i = 0; i < m; ++i)
    if (std::abs(ev(i) - 1.0) < 1e-10) ++near_one;
  rep.simple_one_ok =
      near_one == 1 && (W * ones - ones).cwiseAbs().maxCoeff() <= 1e-10;

  rep.spectrum_ok = ev(0) > 0.0 && ev(m - 1) <= 1.0 + 1e-12;
  return rep;
}

std::pair<double, double> spectral_summary(const Eigen::MatrixXd& W) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (W + W.transpose()));
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition failed");
  const Eigen::VectorXd ev = es.eigenvalues();  // ascending
  const int m = static_cast<int>(ev.size());
  double lambda2 = 0.0;
  for (int i = 0; i + 1 < m; ++i) lambda2 = std::max(lambda2, std::abs(ev(i)));
  return {ev(0), lambda2};
}

void save_edge_list(const Graph& g, std::ostream& out) {
  out << fmt::format("m {}\n", g.m);
  for (const auto& [i, j] : g.edges) out << fmt::format("{} {}\n", i, j);
}

Graph load_edge_list(std::istream& in) {
  std::string tag;
  Graph g;
  if (!(in >> tag >> g.m) || tag != "m")
    throw std::runtime_error("bad edge list header");
  int i = 0, j = 0;
  while (in >> i >> j) g.edges.emplace_back(i, j);
  return g;
}

void save_matrix_csv(const Eigen::MatrixXd& W, std::ostream& out) {
  for (Eigen::Index i = 0; i < W.rows(); ++i) {
    for (Eigen::Index j = 0; j < W.cols(); ++j) {
      if (j) out << ',';
      out << fmt::format("{:.17g}", W(i, j));
    }
    out << '\n';
  }
}

}  // namespace ndgd
