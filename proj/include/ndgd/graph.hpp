// Copyright 2026. MIT license.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace ndgd {

// Undirected simple graph on m nodes, 0-indexed, edges stored as ordered
// pairs (i < j) with no duplicates.
struct Graph {
  int m = 0;
  std::vector<std::pair<int, int>> edges;

  std::vector<int> degrees() const;
  std::vector<std::vector<int>> adjacency_lists() const;
  bool has_edge(int i, int j) const;
};

// Symmetric doubly stochastic consensus weight matrix with its spectral
// summary. lambda_2 is the second-largest-magnitude eigenvalue (the largest
// eigenvalue is excluded exactly once, multiplicity-aware).
struct MixingMatrix {
  Eigen::MatrixXd W;
  double lambda_min = 0.0;
  double lambda_2 = 0.0;

  int m() const { return static_cast<int>(W.rows()); }
};

struct MixingValidation {
  bool sparsity_ok = false;   // w_ij > 0 iff edge, w_ii > 0, zero elsewhere
  bool symmetry_ok = false;   // W = W^T and rows/cols sum to 1
  bool simple_one_ok = false; // eigenvalue 1 simple with eigenvector 1_m
  bool spectrum_ok = false;   // 0 < lambda_min, lambda_max <= 1 + 1e-12

  bool all() const {
    return sparsity_ok && symmetry_ok && simple_one_ok && spectrum_ok;
  }
};

// Random degree-regular simple connected graph via configuration-model
// pairing with rejection; deterministic per seed. Throws std::invalid_argument
// on infeasible (m, degree) and std::runtime_error when the retry budget
// (10*m attempts) is exhausted.
Graph build_regular_graph(int m, int degree, std::uint64_t seed);

Graph make_complete_graph(int m);

bool check_connected(const Graph& g);

// Metropolis weights m_ij = 1/(1 + max(deg_i, deg_j)) on edges, then the
// lazy step W = (I + M)/2, which shifts the spectrum into (0, 1].
MixingMatrix lazy_metropolis_mixing(const Graph& g);

MixingValidation validate_mixing(const Eigen::MatrixXd& W, const Graph& g);

// (lambda_min, lambda_2) of a symmetric matrix.
std::pair<double, double> spectral_summary(const Eigen::MatrixXd& W);

// Edge-list text: header "m <count>", then one "i j" per line.
void save_edge_list(const Graph& g, std::ostream& out);
Graph load_edge_list(std::istream& in);

// Row-major CSV with 17 significant digits.
void save_matrix_csv(const Eigen::MatrixXd& W, std::ostream& out);

}  // namespace ndgd
