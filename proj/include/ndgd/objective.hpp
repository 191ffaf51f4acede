// Copyright 2026. MIT license.
#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "ndgd/graph.hpp"
#include "ndgd/rng.hpp"

namespace ndgd {

struct Box {
  Eigen::VectorXd lo, hi;

  static Box cube(int n, double half_width) {
    return {Eigen::VectorXd::Constant(n, -half_width),
            Eigen::VectorXd::Constant(n, half_width)};
  }
  Eigen::VectorXd sample(Rng& rng) const;
};

struct RegularityConstants {
  double L_g = 0.0;        // max_i gradient Lipschitz bound on domain_box
  double L_H = 0.0;        // max_i Hessian Lipschitz bound on domain_box
  double D = 0.0;          // max gradient disagreement across components
  double f_star_sum = 0.0; // sum of component minima
  Box domain_box;
};

struct Component {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hess;
};

// Finite sum f = sum_i f_i over R^n, with analytic derivatives per component.
struct ObjectiveSet {
  int m = 0;
  int n = 0;
  std::vector<Component> components;
  RegularityConstants constants;
  std::vector<Eigen::VectorXd> minimizer_set;  // known local minimizers of f

  double value(int i, const Eigen::VectorXd& x) const {
    return components[i].value(x);
  }
  Eigen::VectorXd grad(int i, const Eigen::VectorXd& x) const {
    return components[i].grad(x);
  }
  Eigen::MatrixXd hess(int i, const Eigen::VectorXd& x) const {
    return components[i].hess(x);
  }
};

// Stacked decision vectors live in R^{m*n}; agent i owns entries
// [i*n, (i+1)*n). These helpers keep that convention in one place.
inline Eigen::VectorBlock<const Eigen::VectorXd> agent_block(
    const Eigen::VectorXd& xhat, int i, int n) {
  return xhat.segment(i * n, n);
}

Eigen::VectorXd av(const Eigen::VectorXd& xhat, int m, int n);
double consensus_error(const Eigen::VectorXd& xhat, int m, int n);

struct FEval {
  double value = 0.0;
  Eigen::VectorXd grad;
  std::vector<Eigen::MatrixXd> hess_blocks;  // block-diagonal, never densified
};

FEval F_eval(const ObjectiveSet& obj, const Eigen::VectorXd& xhat,
             bool with_hessian = false);

double F_value(const ObjectiveSet& obj, const Eigen::VectorXd& xhat);
Eigen::VectorXd F_grad(const ObjectiveSet& obj, const Eigen::VectorXd& xhat);

// Penalized objective Q(x) = F(x) + (1/2a) x^T (I - W (x) I_n) x, whose
// gradient-descent iterates coincide with the distributed update.
double Q_value(const ObjectiveSet& obj, const MixingMatrix& W, double alpha,
               const Eigen::VectorXd& xhat);
Eigen::VectorXd Q_grad(const ObjectiveSet& obj, const MixingMatrix& W,
                       double alpha, const Eigen::VectorXd& xhat);
// Dense (m*n)x(m*n) Hessian of Q; assembled only for eigenvalue work.
Eigen::MatrixXd Q_hessian(const ObjectiveSet& obj, const MixingMatrix& W,
                          double alpha, const Eigen::VectorXd& xhat);

struct QEval {
  double value = 0.0;
  Eigen::VectorXd grad;
  double lambda_min_hess = 0.0;
};

QEval Q_eval(const ObjectiveSet& obj, const MixingMatrix& W, double alpha,
             const Eigen::VectorXd& xhat, bool with_hessian_eig = true);

Eigen::VectorXd gradient_sum(const ObjectiveSet& obj,
                             const Eigen::VectorXd& xhat);
Eigen::MatrixXd hessian_sum(const ObjectiveSet& obj,
                            const Eigen::VectorXd& xhat);

// Quartic family on R^2: component i is
//   (1/m) (a th1^4 + b th1^2 + c th2^4 + d th2^2),
// with sum(a), sum(b), sum(c) > 0 and sum(d) < 0 so the sum has a strict
// saddle at the origin and two symmetric minimizers on the th2 axis.
ObjectiveSet make_quartic(const std::vector<std::array<double, 4>>& coeffs,
                          double box_half_width = 2.0);

// a,b,c ~ U(0.5,1.5), d ~ U(-1.5,-0.5); resampled until sign conditions hold.
std::vector<std::array<double, 4>> sample_quartic_coeffs(int m,
                                                         std::uint64_t seed);

struct LogisticData {
  std::vector<double> x;  // features, x_i ~ Normal(y_i, 1)
  std::vector<double> y;  // labels in {-1, +1}
  int resamples = 0;      // draws discarded before the origin was a saddle
};

// Scalar two-layer logistic loss with ridge: component i is
//   (1/m) ln(1 + exp(-y_i v1 v2 x_i)) + (eta/2m) (v1^2 + v2^2),
// decision variable (v1, v2) in R^2.
ObjectiveSet make_logistic(const LogisticData& data, double eta,
                           double box_half_width = 3.0);

// Draws data until the coupling sum(y_i x_i)/(2m) strictly exceeds eta, which
// makes the origin a strict saddle with minimizers on the main diagonal.
LogisticData sample_logistic_data(int m, double eta, std::uint64_t seed);

// Constant-Hessian test instance: component i is 0.5 (x-c_i)^T A_i (x-c_i).
ObjectiveSet make_quadratic(const std::vector<Eigen::MatrixXd>& A,
                            const std::vector<Eigen::VectorXd>& centers,
                            double box_half_width = 2.0);

// Sampled Lipschitz/disagreement constants on a compact box, inflated by a
// 1.5 safety factor; D floored at 1e-12; deterministic per seed. f_star_sum
// is carried over from obj.constants (it is a property of the objective, not
// of the box).
RegularityConstants estimate_constants(const ObjectiveSet& obj, const Box& box,
                                       int samples, std::uint64_t seed);

}  // namespace ndgd
