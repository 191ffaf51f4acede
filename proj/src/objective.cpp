// Copyright 2026. MIT license.
#include "ndgd/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ndgd {
namespace {

// Stable log(1 + exp(u)).
double log1pexp(double u) {
  if (u > 35.0) return u;
  return std::log1p(std::exp(u));
}

// Logistic sigmoid 1 / (1 + exp(u)) evaluated without overflow.
double inv_logit(double u) {
  if (u >= 0.0) {
    const double e = std::exp(-u);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(u));
}

double spectral_norm(const Eigen::MatrixXd& A) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// Newton refinement of a stationary point of f = sum_i f_i.
Eigen::VectorXd refine_stationary(const ObjectiveSet& obj, Eigen::VectorXd x,
                                  int iters = 60) {
  for (int it = 0; it < iters; ++it) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(obj.n);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(obj.n, obj.n);
    for (int i = 0; i < obj.m; ++i) {
      g += obj.grad(i, x);
      H += obj.hess(i, x);
    }
    if (g.norm() < 1e-12) break;
    Eigen::VectorXd step = H.fullPivLu().solve(g);
    if (!step.allFinite()) break;
    x -= step;
  }
  return x;
}

}  // namespace

Eigen::VectorXd Box::sample(Rng& rng) const {
  Eigen::VectorXd x(lo.size());
  for (Eigen::Index i = 0; i < lo.size(); ++i)
    x(i) = rng.uniform(lo(i), hi(i));
  return x;
}

Eigen::VectorXd av(const Eigen::VectorXd& xhat, int m, int n) {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i) mean += xhat.segment(i * n, n);
  return mean / m;
}

double consensus_error(const Eigen::VectorXd& xhat, int m, int n) {
  const Eigen::VectorXd mean = av(xhat, m, n);
  double sq = 0.0;
  for (int i = 0; i < m; ++i)
    sq += (xhat.segment(i * n, n) - mean).squaredNorm();
  return std::sqrt(sq);
}

FEval F_eval(const ObjectiveSet& obj, const Eigen::VectorXd& xhat,
             bool with_hessian) {
  FEval out;
  out.grad.resize(obj.m * obj.n);
  if (with_hessian) out.hess_blocks.reserve(obj.m);
  for (int i = 0; i < obj.m; ++i) {
    const Eigen::VectorXd xi = xhat.segment(i * obj.n, obj.n);
    out.value += obj.value(i, xi);
    out.grad.segment(i * obj.n, obj.n) = obj.grad(i, xi);
    if (with_hessian) out.hess_blocks.push_back(obj.hess(i, xi));
  }
  return out;
}

double F_value(const ObjectiveSet& obj, const Eigen::VectorXd& xhat) {
  double v = 0.0;
  for (int i = 0; i < obj.m; ++i)
    v += obj.value(i, xhat.segment(i * obj.n, obj.n));
  return v;
}

Eigen::VectorXd F_grad(const ObjectiveSet& obj, const Eigen::VectorXd& xhat) {
  Eigen::VectorXd g(obj.m * obj.n);
  for (int i = 0; i < obj.m; ++i)
    g.segment(i * obj.n, obj.n) = obj.grad(i, xhat.segment(i * obj.n, obj.n));
  return g;
}

// Applies (I - W) (x) I_n blockwise; the m*n x m*n Kronecker lift is never
// formed.
static Eigen::VectorXd apply_I_minus_W(const MixingMatrix& W,
                                       const Eigen::VectorXd& xhat, int n) {
  const int m = W.m();
  Eigen::VectorXd out(m * n);
  for (int i = 0; i < m; ++i) {
    Eigen::VectorXd mixed = xhat.segment(i * n, n);
    for (int j = 0; j < m; ++j)
      mixed -= W.W(i, j) * xhat.segment(j * n, n);
    out.segment(i * n, n) = mixed;
  }
  return out;
}

double Q_value(const ObjectiveSet& obj, const MixingMatrix& W, double alpha,
               const Eigen::VectorXd& xhat) {
  if (alpha <= 0.0) throw std::invalid_argument("alpha must be positive");
  const Eigen::VectorXd pen = apply_I_minus_W(W, xhat, obj.n);
  return F_value(obj, xhat) + 0.5 / alpha * xhat.dot(pen);
}

Eigen::VectorXd Q_grad(const ObjectiveSet& obj, const MixingMatrix& W,
                       double alpha, const Eigen::VectorXd& xhat) {
  if (alpha <= 0.0) throw std::invalid_argument("alpha must be positive");
  return F_grad(obj, xhat) + apply_I_minus_W(W, xhat, obj.n) / alpha;
}

Eigen::MatrixXd Q_hessian(const ObjectiveSet& obj, const MixingMatrix& W,
                          double alpha, const Eigen::VectorXd& xhat) {
  const int m = obj.m, n = obj.n;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m * n, m * n);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < m; ++i) {
    H.block(i * n, i * n, n, n) =
        obj.hess(i, xhat.segment(i * n, n)) + (1.0 - W.W(i, i)) / alpha * eye;
    for (int j = 0; j < m; ++j) {
      if (j == i) continue;
      if (W.W(i, j) != 0.0)
        H.block(i * n, j * n, n, n) = -W.W(i, j) / alpha * eye;
    }
  }
  return H;
}

QEval Q_eval(const ObjectiveSet& obj, const MixingMatrix& W, double alpha,
             const Eigen::VectorXd& xhat, bool with_hessian_eig) {
  QEval out;
  out.value = Q_value(obj, W, alpha, xhat);
  out.grad = Q_grad(obj, W, alpha, xhat);
  if (with_hessian_eig) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        Q_hessian(obj, W, alpha, xhat));
    out.lambda_min_hess = es.eigenvalues()(0);
  }
  return out;
}

Eigen::VectorXd gradient_sum(const ObjectiveSet& obj,
                             const Eigen::VectorXd& xhat) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(obj.n);
  for (int i = 0; i < obj.m; ++i)
    g += obj.grad(i, xhat.segment(i * obj.n, obj.n));
  return g;
}

Eigen::MatrixXd hessian_sum(const ObjectiveSet& obj,
                            const Eigen::VectorXd& xhat) {
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(obj.n, obj.n);
  for (int i = 0; i < obj.m; ++i)
    H += obj.hess(i, xhat.segment(i * obj.n, obj.n));
  return H;
}

ObjectiveSet make_quartic(const std::vector<std::array<double, 4>>& coeffs,
                          double box_half_width) {
  const int m = static_cast<int>(coeffs.size());
  if (m < 1) throw std::invalid_argument("need at least one component");
  double sa = 0.0, sb = 0.0, sc = 0.0, sd = 0.0;
  for (const auto& [a, b, c, d] : coeffs) {
    sa += a;
    sb += b;
    sc += c;
    sd += d;
  }
  if (sa <= 0.0 || sb <= 0.0 || sc <= 0.0 || sd >= 0.0)
    throw std::invalid_argument(
        "quartic sign conditions violated: need sum(a),sum(b),sum(c)>0 and "
        "sum(d)<0");

  ObjectiveSet obj;
  obj.m = m;
  obj.n = 2;
  const double md = static_cast<double>(m);
  for (const auto& [a, b, c, d] : coeffs) {
    Component comp;
    comp.value = [=](const Eigen::VectorXd& t) {
      const double t1 = t(0), t2 = t(1);
      return (a * t1 * t1 * t1 * t1 + b * t1 * t1 + c * t2 * t2 * t2 * t2 +
              d * t2 * t2) /
             md;
    };
    comp.grad = [=](const Eigen::VectorXd& t) {
      Eigen::VectorXd g(2);
      g(0) = (4.0 * a * t(0) * t(0) * t(0) + 2.0 * b * t(0)) / md;
      g(1) = (4.0 * c * t(1) * t(1) * t(1) + 2.0 * d * t(1)) / md;
      return g;
    };
    comp.hess = [=](const Eigen::VectorXd& t) {
      Eigen::MatrixXd H = Eigen::MatrixXd::Zero(2, 2);
      H(0, 0) = (12.0 * a * t(0) * t(0) + 2.0 * b) / md;
      H(1, 1) = (12.0 * c * t(1) * t(1) + 2.0 * d) / md;
      return H;
    };
    obj.components.push_back(std::move(comp));
  }

  const double t2_star = std::sqrt(-sd / (2.0 * sc));
  obj.minimizer_set = {Eigen::Vector2d(0.0, t2_star),
                       Eigen::Vector2d(0.0, -t2_star)};

  double f_star_sum = 0.0;
  for (const auto& [a, b, c, d] : coeffs) {
    // Per-component minimum: th1 sits at 0 when b >= 0, else at the quartic
    // well; same for th2 with (c, d).
    auto axis_min = [&](double p4, double p2) {
      if (p2 >= 0.0) return 0.0;
      return -p2 * p2 / (4.0 * p4) / md;
    };
    f_star_sum += axis_min(a, b) + axis_min(c, d);
  }
  obj.constants.f_star_sum = f_star_sum;
  obj.constants.domain_box = Box::cube(2, box_half_width);
  return obj;
}

std::vector<std::array<double, 4>> sample_quartic_coeffs(int m,
                                                         std::uint64_t seed) {
  Rng rng = Rng::stream(seed, 0);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<std::array<double, 4>> coeffs(m);
    double sa = 0.0, sb = 0.0, sc = 0.0, sd = 0.0;
    for (auto& c : coeffs) {
      c = {rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.5),
           rng.uniform(0.5, 1.5), rng.uniform(-1.5, -0.5)};
      sa += c[0];
      sb += c[1];
      sc += c[2];
      sd += c[3];
    }
    if (sa > 0.0 && sb > 0.0 && sc > 0.0 && sd < 0.0) return coeffs;
  }
  throw std::runtime_error("quartic coefficient sampling failed");
}

ObjectiveSet make_logistic(const LogisticData& data, double eta,
                           double box_half_width) {
  if (eta <= 0.0) throw std::invalid_argument("eta must be positive");
  if (data.x.size() != data.y.size() || data.x.empty())
    throw std::invalid_argument("inconsistent logistic data");
  const int m = static_cast<int>(data.x.size());
  const double md = static_cast<double>(m);

  ObjectiveSet obj;
  obj.m = m;
  obj.n = 2;
  for (int i = 0; i < m; ++i) {
    const double x = data.x[i], y = data.y[i];
    Component comp;
    comp.value = [=](const Eigen::VectorXd& v) {
      const double u = y * v(0) * v(1) * x;
      return (log1pexp(-u) + 0.5 * eta * v.squaredNorm()) / md;
    };
    comp.grad = [=](const Eigen::VectorXd& v) {
      const double u = y * v(0) * v(1) * x;
      const double s = inv_logit(u);  // 1/(1+exp(u))
      Eigen::VectorXd g(2);
      g(0) = (eta * v(0) - y * x * v(1) * s) / md;
      g(1) = (eta * v(1) - y * x * v(0) * s) / md;
      return g;
    };
    comp.hess = [=](const Eigen::VectorXd& v) {
      const double u = y * v(0) * v(1) * x;
      const double s = inv_logit(u);
      const double sp = s * (1.0 - s);
      Eigen::MatrixXd H(2, 2);
      H(0, 0) = (eta + x * x * v(1) * v(1) * sp) / md;
      H(1, 1) = (eta + x * x * v(0) * v(0) * sp) / md;
      H(0, 1) = H(1, 0) = (-y * x * s + x * x * v(0) * v(1) * sp) / md;
      return H;
    };
    obj.components.push_back(std::move(comp));
  }
  obj.constants.domain_box = Box::cube(2, box_half_width);

  // Minimizers of the sum: grid search over the box, Newton refinement,
  // positive-definiteness filter, dedupe. The landscape has exactly two for
  // saddle-admitting data (symmetric under joint sign flip).
  const int grid = 61;
  double best = std::numeric_limits<double>::infinity();
  std::vector<Eigen::VectorXd> candidates;
  auto f_val = [&](const Eigen::VectorXd& v) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += obj.value(i, v);
    return s;
  };
  std::vector<std::pair<double, Eigen::VectorXd>> cells;
  for (int a = 0; a < grid; ++a) {
    for (int b = 0; b < grid; ++b) {
      Eigen::VectorXd v(2);
      v(0) = -box_half_width + 2.0 * box_half_width * a / (grid - 1);
      v(1) = -box_half_width + 2.0 * box_half_width * b / (grid - 1);
      cells.emplace_back(f_val(v), v);
    }
  }
  std::sort(cells.begin(), cells.end(),
            [](const auto& p, const auto& q) { return p.first < q.first; });
  for (std::size_t c = 0; c < std::min<std::size_t>(cells.size(), 40); ++c) {
    Eigen::VectorXd v = refine_stationary(obj, cells[c].second);
    if (!v.allFinite()) continue;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(2);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(2, 2);
    for (int i = 0; i < m; ++i) {
      g += obj.grad(i, v);
      H += obj.hess(i, v);
    }
    if (g.norm() >= 1e-9) continue;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    if (es.eigenvalues()(0) <= 0.0) continue;
    bool dup = false;
    for (const auto& w : candidates)
      if ((w - v).norm() < 1e-4) dup = true;
    if (!dup) candidates.push_back(v);
    best = std::min(best, f_val(v));
  }
  obj.minimizer_set = candidates;

  // Per-component minima, same machinery applied to single components.
  double f_star_sum = 0.0;
  for (int i = 0; i < m; ++i) {
    ObjectiveSet single;
    single.m = 1;
    single.n = 2;
    single.components.push_back(obj.components[i]);
    double comp_best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < std::min<std::size_t>(cells.size(), 400);
         c += 10) {
      Eigen::VectorXd v = refine_stationary(single, cells[c].second, 40);
      if (v.allFinite() && v.cwiseAbs().maxCoeff() < 4.0 * box_half_width)
        comp_best = std::min(comp_best, obj.value(i, v));
    }
    comp_best = std::min(comp_best, obj.value(i, Eigen::Vector2d(0, 0)));
    f_star_sum += comp_best;
  }
  obj.constants.f_star_sum = f_star_sum;
  return obj;
}

LogisticData sample_logistic_data(int m, double eta, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, 0);
  LogisticData data;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    data.x.assign(m, 0.0);
    data.y.assign(m, 0.0);
    double coupling = 0.0;
    for (int i = 0; i < m; ++i) {
      data.y[i] = rng.uniform() < 0.5 ? -1.0 : 1.0;
      data.x[i] = data.y[i] + rng.normal();
      coupling += data.y[i] * data.x[i];
    }
    // Origin is a strict saddle when the coupling term in the Hessian sum
    // exceeds the ridge weight; require 10% margin so the escape direction
    // is numerically unambiguous.
    if (coupling / (2.0 * m) > 1.1 * eta) {
      data.resamples = attempt;
      return data;
    }
  }
  throw std::runtime_error("logistic data sampling failed to find a saddle");
}

ObjectiveSet make_quadratic(const std::vector<Eigen::MatrixXd>& A,
                            const std::vector<Eigen::VectorXd>& centers,
                            double box_half_width) {
  if (A.empty() || A.size() != centers.size())
    throw std::invalid_argument("inconsistent quadratic data");
  ObjectiveSet obj;
  obj.m = static_cast<int>(A.size());
  obj.n = static_cast<int>(centers[0].size());
  for (int i = 0; i < obj.m; ++i) {
    const Eigen::MatrixXd Ai = A[i];
    const Eigen::VectorXd ci = centers[i];
    Component comp;
    comp.value = [=](const Eigen::VectorXd& x) {
      return 0.5 * (x - ci).dot(Ai * (x - ci));
    };
    comp.grad = [=](const Eigen::VectorXd& x) {
      return Eigen::VectorXd(Ai * (x - ci));
    };
    comp.hess = [=](const Eigen::VectorXd&) { return Ai; };
    obj.components.push_back(std::move(comp));
  }
  obj.constants.domain_box = Box::cube(obj.n, box_half_width);
  return obj;
}

RegularityConstants estimate_constants(const ObjectiveSet& obj, const Box& box,
                                       int samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("need at least one sample");
  Rng rng = Rng::stream(seed, 1);
  double Lg = 0.0, LH = 0.0, D = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Eigen::VectorXd x = box.sample(rng);
    const Eigen::VectorXd y = box.sample(rng);
    const double dxy = (x - y).norm();
    for (int i = 0; i < obj.m; ++i) {
      const Eigen::VectorXd gx = obj.grad(i, x);
      const Eigen::MatrixXd Hx = obj.hess(i, x);
      if (dxy > 1e-12) {
        Lg = std::max(Lg, (gx - obj.grad(i, y)).norm() / dxy);
        LH = std::max(LH, spectral_norm(Hx - obj.hess(i, y)) / dxy);
      }
      Lg = std::max(Lg, spectral_norm(Hx));
      for (int j = i + 1; j < obj.m; ++j)
        D = std::max(D, (gx - obj.grad(j, x)).norm());
    }
  }
  RegularityConstants out;
  out.L_g = std::max(1.5 * Lg, 1e-12);
  out.L_H = std::max(1.5 * LH, 1e-12);
  out.D = std::max(1.5 * D, 1e-12);
  out.f_star_sum = obj.constants.f_star_sum;
  out.domain_box = box;
  return out;
}

}  // namespace ndgd
