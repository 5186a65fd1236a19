#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pvc/dvine.hpp"
#include "pvc/quad.hpp"
#include "pvc/rng.hpp"
#include "pvc/stats.hpp"
#include "pvc/svc.hpp"

namespace pvc {

struct IntegrationSpec {
  enum class Method { Quadrature, MonteCarlo };
  Method method = Method::Quadrature;
  int order = 48;
  std::int64_t mc_n = 1'000'000;
  std::uint64_t seed = 1;

  static IntegrationSpec quadrature(int order = 48) {
    IntegrationSpec s;
    s.method = Method::Quadrature;
    s.order = order;
    return s;
  }
  static IntegrationSpec monte_carlo(std::int64_t n = 1'000'000, std::uint64_t seed = 1) {
    IntegrationSpec s;
    s.method = Method::MonteCarlo;
    s.mc_n = n;
    s.seed = seed;
    return s;
  }
  static IntegrationSpec auto_for(int d) {
    return d <= 3 ? quadrature() : monte_carlo();
  }
};

struct KldReport {
  double total = 0.0;
  std::vector<double> per_tree;
  std::string method;
  double error_estimate = 0.0;
};

namespace detail {

// Per-tree sums of log pdf terms along the vine triangle.
inline std::vector<double> tree_log_terms(const DVineSpec& spec, std::span<const double> u) {
  auto t = spec.triangle(u);
  int d = spec.dim();
  std::vector<double> out(d - 1, 0.0);
  for (int j = 1; j < d; ++j)
    for (int i = 1; i + j <= d; ++i)
      out[j - 1] += std::log(spec.edge(i, j).pdf(t.f1[i][j - 1], t.f2[i + j][j - 1],
                                                 u.subspan(i, j - 1)));
  return out;
}

inline std::vector<double> tree_log_terms(const SimplifiedVineSpec& spec,
                                          std::span<const double> u) {
  auto t = spec.triangle(u);
  int d = spec.dim();
  std::vector<double> out(d - 1, 0.0);
  for (int j = 1; j < d; ++j)
    for (int i = 1; i + j <= d; ++i)
      out[j - 1] += std::log(spec.edge(i, j).pdf(t.f1[i][j - 1], t.f2[i + j][j - 1]));
  return out;
}

inline std::vector<double> kld_tree_terms_quadrature(const DVineSpec& dgp,
                                                     const SimplifiedVineSpec& approx,
                                                     int order) {
  int d = dgp.dim();
  auto rule = gauss_legendre(order);
  std::vector<double> acc(d - 1, 0.0);
  std::vector<int> idx(d, 0);
  std::vector<double> u(d);
  while (true) {
    double w = 1.0;
    for (int k = 0; k < d; ++k) {
      u[k] = rule.nodes[idx[k]];
      w *= rule.weights[idx[k]];
    }
    auto lt = tree_log_terms(dgp, u);
    auto la = tree_log_terms(approx, u);
    double logc = 0.0;
    for (double v : lt) logc += v;
    double dens = std::exp(logc);
    for (int j = 0; j < d - 1; ++j) acc[j] += w * dens * (lt[j] - la[j]);
    int k = 0;
    for (; k < d; ++k) {
      if (++idx[k] < order) break;
      idx[k] = 0;
    }
    if (k == d) break;
  }
  return acc;
}

}  // namespace detail

inline KldReport kld_total(const DVineSpec& dgp, const SimplifiedVineSpec& approx,
                           IntegrationSpec integ = IntegrationSpec()) {
  if (dgp.dim() != approx.dim()) throw StructureError("kld_total: dimension mismatch");
  int d = dgp.dim();
  KldReport rep;
  if (integ.method == IntegrationSpec::Method::Quadrature) {
    rep.method = "quadrature";
    rep.per_tree = detail::kld_tree_terms_quadrature(dgp, approx, integ.order);
    int order2 = std::max(8, integ.order / 2);
    auto coarse = detail::kld_tree_terms_quadrature(dgp, approx, order2);
    double diff = 0.0;
    for (int j = 0; j < d - 1; ++j) diff += std::abs(rep.per_tree[j] - coarse[j]);
    rep.error_estimate = std::max(diff, 1e-12);
  } else {
    rep.method = "mc";
    auto rows = dgp.sample(integ.mc_n, integ.seed);
    rep.per_tree.assign(d - 1, 0.0);
    std::vector<double> totals(rows.size());
    std::vector<std::vector<double>> tree_acc(d - 1, std::vector<double>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      auto lt = detail::tree_log_terms(dgp, rows[r]);
      auto la = detail::tree_log_terms(approx, rows[r]);
      double tot = 0.0;
      for (int j = 0; j < d - 1; ++j) {
        double v = lt[j] - la[j];
        tree_acc[j][r] = v;
        tot += v;
      }
      totals[r] = tot;
    }
    for (int j = 0; j < d - 1; ++j) rep.per_tree[j] = mean(tree_acc[j]);
    rep.error_estimate = std::max(std_error_of_mean(totals), 1e-12);
  }
  rep.total = 0.0;
  for (double v : rep.per_tree) rep.total += v;
  return rep;
}

inline double kld_per_tree(const DVineSpec& dgp, const SimplifiedVineSpec& approx, int j,
                           IntegrationSpec integ = IntegrationSpec()) {
  if (j < 1 || j >= dgp.dim()) throw ParameterError("kld_per_tree: tree index out of range");
  return kld_total(dgp, approx, integ).per_tree[j - 1];
}

struct KldDerivative {
  double via_formula = 0.0;
  double via_finite_difference = 0.0;
};

// Derivative at zero of the KLD from the 3-dimensional DGP with independent
// first-tree margins and conditional FGM(g(u2)) middle edge, taken with
// respect to the first-tree parameter of the approximating vine whose
// second tree holds the first-order partial copula FGM(mean of g).
// Families supported for the first tree: Fgm, AsymFgm (parameter 0 =
// independence; analytic d/dtheta of the conditional cdf at 0).
inline KldDerivative kld_derivative_at_zero(Family first_tree_family,
                                            const std::function<double(double)>& g,
                                            int quad_order = 64, double fd_step = 1e-4,
                                            int fd_quad_order = 48) {
  if (first_tree_family != Family::Fgm && first_tree_family != Family::AsymFgm)
    throw ParameterError("kld_derivative_at_zero: first tree family must be fgm or asymfgm");
  auto rule = gauss_legendre(quad_order);
  double theta_bar = 0.0, lambda = 0.0;
  for (int k = 0; k < quad_order; ++k) {
    double u2 = rule.nodes[k], gv = g(u2);
    if (std::abs(gv) > 1.0) throw ParameterError("kld_derivative_at_zero: g out of [-1,1]");
    theta_bar += rule.weights[k] * gv;
    lambda += rule.weights[k] * (1.0 - 2.0 * u2) * gv;
  }
  // d/dtheta at 0 of the conditional cdf F(u1|u2) for the first-tree family,
  // integrated against g: h(u1) = D(u1) * lambda.
  auto D = [&](double u1) {
    return first_tree_family == Family::Fgm ? u1 * (1.0 - u1) : u1 * u1 * (1.0 - u1);
  };
  auto K = [&](double u1) {
    double s = 0.0;
    for (int k = 0; k < quad_order; ++k) {
      double u3 = rule.nodes[k];
      double m = -2.0 * theta_bar * (1.0 - 2.0 * u3) /
                 (1.0 + theta_bar * (1.0 - 2.0 * u1) * (1.0 - 2.0 * u3));
      s += rule.weights[k] * m * (1.0 - 2.0 * u1) * (1.0 - 2.0 * u3);
    }
    return s;
  };
  KldDerivative out;
  double acc = 0.0;
  for (int k = 0; k < quad_order; ++k) {
    double t = 0.5 * rule.nodes[k];  // map to (0, 0.5)
    acc += 0.5 * rule.weights[k] * K(0.5 + t) *
           ((D(0.5 + t) - D(0.5 - t)) * lambda);
  }
  // acc is the derivative of the expected approximating log density
  // (negative cross entropy); the KLD derivative is its negative.
  out.via_formula = -acc;

  // Central finite difference of the total KLD in the first-tree parameter.
  DVineSpec dgp(3);
  dgp.set_edge(1, 2, ConditionalEdge::mapped(Family::Fgm, ParamMap::unary([g](double u2) {
                       return std::vector<double>{g(u2)};
                     })));
  auto kld_at = [&](double th12) {
    SimplifiedVineSpec m(3);
    m.edge(1, 1) = BivariateCopula::from_tag(family_tag(first_tree_family), std::vector<double>{th12});
    m.edge(1, 2) = BivariateCopula::fgm(theta_bar);
    return kld_total(dgp, m, IntegrationSpec::quadrature(fd_quad_order)).total;
  };
  out.via_finite_difference = (kld_at(fd_step) - kld_at(-fd_step)) / (2.0 * fd_step);
  return out;
}

}  // namespace pvc
