#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pvc/rng.hpp"

namespace pvc {

struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct EvaluationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BracketError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StructureError : std::logic_error {
  using std::logic_error::logic_error;
};

// Gauss-Legendre rule mapped to [0,1]; nodes strictly inside (0,1).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int order = 0;
};

// Nodes via Newton iteration on the Legendre polynomial, standard
// three-term recurrence; weights from the derivative.
inline QuadratureRule gauss_legendre(int order) {
  if (order < 1 || order > 512)
    throw ParameterError("gauss_legendre: order must be in [1,512]");
  QuadratureRule rule;
  rule.order = order;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const int n = order;
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Chebyshev-based starting guess on (-1,1).
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 0; k < n; ++k) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k + 1.0) * x * p1 - k * p2) / (k + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    // map (-1,1) -> (0,1)
    rule.nodes[i] = 0.5 * (1.0 - x);
    rule.nodes[n - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[i] = 0.5 * w;
    rule.weights[n - 1 - i] = 0.5 * w;
  }
  return rule;
}

// Tensor-product quadrature over (0,1)^m.
inline double integrate_nd(const std::function<double(std::span<const double>)>& f,
                           int m, const QuadratureRule& rule) {
  if (m < 1) throw ParameterError("integrate_nd: dimension must be >= 1");
  const int n = rule.order;
  std::vector<int> idx(m, 0);
  std::vector<double> x(m);
  double total = 0.0;
  while (true) {
    double w = 1.0;
    for (int k = 0; k < m; ++k) {
      x[k] = rule.nodes[idx[k]];
      w *= rule.weights[idx[k]];
    }
    double v = f(std::span<const double>(x.data(), x.size()));
    if (!std::isfinite(v)) {
      std::string where = "(";
      for (int k = 0; k < m; ++k) where += std::to_string(x[k]) + (k + 1 < m ? "," : ")");
      throw EvaluationError("integrate_nd: non-finite integrand at " + where);
    }
    total += w * v;
    int k = 0;
    while (k < m && ++idx[k] == n) idx[k++] = 0;
    if (k == m) break;
  }
  return total;
}

inline double integrate_2d(const std::function<double(double, double)>& f,
                           const QuadratureRule& rule) {
  return integrate_nd([&](std::span<const double> x) { return f(x[0], x[1]); }, 2, rule);
}

inline double integrate_1d(const std::function<double(double)>& f,
                           const QuadratureRule& rule) {
  double total = 0.0;
  for (int i = 0; i < rule.order; ++i) {
    double v = f(rule.nodes[i]);
    if (!std::isfinite(v))
      throw EvaluationError("integrate_1d: non-finite integrand at " +
                            std::to_string(rule.nodes[i]));
    total += rule.weights[i] * v;
  }
  return total;
}

struct McConfig {
  std::int64_t sample_count = 1000000;
  std::uint64_t seed = 1;
};

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

// Plain Monte Carlo mean over the unit cube, counter-based draws so the
// result is bit-identical for a fixed (seed, sample_count).
inline McEstimate mc_integrate(const std::function<double(std::span<const double>)>& f,
                               int m, const McConfig& cfg) {
  if (cfg.sample_count < 2) throw ParameterError("mc_integrate: sample_count must be >= 2");
  CounterRng rng(cfg.seed);
  std::vector<double> x(m);
  double sum = 0.0, sumsq = 0.0;
  for (std::int64_t i = 0; i < cfg.sample_count; ++i) {
    for (int k = 0; k < m; ++k)
      x[k] = rng.uniform(static_cast<std::uint64_t>(i) * m + k);
    double v = f(std::span<const double>(x.data(), x.size()));
    if (!std::isfinite(v)) throw EvaluationError("mc_integrate: non-finite integrand");
    sum += v;
    sumsq += v * v;
  }
  const double n = static_cast<double>(cfg.sample_count);
  double mean = sum / n;
  double var = (sumsq - n * mean * mean) / (n - 1.0);
  if (var < 0.0) var = 0.0;
  return {mean, std::sqrt(var / n)};
}

// Bracketed root search for f(x) = target on [0,1], f nondecreasing.
// Bisection with a secant step when it stays inside the bracket.
inline double invert_monotone(const std::function<double(double)>& f, double target,
                              double tol = 1e-10, int max_iter = 200) {
  double lo = 0.0, hi = 1.0;
  double flo = f(lo), fhi = f(hi);
  const double slack = 1e-12;
  if (target < flo - slack || target > fhi + slack)
    throw BracketError("invert_monotone: target outside [f(0), f(1)]");
  if (target <= flo) return lo;
  if (target >= fhi) return hi;
  double x = 0.5;
  for (int it = 0; it < max_iter; ++it) {
    // secant proposal from the current bracket
    double xs = (fhi > flo) ? lo + (target - flo) * (hi - lo) / (fhi - flo) : 0.5 * (lo + hi);
    double xb = 0.5 * (lo + hi);
    x = (xs > lo && xs < hi) ? xs : xb;
    // alternate toward bisection to guarantee bracket shrinkage
    if (it % 2 == 1) x = xb;
    double fx = f(x);
    if (std::abs(fx - target) <= tol) return x;
    if (fx < target) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
      fhi = fx;
    }
    if (hi - lo < 1e-16) return 0.5 * (lo + hi);
  }
  if (std::abs(f(x) - target) <= tol * 10) return x;
  throw EvaluationError("invert_monotone: no convergence after max iterations");
}

}  // namespace pvc
