#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pvc/quad.hpp"
#include "pvc/rng.hpp"

namespace pvc {

// ---------------------------------------------------------------------------
// Frank copula scalar machinery (bivariate and trivariate Archimedean).
// x(t) = exp(-theta*t) - 1, E = x(1); the trivariate cdf is
// C(u1,u2,u3) = -log(1 + x1*x2*x3/E^2)/theta.
// ---------------------------------------------------------------------------
namespace frankmath {

inline double xm1(double theta, double t) { return std::expm1(-theta * t); }

inline double biv_cdf(double theta, double u, double v) {
  double E = xm1(theta, 1.0);
  return -std::log1p(xm1(theta, u) * xm1(theta, v) / E) / theta;
}

inline double biv_pdf(double theta, double u, double v) {
  double E = xm1(theta, 1.0);
  double den = E + xm1(theta, u) * xm1(theta, v);
  return -theta * E * std::exp(-theta * (u + v)) / (den * den);
}

// cdf of u given v
inline double biv_h(double theta, double u, double v) {
  double E = xm1(theta, 1.0);
  double xu = xm1(theta, u);
  return std::exp(-theta * v) * xu / (E + xu * xm1(theta, v));
}

// solve biv_h(theta, u, v) = p for u
inline double biv_h_inv(double theta, double p, double v) {
  double E = xm1(theta, 1.0);
  double b = std::exp(-theta * v);
  double x = p * E / ((1.0 - p) * b + p);
  return -std::log1p(x) / theta;
}

// F_{13|2}(u1, u3 | u2) = d/du2 of the trivariate cdf
inline double tri_f13_given_2(double theta, double u1, double u2, double u3) {
  double E = xm1(theta, 1.0);
  double x1 = xm1(theta, u1), x2 = xm1(theta, u2), x3 = xm1(theta, u3);
  return std::exp(-theta * u2) * x1 * x3 / (E * E + x1 * x2 * x3);
}

// d^2 C / du2 du3
inline double tri_d23(double theta, double u1, double u2, double u3) {
  double E = xm1(theta, 1.0);
  double x1 = xm1(theta, u1), x2 = xm1(theta, u2), x3 = xm1(theta, u3);
  double den = E * E + x1 * x2 * x3;
  return -theta * std::exp(-theta * (u2 + u3)) * x1 * E * E / (den * den);
}

// d^3 C / du1 du2 du3
inline double tri_d123(double theta, double u1, double u2, double u3) {
  double E = xm1(theta, 1.0);
  double x1 = xm1(theta, u1), x2 = xm1(theta, u2), x3 = xm1(theta, u3);
  double den = E * E + x1 * x2 * x3;
  return theta * theta * std::exp(-theta * (u1 + u2 + u3)) * E * E *
         (E * E - x1 * x2 * x3) / (den * den * den);
}

// Conditional copula of (U1,U3) given U2 = u2 under the trivariate Frank.
// Arguments (a, b) are copula-scale; the margins F_{1|2}, F_{3|2} are
// bivariate Frank h-functions.
inline double cond_cdf(double theta, double a, double b, double u2) {
  double x = biv_h_inv(theta, a, u2);
  double y = biv_h_inv(theta, b, u2);
  return tri_f13_given_2(theta, x, u2, y);
}

inline double cond_pdf(double theta, double a, double b, double u2) {
  double x = biv_h_inv(theta, a, u2);
  double y = biv_h_inv(theta, b, u2);
  return tri_d123(theta, x, u2, y) / (biv_pdf(theta, x, u2) * biv_pdf(theta, y, u2));
}

// d/db of cond_cdf: cdf of a given b
inline double cond_h2(double theta, double a, double b, double u2) {
  double x = biv_h_inv(theta, a, u2);
  double y = biv_h_inv(theta, b, u2);
  return tri_d23(theta, x, u2, y) / biv_pdf(theta, y, u2);
}

// d/da of cond_cdf: cdf of b given a (by 1<->3 exchangeability)
inline double cond_h1(double theta, double a, double b, double u2) {
  return cond_h2(theta, b, a, u2);
}

}  // namespace frankmath

// ---------------------------------------------------------------------------
// Checkerboard copula: piecewise-uniform mass on an n x n cell grid.
// The cdf is piecewise bilinear, the density piecewise constant, and the
// h-functions piecewise linear, so inverses are exact.
// ---------------------------------------------------------------------------
class NumericBivariateCopula {
 public:
  NumericBivariateCopula(int cells, std::vector<double> mass, std::string provenance)
      : n_(cells), mass_(std::move(mass)), provenance_(std::move(provenance)) {
    if (n_ < 2 || mass_.size() != static_cast<std::size_t>(n_) * n_)
      throw ParameterError("NumericBivariateCopula: bad grid");
    normalize_margins(10);
    build_prefix();
  }

  // Tabulate a copula cdf on the node grid and difference it into cell mass.
  static NumericBivariateCopula from_cdf(const std::function<double(double, double)>& cdf,
                                         int cells, std::string provenance) {
    const int n = cells;
    std::vector<double> node((n + 1) * (n + 1));
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j)
        node[i * (n + 1) + j] = cdf(static_cast<double>(i) / n, static_cast<double>(j) / n);
    std::vector<double> m(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double v = node[(i + 1) * (n + 1) + j + 1] - node[(i + 1) * (n + 1) + j] -
                   node[i * (n + 1) + j + 1] + node[i * (n + 1) + j];
        m[i * n + j] = std::max(v, 0.0);
      }
    return NumericBivariateCopula(n, std::move(m), std::move(provenance));
  }

  // Empirical checkerboard from observations in (0,1)^2.
  static NumericBivariateCopula from_samples(std::span<const std::array<double, 2>> rows,
                                             int cells, std::string provenance) {
    const int n = cells;
    std::vector<double> m(static_cast<std::size_t>(n) * n, 0.0);
    for (const auto& r : rows) {
      int i = std::min(static_cast<int>(r[0] * n), n - 1);
      int j = std::min(static_cast<int>(r[1] * n), n - 1);
      m[i * n + j] += 1.0;
    }
    for (double& v : m) v /= static_cast<double>(rows.size());
    return NumericBivariateCopula(n, std::move(m), std::move(provenance));
  }

  int cells() const { return n_; }
  const std::string& provenance() const { return provenance_; }

  double cdf(double u, double v) const {
    if (u <= 0.0 || v <= 0.0) return 0.0;
    if (u >= 1.0 && v >= 1.0) return 1.0;
    u = std::min(u, 1.0);
    v = std::min(v, 1.0);
    auto [i, fu] = locate(u);
    auto [j, fv] = locate(v);
    double a = P(i + 1, j) - P(i, j);
    double b = P(i, j + 1) - P(i, j);
    return P(i, j) + fu * a + fv * b + fu * fv * cell(i, j);
  }

  double pdf(double u, double v) const {
    auto [i, fu] = locate(u);
    auto [j, fv] = locate(v);
    (void)fu;
    (void)fv;
    return cell(i, j) * n_ * n_;
  }

  // cdf of v given u: within row i the density is constant in u, so the
  // conditional cdf accumulates the u-direction cdf differences along v.
  double h1(double u, double v) const {
    auto [i, fu] = locate(u);
    auto [j, fv] = locate(v);
    (void)fu;
    return n_ * ((P(i + 1, j) - P(i, j)) + fv * cell(i, j)) / row_mass_scale(i);
  }

  // cdf of u given v
  double h2(double u, double v) const {
    auto [i, fu] = locate(u);
    auto [j, fv] = locate(v);
    (void)fv;
    return n_ * ((P(i, j + 1) - P(i, j)) + fu * cell(i, j)) / col_mass_scale(j);
  }

  double h1_inv(double p, double u) const {
    auto [i, fu] = locate(u);
    (void)fu;
    return invert_strip(p, [&](int j) { return n_ * (P(i + 1, j) - P(i, j)) / row_mass_scale(i); });
  }

  double h2_inv(double p, double v) const {
    auto [j, fv] = locate(v);
    (void)fv;
    return invert_strip(p, [&](int i) { return n_ * (P(i, j + 1) - P(i, j)) / col_mass_scale(j); });
  }

  // Exact rank correlations of the checkerboard copula: the cdf is bilinear
  // per cell, so the cell average equals the mean of the corner values.
  double spearman_rho() const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) s += cell_corner_mean(i, j);
    return 12.0 * s / (static_cast<double>(n_) * n_) - 3.0;
  }

  double kendall_tau() const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) s += cell(i, j) * cell_corner_mean(i, j);
    return 4.0 * s - 1.0;
  }

  double max_margin_error() const {
    double e = 0.0;
    for (int i = 0; i <= n_; ++i) {
      double u = static_cast<double>(i) / n_;
      e = std::max(e, std::abs(cdf(u, 1.0) - u));
      e = std::max(e, std::abs(cdf(1.0, u) - u));
    }
    return e;
  }

 private:
  std::pair<int, double> locate(double t) const {
    double s = t * n_;
    int i = static_cast<int>(s);
    if (i < 0) i = 0;
    if (i >= n_) i = n_ - 1;
    return {i, s - i};
  }

  double cell(int i, int j) const { return mass_[static_cast<std::size_t>(i) * n_ + j]; }
  double cell_corner_mean(int i, int j) const {
    return 0.25 * (P(i, j) + P(i + 1, j) + P(i, j + 1) + P(i + 1, j + 1));
  }
  double P(int i, int j) const { return prefix_[static_cast<std::size_t>(i) * (n_ + 1) + j]; }
  // row/col mass after normalization is 1/n up to residual error; divide it
  // out so conditional cdfs hit exactly 1 at the far end.
  double row_mass_scale(int i) const { return n_ * (P(i + 1, n_) - P(i, n_)); }
  double col_mass_scale(int j) const { return n_ * (P(n_, j + 1) - P(n_, j)); }

  template <typename StripCdf>
  double invert_strip(double p, StripCdf strip) const {
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    int lo = 0, hi = n_;  // strip(k) is the conditional cdf at node k/n
    while (hi - lo > 1) {
      int mid = (lo + hi) / 2;
      if (strip(mid) <= p)
        lo = mid;
      else
        hi = mid;
    }
    double a = strip(lo), b = strip(hi);
    double f = (b > a) ? (p - a) / (b - a) : 0.5;
    return (lo + f) / n_;
  }

  // Iterative proportional scaling of rows/columns to uniform margins.
  void normalize_margins(int iters) {
    double target = 1.0 / n_;
    for (int it = 0; it < iters; ++it) {
      for (int i = 0; i < n_; ++i) {
        double s = 0.0;
        for (int j = 0; j < n_; ++j) s += mass_[i * n_ + j];
        if (s > 0)
          for (int j = 0; j < n_; ++j) mass_[i * n_ + j] *= target / s;
      }
      for (int j = 0; j < n_; ++j) {
        double s = 0.0;
        for (int i = 0; i < n_; ++i) s += mass_[i * n_ + j];
        if (s > 0)
          for (int i = 0; i < n_; ++i) mass_[i * n_ + j] *= target / s;
      }
    }
    double total = 0.0;
    for (double v : mass_) total += v;
    for (double& v : mass_) v /= total;
  }

  void build_prefix() {
    prefix_.assign(static_cast<std::size_t>(n_ + 1) * (n_ + 1), 0.0);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        prefix_[(i + 1ull) * (n_ + 1) + j + 1] = cell(i, j) +
                                                 prefix_[i * (n_ + 1ull) + j + 1] +
                                                 prefix_[(i + 1ull) * (n_ + 1) + j] -
                                                 prefix_[i * (n_ + 1ull) + j];
  }

  int n_;
  std::vector<double> mass_;
  std::vector<double> prefix_;
  std::string provenance_;
};

// ---------------------------------------------------------------------------
// Parametric bivariate copulas.
// h1(u,v) = dC/du is the conditional cdf of V given U=u;
// h2(u,v) = dC/dv is the conditional cdf of U given V=v.
// h1_inv(p,u) solves h1(u,v)=p for v; h2_inv(p,v) solves h2(u,v)=p for u.
// ---------------------------------------------------------------------------
enum class Family {
  Independence,
  Fgm,
  AsymFgm,
  Frank,
  PartialFrank,
  Sarmanov,
  PartialSarmanov,
  Bb1,
  Numeric,
};

inline const char* family_tag(Family f) {
  switch (f) {
    case Family::Independence: return "indep";
    case Family::Fgm: return "fgm";
    case Family::AsymFgm: return "asymfgm";
    case Family::Frank: return "frank";
    case Family::PartialFrank: return "pfrank";
    case Family::Sarmanov: return "sarmanov";
    case Family::PartialSarmanov: return "psarmanov";
    case Family::Bb1: return "bb1";
    case Family::Numeric: return "numeric";
  }
  return "?";
}

class BivariateCopula {
 public:
  BivariateCopula() : family_(Family::Independence) {}

  static BivariateCopula independence() { return BivariateCopula(); }

  static BivariateCopula fgm(double theta) {
    if (std::abs(theta) > 1.0) throw ParameterError("fgm: |theta| <= 1 required");
    return BivariateCopula(Family::Fgm, {theta});
  }

  static BivariateCopula asym_fgm(double gamma) {
    if (std::abs(gamma) > 1.0) throw ParameterError("asymfgm: |gamma| <= 1 required");
    return BivariateCopula(Family::AsymFgm, {gamma});
  }

  static BivariateCopula frank(double theta) {
    if (theta == 0.0 || !std::isfinite(theta))
      throw ParameterError("frank: theta must be nonzero finite");
    return BivariateCopula(Family::Frank, {theta});
  }

  static BivariateCopula sarmanov(double alpha) {
    if (std::abs(alpha) > kSarmanovBound + 1e-12)
      throw ParameterError("sarmanov: |alpha| <= sqrt(7)/5 required");
    return BivariateCopula(Family::Sarmanov, {alpha});
  }

  static BivariateCopula partial_sarmanov(double a, double b) {
    if (std::abs(a) > kSarmanovBound + 1e-12)
      throw ParameterError("psarmanov: |a| <= sqrt(7)/5 required");
    double hi = (std::sqrt(std::max(1.0 - 3.0 * a * a, 0.0)) + 1.0) / 5.0;
    if (b < a * a - 1e-12 || b > hi + 1e-12)
      throw ParameterError("psarmanov: need a^2 <= b <= (sqrt(1-3a^2)+1)/5");
    return BivariateCopula(Family::PartialSarmanov, {a, b});
  }

  static BivariateCopula bb1(double theta, double delta) {
    if (!(theta > 0.0) || !(delta >= 1.0))
      throw ParameterError("bb1: theta > 0 and delta >= 1 required");
    return BivariateCopula(Family::Bb1, {theta, delta});
  }

  // First-order partial copula of the exchangeable trivariate Frank copula,
  // tabulated as a checkerboard.
  static BivariateCopula partial_frank(double theta, int grid_cells = 200,
                                       int quad_order = 32) {
    if (theta == 0.0 || !std::isfinite(theta))
      throw ParameterError("pfrank: theta must be nonzero finite");
    // Tabulation is expensive and optimizers revisit parameter values, so
    // memoize recent tables per thread.
    struct CacheEntry {
      double theta;
      int grid, quad;
      std::shared_ptr<const NumericBivariateCopula> table;
    };
    thread_local std::vector<CacheEntry> cache;
    for (std::size_t i = 0; i < cache.size(); ++i)
      if (cache[i].theta == theta && cache[i].grid == grid_cells && cache[i].quad == quad_order) {
        CacheEntry hit = cache[i];
        cache.erase(cache.begin() + i);
        cache.push_back(hit);
        BivariateCopula c(Family::PartialFrank, {theta});
        c.table_ = hit.table;
        return c;
      }
    auto rule = gauss_legendre(quad_order);
    auto cdf = [&](double a, double b) {
      if (a <= 0.0 || b <= 0.0) return 0.0;
      if (a >= 1.0) return std::min(b, 1.0);
      if (b >= 1.0) return a;
      double s = 0.0;
      for (int k = 0; k < quad_order; ++k)
        s += rule.weights[k] * frankmath::cond_cdf(theta, a, b, rule.nodes[k]);
      return s;
    };
    std::shared_ptr<const NumericBivariateCopula> table =
        std::make_shared<NumericBivariateCopula>(NumericBivariateCopula::from_cdf(
            cdf, grid_cells, "partial Frank, theta=" + std::to_string(theta)));
    if (cache.size() >= 64) cache.erase(cache.begin());
    cache.push_back({theta, grid_cells, quad_order, table});
    BivariateCopula c(Family::PartialFrank, {theta});
    c.table_ = std::move(table);
    return c;
  }

  static BivariateCopula numeric(std::shared_ptr<const NumericBivariateCopula> table) {
    BivariateCopula c(Family::Numeric, {});
    c.table_ = std::move(table);
    return c;
  }

  static BivariateCopula from_tag(const std::string& tag, std::span<const double> params) {
    auto need = [&](std::size_t k) {
      if (params.size() != k) throw ParameterError("family '" + tag + "': wrong parameter count");
    };
    if (tag == "indep") { need(0); return independence(); }
    if (tag == "fgm") { need(1); return fgm(params[0]); }
    if (tag == "asymfgm") { need(1); return asym_fgm(params[0]); }
    if (tag == "frank") { need(1); return frank(params[0]); }
    if (tag == "pfrank") { need(1); return partial_frank(params[0]); }
    if (tag == "sarmanov") { need(1); return sarmanov(params[0]); }
    if (tag == "psarmanov") { need(2); return partial_sarmanov(params[0], params[1]); }
    if (tag == "bb1") { need(2); return bb1(params[0], params[1]); }
    throw ParameterError("unknown family tag '" + tag + "'");
  }

  Family family() const { return family_; }
  const std::vector<double>& params() const { return params_; }
  const char* tag() const { return family_tag(family_); }
  const NumericBivariateCopula* table() const { return table_.get(); }

  double cdf(double u, double v) const {
    u = clamp01(u);
    v = clamp01(v);
    switch (family_) {
      case Family::Independence: return u * v;
      case Family::Fgm: return u * v * (1.0 + params_[0] * (1.0 - u) * (1.0 - v));
      case Family::AsymFgm: return u * v * (1.0 + params_[0] * u * (1.0 - u) * (1.0 - v));
      case Family::Frank:
        if (u == 0.0 || v == 0.0) return 0.0;
        return frankmath::biv_cdf(params_[0], u, v);
      case Family::Sarmanov: return cubic_cdf(3.0 * params_[0], 5.0 * params_[0] * params_[0], u, v);
      case Family::PartialSarmanov: return cubic_cdf(3.0 * params_[0], 5.0 * params_[1], u, v);
      case Family::Bb1: {
        if (u == 0.0 || v == 0.0) return 0.0;
        if (u == 1.0) return v;
        if (v == 1.0) return u;
        double s = bb1_phi(u) + bb1_phi(v);
        return bb1_phi_inv(s);
      }
      case Family::PartialFrank:
      case Family::Numeric: return table_->cdf(u, v);
    }
    return 0.0;
  }

  double pdf(double u, double v) const {
    require_interior(u, v);
    switch (family_) {
      case Family::Independence: return 1.0;
      case Family::Fgm: return 1.0 + params_[0] * (1.0 - 2.0 * u) * (1.0 - 2.0 * v);
      case Family::AsymFgm:
        return 1.0 + params_[0] * (2.0 * u - 3.0 * u * u) * (1.0 - 2.0 * v);
      case Family::Frank: return frankmath::biv_pdf(params_[0], u, v);
      case Family::Sarmanov: return cubic_pdf(3.0 * params_[0], 5.0 * params_[0] * params_[0], u, v);
      case Family::PartialSarmanov: return cubic_pdf(3.0 * params_[0], 5.0 * params_[1], u, v);
      case Family::Bb1: {
        double s = bb1_phi(u) + bb1_phi(v);
        return bb1_phi_inv_d2(s) * bb1_phi_d(u) * bb1_phi_d(v);
      }
      case Family::PartialFrank:
      case Family::Numeric: return table_->pdf(u, v);
    }
    return 0.0;
  }

  // conditional cdf of V given U=u
  double h1(double u, double v) const {
    require_open(u, "h1 conditioning");
    v = clamp01(v);
    switch (family_) {
      case Family::Independence: return v;
      case Family::Fgm: return v * (1.0 + params_[0] * (1.0 - 2.0 * u) * (1.0 - v));
      case Family::AsymFgm:
        return v * (1.0 + params_[0] * (2.0 * u - 3.0 * u * u) * (1.0 - v));
      case Family::Frank: return frankmath::biv_h(params_[0], v, u);
      case Family::Sarmanov: return cubic_h1(3.0 * params_[0], 5.0 * params_[0] * params_[0], u, v);
      case Family::PartialSarmanov: return cubic_h1(3.0 * params_[0], 5.0 * params_[1], u, v);
      case Family::Bb1: {
        if (v <= 0.0) return 0.0;
        if (v >= 1.0) return 1.0;
        double s = bb1_phi(u) + bb1_phi(v);
        return bb1_phi_inv_d1(s) * bb1_phi_d(u);
      }
      case Family::PartialFrank:
      case Family::Numeric: return table_->h1(u, v);
    }
    return 0.0;
  }

  // conditional cdf of U given V=v
  double h2(double u, double v) const {
    require_open(v, "h2 conditioning");
    u = clamp01(u);
    switch (family_) {
      case Family::Independence: return u;
      case Family::Fgm: return u * (1.0 + params_[0] * (1.0 - u) * (1.0 - 2.0 * v));
      case Family::AsymFgm:
        return u * (1.0 + params_[0] * u * (1.0 - u) * (1.0 - 2.0 * v));
      case Family::Frank: return frankmath::biv_h(params_[0], u, v);
      case Family::Sarmanov: return cubic_h1(3.0 * params_[0], 5.0 * params_[0] * params_[0], v, u);
      case Family::PartialSarmanov: return cubic_h1(3.0 * params_[0], 5.0 * params_[1], v, u);
      case Family::Bb1: {
        if (u <= 0.0) return 0.0;
        if (u >= 1.0) return 1.0;
        double s = bb1_phi(u) + bb1_phi(v);
        return bb1_phi_inv_d1(s) * bb1_phi_d(v);
      }
      case Family::PartialFrank:
      case Family::Numeric: return table_->h2(u, v);
    }
    return 0.0;
  }

  double h1_inv(double p, double u) const {
    p = clamp01(p);
    switch (family_) {
      case Family::Independence: return p;
      case Family::Fgm: return quadratic_section_inv(params_[0] * (1.0 - 2.0 * u), p);
      case Family::AsymFgm:
        return quadratic_section_inv(params_[0] * (2.0 * u - 3.0 * u * u), p);
      case Family::Frank:
        if (p <= 0.0) return 0.0;
        if (p >= 1.0) return 1.0;
        return frankmath::biv_h_inv(params_[0], p, u);
      case Family::PartialFrank:
      case Family::Numeric: return table_->h1_inv(p, u);
      default:
        return invert_monotone([&](double v) { return h1(u, v); }, p, 1e-11);
    }
  }

  double h2_inv(double p, double v) const {
    p = clamp01(p);
    switch (family_) {
      case Family::Independence: return p;
      case Family::Fgm: return quadratic_section_inv(params_[0] * (1.0 - 2.0 * v), p);
      case Family::AsymFgm: {
        // h1 of the transpose is quadratic; h2 here is cubic in u -> numeric.
        return invert_monotone([&](double u) { return h2(u, v); }, p, 1e-11);
      }
      case Family::Frank:
        if (p <= 0.0) return 0.0;
        if (p >= 1.0) return 1.0;
        return frankmath::biv_h_inv(params_[0], p, v);
      case Family::PartialFrank:
      case Family::Numeric: return table_->h2_inv(p, v);
      default:
        return invert_monotone([&](double u) { return h2(u, v); }, p, 1e-11);
    }
  }

  std::vector<std::array<double, 2>> sample(std::int64_t n, std::uint64_t seed) const {
    CounterRng rng(seed);
    std::vector<std::array<double, 2>> rows(n);
    for (std::int64_t i = 0; i < n; ++i) {
      double u = rng.uniform(2 * static_cast<std::uint64_t>(i));
      double w = rng.uniform(2 * static_cast<std::uint64_t>(i) + 1);
      rows[i] = {u, h1_inv(w, u)};
    }
    return rows;
  }

  double spearman_rho(int quad_order = 64) const {
    switch (family_) {
      case Family::Independence: return 0.0;
      case Family::Fgm: return params_[0] / 3.0;
      case Family::AsymFgm: return params_[0] / 6.0;
      case Family::Sarmanov: return params_[0];
      case Family::PartialSarmanov: return params_[0];
      case Family::PartialFrank:
      case Family::Numeric: return table_->spearman_rho();
      default: {
        auto rule = gauss_legendre(quad_order);
        double s = integrate_2d([&](double a, double b) { return cdf(a, b); }, rule);
        return 12.0 * s - 3.0;
      }
    }
  }

  double kendall_tau(int quad_order = 64) const {
    switch (family_) {
      case Family::Independence: return 0.0;
      case Family::Fgm: return 2.0 * params_[0] / 9.0;
      // Archimedean closed form for this two-parameter family.
      case Family::Bb1: return 1.0 - 2.0 / (params_[1] * (params_[0] + 2.0));
      case Family::PartialFrank:
      case Family::Numeric: return table_->kendall_tau();
      default: {
        auto rule = gauss_legendre(quad_order);
        double s = integrate_2d([&](double a, double b) { return cdf(a, b) * pdf(a, b); }, rule);
        return 4.0 * s - 1.0;
      }
    }
  }

  static constexpr double kSarmanovBound = 0.5291502622129182;  // sqrt(7)/5

 private:
  BivariateCopula(Family f, std::vector<double> p) : family_(f), params_(std::move(p)) {}

  static double clamp01(double t) { return t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t); }

  void require_interior(double u, double v) const {
    if (u <= 0.0 || u >= 1.0 || v <= 0.0 || v >= 1.0)
      throw EvaluationError(std::string(tag()) + ": density requires interior point");
  }

  static void require_open(double t, const char* what) {
    if (t <= 0.0 || t >= 1.0)
      throw EvaluationError(std::string(what) + " must be in the open interval (0,1)");
  }

  // Solve t*(1 + k*(1-t)) = p for t in [0,1] (FGM-type quadratic section).
  static double quadratic_section_inv(double k, double p) {
    if (std::abs(k) < 1e-12) return p;
    double disc = (1.0 + k) * (1.0 + k) - 4.0 * k * p;
    return (1.0 + k - std::sqrt(std::max(disc, 0.0))) / (2.0 * k);
  }

  // Cubic-section family C = uv + p*A(u)A(v) + q*B(u)B(v),
  // A(t)=t(1-t), B(t)=t(1-t)(1-2t); Sarmanov (p,q)=(3a,5a^2),
  // partial Sarmanov (p,q)=(3a,5b).
  static double A(double t) { return t * (1.0 - t); }
  static double B(double t) { return t * (1.0 - t) * (1.0 - 2.0 * t); }
  static double Ad(double t) { return 1.0 - 2.0 * t; }
  static double Bd(double t) { return 1.0 - 6.0 * t + 6.0 * t * t; }

  static double cubic_cdf(double p, double q, double u, double v) {
    return u * v + p * A(u) * A(v) + q * B(u) * B(v);
  }
  static double cubic_pdf(double p, double q, double u, double v) {
    return 1.0 + p * Ad(u) * Ad(v) + q * Bd(u) * Bd(v);
  }
  // conditional cdf of v given u (derivative w.r.t. the first coordinate)
  static double cubic_h1(double p, double q, double u, double v) {
    return v + p * Ad(u) * A(v) + q * Bd(u) * B(v);
  }

  // BB1 generator phi(t) = (t^-theta - 1)^delta and inverse derivatives.
  double bb1_phi(double t) const {
    return std::pow(std::pow(t, -params_[0]) - 1.0, params_[1]);
  }
  double bb1_phi_d(double t) const {
    double th = params_[0], de = params_[1];
    return -de * th * std::pow(std::pow(t, -th) - 1.0, de - 1.0) * std::pow(t, -th - 1.0);
  }
  double bb1_phi_inv(double s) const {
    double th = params_[0], de = params_[1];
    return std::pow(1.0 + std::pow(s, 1.0 / de), -1.0 / th);
  }
  double bb1_phi_inv_d1(double s) const {
    double th = params_[0], de = params_[1];
    double w = std::pow(s, 1.0 / de);
    return -(1.0 / (th * de)) * std::pow(1.0 + w, -1.0 / th - 1.0) * w / s;
  }
  double bb1_phi_inv_d2(double s) const {
    double th = params_[0], de = params_[1];
    double w = std::pow(s, 1.0 / de);
    double T = 1.0 + w;
    return (w / (th * de * s * s)) *
           ((1.0 / th + 1.0) * (w / de) * std::pow(T, -1.0 / th - 2.0) +
            (1.0 - 1.0 / de) * std::pow(T, -1.0 / th - 1.0));
  }

  Family family_;
  std::vector<double> params_;
  std::shared_ptr<const NumericBivariateCopula> table_;
};

}  // namespace pvc
