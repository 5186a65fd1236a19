#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pvc/bicop.hpp"
#include "pvc/quad.hpp"
#include "pvc/rng.hpp"

namespace pvc {

// Maps a conditioning vector to a family parameter vector.
struct ParamMap {
  int arity = 0;
  bool is_constant = true;
  std::vector<double> const_params;
  std::function<std::vector<double>(std::span<const double>)> fn;

  std::vector<double> operator()(std::span<const double> w) const {
    if (is_constant) return const_params;
    return fn(w);
  }

  static ParamMap constant(std::vector<double> params, int arity = 0) {
    ParamMap m;
    m.arity = arity;
    m.is_constant = true;
    m.const_params = std::move(params);
    return m;
  }

  static ParamMap unary(std::function<std::vector<double>(double)> g) {
    ParamMap m;
    m.arity = 1;
    m.is_constant = false;
    m.fn = [g = std::move(g)](std::span<const double> w) { return g(w[0]); };
    return m;
  }
};

// One edge of a (possibly non-simplified) D-vine. Three flavors:
//  - Fixed: a concrete bivariate copula (simplified edge);
//  - Mapped: a parametric family whose parameters vary with the conditioning
//    vector through a ParamMap;
//  - Frank3Cond: the exact conditional copula of (U_i, U_{i+2}) given the
//    middle variable under an exchangeable trivariate Frank copula, derived
//    analytically from the Archimedean cdf.
class ConditionalEdge {
 public:
  enum class Kind { Fixed, Mapped, Frank3Cond };

  static ConditionalEdge fixed(BivariateCopula cop) {
    ConditionalEdge e;
    e.kind_ = Kind::Fixed;
    e.fixed_ = std::move(cop);
    return e;
  }

  static ConditionalEdge mapped(Family family, ParamMap map) {
    ConditionalEdge e;
    e.kind_ = Kind::Mapped;
    e.family_ = family;
    e.map_ = std::move(map);
    if (e.map_.is_constant) e.fixed_ = make(family, e.map_.const_params);
    return e;
  }

  static ConditionalEdge frank3(double theta) {
    if (theta == 0.0 || !std::isfinite(theta))
      throw ParameterError("frank3 edge: theta must be nonzero finite");
    ConditionalEdge e;
    e.kind_ = Kind::Frank3Cond;
    e.theta_ = theta;
    return e;
  }

  Kind kind() const { return kind_; }
  bool simplified() const { return kind_ == Kind::Fixed || (kind_ == Kind::Mapped && map_.is_constant); }
  const BivariateCopula& fixed_copula() const { return fixed_; }
  int arity() const {
    switch (kind_) {
      case Kind::Fixed: return 0;
      case Kind::Mapped: return map_.arity;
      case Kind::Frank3Cond: return 1;
    }
    return 0;
  }

  double cdf(double a, double b, std::span<const double> w) const {
    if (kind_ == Kind::Frank3Cond) return frankmath::cond_cdf(theta_, a, b, w[0]);
    return at(w, [&](const BivariateCopula& c) { return c.cdf(a, b); });
  }
  double pdf(double a, double b, std::span<const double> w) const {
    if (kind_ == Kind::Frank3Cond) return frankmath::cond_pdf(theta_, a, b, w[0]);
    return at(w, [&](const BivariateCopula& c) { return c.pdf(a, b); });
  }
  // conditional cdf of b given a
  double h1(double a, double b, std::span<const double> w) const {
    if (kind_ == Kind::Frank3Cond) return frankmath::cond_h1(theta_, a, b, w[0]);
    return at(w, [&](const BivariateCopula& c) { return c.h1(a, b); });
  }
  // conditional cdf of a given b
  double h2(double a, double b, std::span<const double> w) const {
    if (kind_ == Kind::Frank3Cond) return frankmath::cond_h2(theta_, a, b, w[0]);
    return at(w, [&](const BivariateCopula& c) { return c.h2(a, b); });
  }
  // solve h1(a, b, w) = p for b
  double h1_inv(double p, double a, std::span<const double> w) const {
    if (kind_ == Kind::Frank3Cond) {
      double u2 = w[0];
      return invert_monotone([&](double b) { return frankmath::cond_h1(theta_, a, b, u2); }, p,
                             1e-11);
    }
    return at(w, [&](const BivariateCopula& c) { return c.h1_inv(p, a); });
  }

 private:
  template <typename F>
  double at(std::span<const double> w, F f) const {
    if (kind_ == Kind::Fixed || map_.is_constant) return f(fixed_);
    return f(make(family_, map_(w)));
  }

  static BivariateCopula make(Family family, std::span<const double> p) {
    return BivariateCopula::from_tag(family_tag(family), p);
  }

  Kind kind_ = Kind::Fixed;
  BivariateCopula fixed_;
  Family family_ = Family::Independence;
  ParamMap map_;
  double theta_ = 0.0;
};

// D-vine structure: edge (i, j) couples margins i and i+j given the block
// i+1..i+j-1, for j = 1..d-1, i = 1..d-j (1-based).
class DVineSpec {
 public:
  explicit DVineSpec(int d) : d_(d) {
    if (d < 2) throw ParameterError("DVineSpec: d >= 2 required");
    trees_.resize(d - 1);
    for (int j = 1; j < d; ++j)
      trees_[j - 1].assign(d - j, ConditionalEdge::fixed(BivariateCopula::independence()));
  }

  int dim() const { return d_; }

  ConditionalEdge& edge(int i, int j) { return trees_.at(j - 1).at(i - 1); }
  const ConditionalEdge& edge(int i, int j) const { return trees_.at(j - 1).at(i - 1); }

  void set_edge(int i, int j, ConditionalEdge e) {
    if (e.arity() > 0 && e.arity() != j - 1)
      throw StructureError("edge (" + std::to_string(i) + "," + std::to_string(j) +
                           "): conditioning arity mismatch");
    edge(i, j) = std::move(e);
  }

  bool all_simplified() const {
    for (const auto& tree : trees_)
      for (const auto& e : tree)
        if (!e.simplified()) return false;
    return true;
  }

  // CPIT triangle for the first `upto` margins of a point u (1-based arrays).
  // f1[i][j] = F(u_i | u_{i+1..i+j}); f2[k][j] = F(u_k | u_{k-j..k-1}).
  struct Triangle {
    std::vector<std::vector<double>> f1, f2;
  };

  Triangle triangle(std::span<const double> u, int upto = -1) const {
    if (upto < 0) upto = d_;
    Triangle t;
    t.f1.assign(upto + 1, {});
    t.f2.assign(upto + 1, {});
    for (int i = 1; i <= upto; ++i) {
      t.f1[i].assign(std::min(d_ - i, upto - i) + 1, 0.0);
      t.f1[i][0] = u[i - 1];
      t.f2[i].assign(i, 0.0);
      t.f2[i][0] = u[i - 1];
    }
    for (int j = 1; j < upto; ++j) {
      for (int i = 1; i + j <= upto; ++i) {
        auto w = u.subspan(i, j - 1);  // u_{i+1..i+j-1}
        const ConditionalEdge& e = edge(i, j);
        double a = t.f1[i][j - 1];
        double b = t.f2[i + j][j - 1];
        if (static_cast<int>(t.f1[i].size()) > j) t.f1[i][j] = clamp_unit(e.h2(a, b, w));
        t.f2[i + j][j] = clamp_unit(e.h1(a, b, w));
      }
    }
    return t;
  }

  // F(u_k | conditioning block [lo, hi]); the block must be contiguous and
  // adjacent to k on one side.
  double cpit(std::span<const double> u, int k, int lo, int hi) const {
    if (lo > hi) return u[k - 1];
    if (lo == k + 1) {
      int j = hi - k;
      Triangle t = triangle(u, hi);
      return t.f1.at(k).at(j);
    }
    if (hi == k - 1) {
      int j = k - lo;
      Triangle t = triangle(u, k);
      return t.f2.at(k).at(j);
    }
    throw StructureError("cpit: conditioning block must be contiguous and adjacent to the margin");
  }

  double log_density(std::span<const double> u) const {
    Triangle t = triangle(u);
    double s = 0.0;
    for (int j = 1; j < d_; ++j)
      for (int i = 1; i + j <= d_; ++i) {
        auto w = u.subspan(i, j - 1);
        s += std::log(edge(i, j).pdf(t.f1[i][j - 1], t.f2[i + j][j - 1], w));
      }
    if (!std::isfinite(s)) throw EvaluationError("log_density: non-finite value");
    return s;
  }

  double density(std::span<const double> u) const { return std::exp(log_density(u)); }

  // w_1 = u_1, w_k = F(u_k | u_1..u_{k-1})
  std::vector<double> rosenblatt(std::span<const double> u) const {
    Triangle t = triangle(u);
    std::vector<double> w(d_);
    for (int k = 1; k <= d_; ++k) w[k - 1] = t.f2[k][k - 1];
    return w;
  }

  // Inverse Rosenblatt: map iid uniforms w to a draw u from the vine.
  std::vector<double> inverse_rosenblatt(std::span<const double> w) const {
    std::vector<double> u(d_);
    u[0] = w[0];
    for (int p = 2; p <= d_; ++p) {
      Triangle t = triangle(u, p - 1);
      double tval = w[p - 1];
      // descend F2[p][j] = h1 of edge (p-j, j) at (f1[p-j][j-1], F2[p][j-1])
      for (int j = p - 1; j >= 1; --j) {
        auto wspan = std::span<const double>(u).subspan(p - j, j - 1);
        double a = t.f1[p - j][j - 1];
        tval = edge(p - j, j).h1_inv(clamp_unit(tval), a, wspan);
      }
      u[p - 1] = clamp_unit(tval);
    }
    return u;
  }

  std::vector<std::vector<double>> sample(std::int64_t n, std::uint64_t seed) const {
    CounterRng rng(seed);
    std::vector<std::vector<double>> rows(n);
    for (std::int64_t r = 0; r < n; ++r) {
      std::vector<double> w(d_);
      for (int k = 0; k < d_; ++k)
        w[k] = rng.uniform(static_cast<std::uint64_t>(r) * d_ + k);
      rows[r] = inverse_rosenblatt(w);
    }
    return rows;
  }

  // Max over a conditioning grid of the sup-distance between conditional
  // copula cdfs at distinct conditioning values; 0 iff the edge is
  // simplified on the grid.
  double simplifying_gap(int i, int j, int grid = 11, int ab_grid = 21) const {
    if (j < 2) throw StructureError("simplifying_gap: j >= 2 required");
    const ConditionalEdge& e = edge(i, j);
    int arity = j - 1;
    std::vector<std::vector<double>> conds;
    std::vector<double> cur(arity);
    enumerate_grid(conds, cur, 0, arity, grid);
    double gap = 0.0;
    for (int ia = 1; ia <= ab_grid - 2; ++ia) {
      double a = static_cast<double>(ia) / (ab_grid - 1);
      for (int ib = 1; ib <= ab_grid - 2; ++ib) {
        double b = static_cast<double>(ib) / (ab_grid - 1);
        double lo = 2.0, hi = -1.0;
        for (const auto& wv : conds) {
          double c = e.cdf(a, b, wv);
          lo = std::min(lo, c);
          hi = std::max(hi, c);
        }
        gap = std::max(gap, hi - lo);
      }
    }
    return gap;
  }

 private:
  static double clamp_unit(double t) {
    const double eps = 1e-14;
    return t < eps ? eps : (t > 1.0 - eps ? 1.0 - eps : t);
  }

  static void enumerate_grid(std::vector<std::vector<double>>& out, std::vector<double>& cur,
                             int pos, int arity, int grid) {
    if (pos == arity) {
      out.push_back(cur);
      return;
    }
    for (int k = 0; k < grid; ++k) {
      cur[pos] = (grid == 1) ? 0.5 : static_cast<double>(k) / (grid - 1);
      enumerate_grid(out, cur, pos + 1, arity, grid);
    }
  }

  int d_;
  std::vector<std::vector<ConditionalEdge>> trees_;
};

}  // namespace pvc
