#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pvc/dvine.hpp"
#include "pvc/fit.hpp"
#include "pvc/stats.hpp"
#include "pvc/svc.hpp"

namespace pvc {

// Partial probability integral transform: the pseudo-CPIT recursion computed
// through the lower trees of a simplified vine.
inline double ppit(const SimplifiedVineSpec& lower_trees, std::span<const double> u, int k,
                   int lo, int hi) {
  return lower_trees.pseudo_cpit(u, k, lo, hi);
}

// First-order partial copula of an arity-1 conditional edge:
// C(a,b) = integral over the conditioning value of the conditional cdf.
inline NumericBivariateCopula first_order_partial(const ConditionalEdge& edge, int quad_order = 32,
                                                  int grid_cells = 200) {
  if (edge.arity() > 1 && edge.kind() != ConditionalEdge::Kind::Fixed)
    throw StructureError("first_order_partial: arity-1 conditioning required");
  auto rule = gauss_legendre(quad_order);
  auto cdf = [&](double a, double b) {
    if (a <= 0.0 || b <= 0.0) return 0.0;
    if (a >= 1.0) return std::min(b, 1.0);
    if (b >= 1.0) return a;
    double s = 0.0;
    for (int k = 0; k < quad_order; ++k) {
      double w = rule.nodes[k];
      s += rule.weights[k] * edge.cdf(a, b, std::span<const double>(&w, 1));
    }
    return s;
  };
  return NumericBivariateCopula::from_cdf(cdf, grid_cells, "first-order partial copula");
}

struct PvcBuildConfig {
  std::int64_t sample_count = 1'000'000;
  int quad_order = 32;
  int grid_cells = 101;
  int partial_grid_cells = 200;
  std::uint64_t seed = 1;
  // Declared parametric family per tree (j >= 3); edges of undeclared trees
  // are tabulated as empirical checkerboards from PPIT pairs.
  std::map<int, Family> tree_family;
  FitOptions fit;
};

struct PvcEdgeDiagnostics {
  int i = 0, j = 0;
  std::string mode;  // copied | partial-quadrature | parametric-fit | checkerboard
  std::vector<double> params;
  double ks_stat_a = 0.0, ks_stat_b = 0.0;  // PPIT uniformity per side
};

struct PvcResult {
  SimplifiedVineSpec spec;
  std::vector<PvcEdgeDiagnostics> diagnostics;
};

// Build the partial vine copula of a DGP: tree 1 copied, tree 2 by
// quadrature of the conditional cdf, higher trees from the distribution of
// PPIT pairs (parametric fit or checkerboard tabulation).
inline PvcResult build_pvc(const DVineSpec& dgp, const PvcBuildConfig& cfg = PvcBuildConfig()) {
  int d = dgp.dim();
  PvcResult res{SimplifiedVineSpec(d), {}};

  for (int i = 1; i < d; ++i) {
    const ConditionalEdge& e = dgp.edge(i, 1);
    if (!e.simplified()) throw StructureError("build_pvc: first-tree edge not unconditional");
    res.spec.edge(i, 1) = e.fixed_copula();
    res.diagnostics.push_back({i, 1, "copied", e.fixed_copula().params(), 0.0, 0.0});
  }

  if (d >= 3) {
    for (int i = 1; i + 2 <= d; ++i) {
      const ConditionalEdge& e = dgp.edge(i, 2);
      PvcEdgeDiagnostics diag{i, 2, "", {}, 0.0, 0.0};
      if (e.simplified()) {
        res.spec.edge(i, 2) = e.fixed_copula();
        diag.mode = "copied";
        diag.params = e.fixed_copula().params();
      } else {
        auto table = std::make_shared<NumericBivariateCopula>(
            first_order_partial(e, cfg.quad_order, cfg.partial_grid_cells));
        res.spec.edge(i, 2) = BivariateCopula::numeric(std::move(table));
        diag.mode = "partial-quadrature";
      }
      res.diagnostics.push_back(std::move(diag));
    }
  }

  // An edge may be copied from the DGP only while every lower tree is
  // simplified; once a lower-tree conditional copula was replaced by a
  // partial copula, the PPIT pairs no longer follow the DGP's vine edges.
  bool lower_simplified = true;
  for (int i = 1; i + 2 <= d; ++i)
    if (!dgp.edge(i, 2).simplified()) lower_simplified = false;

  std::vector<std::vector<double>> rows;
  for (int j = 3; j < d; ++j) {
    bool all_simplified = true;
    for (int i = 1; i + j <= d; ++i) all_simplified = all_simplified && dgp.edge(i, j).simplified();
    if (!all_simplified) lower_simplified = false;
    if (all_simplified && lower_simplified) {
      for (int i = 1; i + j <= d; ++i) {
        res.spec.edge(i, j) = dgp.edge(i, j).fixed_copula();
        res.diagnostics.push_back({i, j, "copied", dgp.edge(i, j).fixed_copula().params(), 0, 0});
      }
      continue;
    }
    if (rows.empty()) rows = dgp.sample(cfg.sample_count, cfg.seed);

    for (int i = 1; i + j <= d; ++i) {
      const ConditionalEdge& e = dgp.edge(i, j);
      PvcEdgeDiagnostics diag{i, j, "", {}, 0.0, 0.0};
      if (lower_simplified && e.simplified()) {
        res.spec.edge(i, j) = e.fixed_copula();
        diag.mode = "copied";
        diag.params = e.fixed_copula().params();
        res.diagnostics.push_back(std::move(diag));
        continue;
      }
      // PPIT pairs through the already-built lower trees.
      std::vector<std::array<double, 2>> pairs(rows.size());
      std::vector<double> as(rows.size()), bs(rows.size());
      for (std::size_t r = 0; r < rows.size(); ++r) {
        auto t = res.spec.triangle(rows[r]);
        pairs[r] = {t.f1[i][j - 1], t.f2[i + j][j - 1]};
        as[r] = pairs[r][0];
        bs[r] = pairs[r][1];
      }
      diag.ks_stat_a = ks_statistic_uniform(as);
      diag.ks_stat_b = ks_statistic_uniform(bs);
      auto fam_it = cfg.tree_family.find(j);
      if (fam_it != cfg.tree_family.end()) {
        auto ef = detail::fit_edge_ml(fam_it->second, pairs, cfg.fit);
        res.spec.edge(i, j) = detail::make_copula(fam_it->second, ef.params, cfg.fit);
        diag.mode = "parametric-fit";
        diag.params = ef.params;
      } else {
        auto table = std::make_shared<NumericBivariateCopula>(NumericBivariateCopula::from_samples(
            pairs, cfg.grid_cells, "checkerboard from PPIT pairs"));
        res.spec.edge(i, j) = BivariateCopula::numeric(std::move(table));
        diag.mode = "checkerboard";
      }
      res.diagnostics.push_back(std::move(diag));
    }
  }
  return res;
}

// Closed-form machinery for the fourth-tree copula density of the
// 5-dimensional FGM construction with g(u) = 1 - 2u. Parameters are then
// theta = 1/9 for the third-tree FGM margins and gamma = 1/3.
namespace fgm5 {

constexpr double kTheta = 1.0 / 9.0;
constexpr double kGamma = 1.0 / 3.0;

// d/du of the FGM conditional quantile: 1/sqrt((1+h(v))^2 - 4h(v)u).
inline double G(double u, double v, double theta = kTheta) {
  double h = theta * (1.0 - 2.0 * v);
  return 1.0 / std::sqrt((1.0 + h) * (1.0 + h) - 4.0 * h * u);
}

// Fourth-tree density via four one-dimensional integrals.
inline double fourth_tree_density(double a, double b, int quad_order = 64) {
  static thread_local int cached_order = -1;
  static thread_local QuadratureRule rule;
  if (cached_order != quad_order) {
    rule = gauss_legendre(quad_order);
    cached_order = quad_order;
  }
  auto g = [](double u) { return 1.0 - 2.0 * u; };
  auto I = [&](double x) {
    double i1 = 0.0, i2 = 0.0;
    for (int k = 0; k < quad_order; ++k) {
      double v = rule.nodes[k], w = rule.weights[k];
      double Gx = G(x, v);
      i1 += w * Gx;
      i2 += w * (1.0 - 2.0 * v) * g(v) * Gx;
    }
    return std::array<double, 2>{i1, i2};
  };
  auto [i1a, i2a] = I(a);
  auto [i1b, i2b] = I(b);
  // For g(u)=1-2u, g(v)/h(v) = 1/theta, so the last factor collapses.
  double i3a = (1.0 - i1a) / kTheta;
  double i3b = (1.0 - i1b) / kTheta;
  return i1a * i1b + (i2a * (1.0 - i1b) + i2b * (1.0 - i1a)) / kGamma + i3a * i3b / 3.0;
}

// Same density assembled from the logarithmic closed forms of the integrals.
inline double fourth_tree_density_closed_form(double a, double b) {
  auto s = [](double i) {
    return (std::sqrt(25.0 - 9.0 * i) + 5.0 - 9.0 * i) / (std::sqrt(16.0 + 9.0 * i) + 4.0 - 9.0 * i);
  };
  auto bracket = [&](double j) {
    return (6.0 * j * j - 6.0 * j + 1.0) * std::log(s(j)) +
           (1.0 / 9.0) * ((6.0 * j - 26.0 / 9.0) * std::sqrt(25.0 - 9.0 * j) -
                          (6.0 * j - 28.0 / 9.0) * std::sqrt(16.0 + 9.0 * j));
  };
  double la = std::log(s(a)), lb = std::log(s(b));
  return (81.0 / 4.0) * la * lb + 27.0 * (1.0 - 4.5 * la) * (1.0 - 4.5 * lb) +
         (2187.0 / 2.0) * ((1.0 - 4.5 * la) * bracket(b) + (1.0 - 4.5 * lb) * bracket(a));
}

}  // namespace fgm5

struct PpitUniformityDiagnostic {
  double max_abs_corr = 0.0;        // corr(PPIT, conditioning margins)
  double ks_stat = 0.0;             // PPIT vs uniform
  double max_abs_ppit_cpit_gap = 0.0;
};

// Independence/identity diagnostic for one edge: the PPIT of margin i with
// respect to the conditioning block of edge (i,j), its uniformity, and its
// distance from the true CPIT.
inline PpitUniformityDiagnostic ppit_uniformity_diagnostic(const DVineSpec& dgp, const SimplifiedVineSpec& pvc,
                                          int i, int j, std::int64_t n, std::uint64_t seed) {
  if (n < 100) throw ParameterError("ppit_uniformity_diagnostic: n too small");
  auto rows = dgp.sample(n, seed);
  std::vector<double> ppits(n), cpits(n);
  std::vector<std::vector<double>> conds(j - 1, std::vector<double>(n));
  for (std::int64_t r = 0; r < n; ++r) {
    ppits[r] = pvc.pseudo_cpit(rows[r], i, i + 1, i + j - 1);
    cpits[r] = dgp.cpit(rows[r], i, i + 1, i + j - 1);
    for (int m = 0; m < j - 1; ++m) conds[m][r] = rows[r][i + m];
  }
  PpitUniformityDiagnostic out;
  for (int m = 0; m < j - 1; ++m)
    out.max_abs_corr = std::max(out.max_abs_corr, std::abs(pearson_corr(ppits, conds[m])));
  out.ks_stat = ks_statistic_uniform(ppits);
  for (std::int64_t r = 0; r < n; ++r)
    out.max_abs_ppit_cpit_gap = std::max(out.max_abs_ppit_cpit_gap, std::abs(ppits[r] - cpits[r]));
  return out;
}

// Restriction of a D-vine to the consecutive margins lo..lo+m-1 (1-based),
// which is again a D-vine.
inline DVineSpec sub_vine(const DVineSpec& spec, int lo, int m) {
  DVineSpec sub(m);
  for (int j = 1; j < m; ++j)
    for (int i = 1; i + j <= m; ++i) sub.set_edge(i, j, spec.edge(lo + i - 1, j));
  return sub;
}

// Implied unconditional (i, i+j) margin of a vine: integrate the edge cdf
// composed with the conditional margin cdfs over the conditioning block,
// C_{i,i+j}(a, b) = E[ C_edge(F_{i|s}(a|U_s), F_{i+j|s}(b|U_s) | U_s) ].
inline NumericBivariateCopula implicit_margin(const DVineSpec& spec, int i, int j,
                                              int quad_order = 32, int grid_cells = 200) {
  if (j < 2) throw StructureError("implicit_margin: j >= 2 required");
  const int arity = j - 1;
  DVineSpec sub = sub_vine(spec, i, j + 1);
  DVineSpec block = arity >= 2 ? sub_vine(spec, i + 1, arity) : DVineSpec(2);
  auto rule = gauss_legendre(quad_order);
  auto cdf = [&, arity](double a, double b) {
    if (a <= 0.0 || b <= 0.0) return 0.0;
    if (a >= 1.0) return std::min(b, 1.0);
    if (b >= 1.0) return a;
    std::vector<int> idx(arity, 0);
    std::vector<double> u(j + 1);
    double acc = 0.0;
    while (true) {
      double wt = 1.0;
      for (int k = 0; k < arity; ++k) {
        u[k + 1] = rule.nodes[idx[k]];
        wt *= rule.weights[idx[k]];
      }
      u[0] = a;
      u[j] = b;
      auto t = sub.triangle(u);
      double Fa = t.f1[1][j - 1];
      double Fb = t.f2[j + 1][j - 1];
      auto w = std::span<const double>(u).subspan(1, arity);
      double dens = arity >= 2 ? block.density(w) : 1.0;
      acc += wt * dens * sub.edge(1, j).cdf(Fa, Fb, w);
      int k = 0;
      for (; k < arity; ++k) {
        if (++idx[k] < quad_order) break;
        idx[k] = 0;
      }
      if (k == arity) break;
    }
    return acc;
  };
  return NumericBivariateCopula::from_cdf(cdf, grid_cells, "implicit margin");
}

inline NumericBivariateCopula implicit_margin(const SimplifiedVineSpec& spec, int i, int j,
                                              int quad_order = 32, int grid_cells = 200) {
  return implicit_margin(spec.to_dvine(), i, j, quad_order, grid_cells);
}

}  // namespace pvc
