#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pvc/bicop.hpp"
#include "pvc/dvine.hpp"
#include "pvc/rng.hpp"
#include "pvc/stats.hpp"

namespace pvc {

// Simplified D-vine: every edge is an unconditional bivariate copula.
class SimplifiedVineSpec {
 public:
  explicit SimplifiedVineSpec(int d) : d_(d) {
    if (d < 2) throw ParameterError("SimplifiedVineSpec: d >= 2 required");
    trees_.resize(d - 1);
    for (int j = 1; j < d; ++j) trees_[j - 1].assign(d - j, BivariateCopula::independence());
  }

  int dim() const { return d_; }
  BivariateCopula& edge(int i, int j) { return trees_.at(j - 1).at(i - 1); }
  const BivariateCopula& edge(int i, int j) const { return trees_.at(j - 1).at(i - 1); }

  DVineSpec to_dvine() const {
    DVineSpec spec(d_);
    for (int j = 1; j < d_; ++j)
      for (int i = 1; i + j <= d_; ++i) spec.set_edge(i, j, ConditionalEdge::fixed(edge(i, j)));
    return spec;
  }

  struct Triangle {
    std::vector<std::vector<double>> f1, f2;
  };

  Triangle triangle(std::span<const double> u, int upto = -1) const {
    if (upto < 0) upto = d_;
    Triangle t;
    t.f1.assign(upto + 1, {});
    t.f2.assign(upto + 1, {});
    for (int i = 1; i <= upto; ++i) {
      t.f1[i].assign(upto - i + 1, 0.0);
      t.f1[i][0] = u[i - 1];
      t.f2[i].assign(i, 0.0);
      t.f2[i][0] = u[i - 1];
    }
    for (int j = 1; j < upto; ++j) {
      for (int i = 1; i + j <= upto; ++i) {
        const BivariateCopula& c = edge(i, j);
        double a = t.f1[i][j - 1];
        double b = t.f2[i + j][j - 1];
        if (static_cast<int>(t.f1[i].size()) > j) t.f1[i][j] = clamp_unit(c.h2(a, b));
        t.f2[i + j][j] = clamp_unit(c.h1(a, b));
      }
    }
    return t;
  }

  // Pseudo-CPIT of margin k given a contiguous adjacent block [lo, hi],
  // computed through the unconditional pair-copulas.
  double pseudo_cpit(std::span<const double> u, int k, int lo, int hi) const {
    if (lo > hi) return u[k - 1];
    if (lo == k + 1) return triangle(u, hi).f1.at(k).at(hi - k);
    if (hi == k - 1) return triangle(u, k).f2.at(k).at(k - lo);
    throw StructureError("pseudo_cpit: conditioning block must be contiguous and adjacent");
  }

  double log_density(std::span<const double> u) const {
    Triangle t = triangle(u);
    double s = 0.0;
    for (int j = 1; j < d_; ++j)
      for (int i = 1; i + j <= d_; ++i)
        s += std::log(edge(i, j).pdf(t.f1[i][j - 1], t.f2[i + j][j - 1]));
    if (!std::isfinite(s)) throw EvaluationError("log_density: non-finite value");
    return s;
  }

  double density(std::span<const double> u) const { return std::exp(log_density(u)); }

  std::vector<double> rosenblatt(std::span<const double> u) const {
    Triangle t = triangle(u);
    std::vector<double> w(d_);
    for (int k = 1; k <= d_; ++k) w[k - 1] = t.f2[k][k - 1];
    return w;
  }

  std::vector<double> inverse_rosenblatt(std::span<const double> w) const {
    std::vector<double> u(d_);
    u[0] = w[0];
    for (int p = 2; p <= d_; ++p) {
      Triangle t = triangle(u, p - 1);
      double tval = w[p - 1];
      for (int j = p - 1; j >= 1; --j)
        tval = edge(p - j, j).h1_inv(clamp_unit(tval), t.f1[p - j][j - 1]);
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

  double loglik(std::span<const std::vector<double>> data) const {
    std::vector<double> terms(data.size());
    for (std::size_t r = 0; r < data.size(); ++r) {
      for (double x : data[r])
        if (!(x > 0.0 && x < 1.0))
          throw EvaluationError("loglik: observation outside (0,1) at row " + std::to_string(r));
      try {
        terms[r] = log_density(data[r]);
      } catch (const EvaluationError&) {
        throw EvaluationError("loglik: non-finite contribution at row " + std::to_string(r));
      }
    }
    return pairwise_sum(terms);
  }

 private:
  static double clamp_unit(double t) {
    const double eps = 1e-14;
    return t < eps ? eps : (t > 1.0 - eps ? 1.0 - eps : t);
  }

  int d_;
  std::vector<std::vector<BivariateCopula>> trees_;
};

}  // namespace pvc
