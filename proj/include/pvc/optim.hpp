#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "pvc/quad.hpp"

namespace pvc {

// Golden-section minimization of a unimodal function on [lo, hi].
inline double golden_section_min(const std::function<double(double)>& f, double lo, double hi,
                                 double tol = 1e-8, int max_iter = 200) {
  const double invphi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

struct NelderMeadResult {
  std::vector<double> x;
  double fmin = 0.0;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

// One Nelder-Mead run from a fresh axis-aligned simplex.  The f-spread stop
// rule can fire on a degenerate (collapsed) simplex away from the optimum, so
// callers should restart from the returned point until no further progress.
inline NelderMeadResult nelder_mead_once(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
    double step, double ftol, int max_iter) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> pts(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step;
  std::vector<double> val(n + 1);
  for (std::size_t i = 0; i <= n; ++i) val[i] = f(pts[i]);

  NelderMeadResult res;
  int it = 0;
  for (; it < max_iter; ++it) {
    std::vector<std::size_t> ord(n + 1);
    std::iota(ord.begin(), ord.end(), 0u);
    std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return val[a] < val[b]; });
    std::size_t best = ord[0], worst = ord[n], second = ord[n - 1];
    if (std::abs(val[worst] - val[best]) < ftol * (std::abs(val[best]) + ftol)) {
      res.converged = true;
      break;
    }
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i)
      if (i != worst)
        for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[i][k] / n;

    auto blend = [&](double c) {
      std::vector<double> p(n);
      for (std::size_t k = 0; k < n; ++k) p[k] = centroid[k] + c * (centroid[k] - pts[worst][k]);
      return p;
    };
    auto refl = blend(1.0);
    double fr = f(refl);
    if (fr < val[best]) {
      auto exp_pt = blend(2.0);
      double fe = f(exp_pt);
      if (fe < fr) {
        pts[worst] = std::move(exp_pt);
        val[worst] = fe;
      } else {
        pts[worst] = std::move(refl);
        val[worst] = fr;
      }
    } else if (fr < val[second]) {
      pts[worst] = std::move(refl);
      val[worst] = fr;
    } else {
      auto con = blend(fr < val[worst] ? 0.5 : -0.5);
      double fc = f(con);
      if (fc < std::min(fr, val[worst])) {
        pts[worst] = std::move(con);
        val[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (std::size_t k = 0; k < n; ++k)
            pts[i][k] = pts[best][k] + 0.5 * (pts[i][k] - pts[best][k]);
          val[i] = f(pts[i]);
        }
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i <= n; ++i)
    if (val[i] < val[best]) best = i;
  res.x = pts[best];
  res.fmin = val[best];
  res.iterations = it;
  return res;
}

}  // namespace detail

// Nelder-Mead simplex with restarts; box constraints are the caller's
// business (wrap the objective with a penalty).  Each restart rebuilds the
// simplex around the current best point with an alternating step sign, which
// recovers from simplex collapse along flat directions.
inline NelderMeadResult nelder_mead(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
    double step = 0.1, double ftol = 1e-10, int max_iter = 2000) {
  NelderMeadResult res = detail::nelder_mead_once(f, std::move(x0), step, ftol, max_iter);
  const int max_restarts = 12;
  for (int k = 1; k <= max_restarts; ++k) {
    double s = (k % 2 ? -step : step);
    NelderMeadResult next = detail::nelder_mead_once(f, res.x, s, ftol, max_iter);
    next.iterations += res.iterations;
    bool progressed = next.fmin < res.fmin - ftol * (std::abs(res.fmin) + ftol);
    if (next.fmin <= res.fmin) res = std::move(next);
    if (!progressed) break;
  }
  return res;
}

}  // namespace pvc
