#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "pvc/quad.hpp"

namespace pvc {

inline double mean(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

inline double sample_var(std::span<const double> x) {
  double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / (static_cast<double>(x.size()) - 1.0);
}

inline double std_error_of_mean(std::span<const double> x) {
  return std::sqrt(sample_var(x) / static_cast<double>(x.size()));
}

inline double pearson_corr(std::span<const double> x, std::span<const double> y) {
  double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// Average ranks scaled by 1/(n+1).
inline std::vector<double> ranks_over_np1(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg / (static_cast<double>(n) + 1.0);
    i = j + 1;
  }
  return r;
}

inline double spearman_corr_sample(std::span<const double> x, std::span<const double> y) {
  auto rx = ranks_over_np1(x);
  auto ry = ranks_over_np1(y);
  return pearson_corr(rx, ry);
}

inline double kendall_tau_sample(std::span<const double> x, std::span<const double> y) {
  // O(n^2); use only on moderate n.
  const std::size_t n = x.size();
  long long s = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double p = (x[i] - x[j]) * (y[i] - y[j]);
      s += (p > 0) - (p < 0);
    }
  return 2.0 * static_cast<double>(s) / (static_cast<double>(n) * (n - 1.0));
}

// One-sample Kolmogorov-Smirnov statistic against Uniform(0,1).
inline double ks_statistic_uniform(std::span<const double> x) {
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double cdf = s[i];
    d = std::max(d, std::abs((i + 1) / n - cdf));
    d = std::max(d, std::abs(i / n - cdf));
  }
  return d;
}

// Asymptotic critical value: D_crit = c(alpha)/sqrt(n), c(0.01) = 1.628.
inline double ks_critical_value(std::size_t n, double alpha = 0.01) {
  double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  return c / std::sqrt(static_cast<double>(n));
}

namespace detail {

inline double log_gamma(double x) { return std::lgamma(x); }

// Regularized incomplete beta, continued fraction (Lentz).
inline double betacf(double a, double b, double x) {
  const int maxit = 300;
  const double eps = 3e-14, fpmin = 1e-300;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::abs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= maxit; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h;
}

inline double inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double bt = std::exp(log_gamma(a + b) - log_gamma(a) - log_gamma(b) +
                       a * std::log(x) + b * std::log(1.0 - x));
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
  return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

}  // namespace detail

// Two-sided p-value of a Student-t statistic with df degrees of freedom.
inline double t_pvalue_two_sided(double t, double df) {
  double x = df / (df + t * t);
  return detail::inc_beta(0.5 * df, 0.5, x);
}

struct PairedTTest {
  double mean_diff = 0.0;
  double se_diff = 0.0;
  double t_stat = 0.0;
  double p_value = 1.0;
};

inline PairedTTest paired_t_test(std::span<const double> a, std::span<const double> b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  PairedTTest r;
  r.mean_diff = mean(d);
  r.se_diff = std_error_of_mean(d);
  r.t_stat = (r.se_diff > 0) ? r.mean_diff / r.se_diff : 0.0;
  r.p_value = t_pvalue_two_sided(r.t_stat, static_cast<double>(d.size()) - 1.0);
  return r;
}

// Deterministic pairwise summation, used for parallel-safe reductions.
inline double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 8) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  std::size_t h = x.size() / 2;
  return pairwise_sum(x.subspan(0, h)) + pairwise_sum(x.subspan(h));
}

}  // namespace pvc
