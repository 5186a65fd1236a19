#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "pvc/bicop.hpp"
#include "pvc/quad.hpp"
#include "pvc/rng.hpp"
#include "pvc/stats.hpp"

using namespace pvc;

namespace {

// Central finite difference of the copula cdf, for cross-checking h and pdf.
double fd_h1(const BivariateCopula& c, double u, double v, double h = 1e-5) {
  return (c.cdf(u + h, v) - c.cdf(u - h, v)) / (2.0 * h);
}
double fd_h2(const BivariateCopula& c, double u, double v, double h = 1e-5) {
  return (c.cdf(u, v + h) - c.cdf(u, v - h)) / (2.0 * h);
}
double fd_pdf(const BivariateCopula& c, double u, double v, double h = 1e-4) {
  return (c.cdf(u + h, v + h) - c.cdf(u + h, v - h) - c.cdf(u - h, v + h) +
          c.cdf(u - h, v - h)) /
         (4.0 * h * h);
}

std::vector<BivariateCopula> analytic_families() {
  return {BivariateCopula::independence(),
          BivariateCopula::fgm(0.7),
          BivariateCopula::fgm(-0.4),
          BivariateCopula::asym_fgm(1.0),
          BivariateCopula::asym_fgm(-0.6),
          BivariateCopula::frank(5.74),
          BivariateCopula::frank(-3.0),
          BivariateCopula::sarmanov(0.3),
          BivariateCopula::partial_sarmanov(0.3, 0.12),
          BivariateCopula::bb1(2.0, 2.0)};
}

}  // namespace

TEST_CASE("pinned cdf values") {
  CHECK(BivariateCopula::fgm(1.0).cdf(0.5, 0.5) == doctest::Approx(0.3125).epsilon(1e-15));
  // u1*u2*(1 + g*u1*(1-u1)*(1-u2)) at (0.5, 0.5), g = 1.
  CHECK(BivariateCopula::asym_fgm(1.0).cdf(0.5, 0.5) ==
        doctest::Approx(0.28125).epsilon(1e-15));
  CHECK(BivariateCopula::independence().cdf(0.3, 0.8) == doctest::Approx(0.24).epsilon(1e-15));
}

TEST_CASE("copula boundary and frechet bounds") {
  for (const auto& c : analytic_families()) {
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      CHECK(std::abs(c.cdf(t, 0.0)) < 1e-12);
      CHECK(std::abs(c.cdf(0.0, t)) < 1e-12);
      CHECK(c.cdf(t, 1.0) == doctest::Approx(t).epsilon(1e-10));
      CHECK(c.cdf(1.0, t) == doctest::Approx(t).epsilon(1e-10));
    }
    for (double u : {0.1, 0.5, 0.9})
      for (double v : {0.2, 0.6, 0.95}) {
        double w = std::max(0.0, u + v - 1.0);
        double m = std::min(u, v);
        CHECK(c.cdf(u, v) >= w - 1e-12);
        CHECK(c.cdf(u, v) <= m + 1e-12);
      }
  }
}

TEST_CASE("h functions and pdf agree with finite differences of the cdf") {
  CounterRng rng(20240817);
  for (const auto& c : analytic_families()) {
    for (int k = 0; k < 50; ++k) {
      double u = 0.05 + 0.9 * rng.uniform(2 * k);
      double v = 0.05 + 0.9 * rng.uniform(2 * k + 1);
      CHECK(c.h1(u, v) == doctest::Approx(fd_h1(c, u, v)).epsilon(2e-5));
      CHECK(c.h2(u, v) == doctest::Approx(fd_h2(c, u, v)).epsilon(2e-5));
      CHECK(c.pdf(u, v) == doctest::Approx(fd_pdf(c, u, v)).epsilon(5e-4));
    }
  }
}

TEST_CASE("h inverses round trip on a grid") {
  for (const auto& c : analytic_families()) {
    for (int a = 1; a <= 21; ++a)
      for (int b = 1; b <= 21; ++b) {
        double p = a / 22.0, u = b / 22.0;
        double v = c.h1_inv(p, u);
        CHECK(std::abs(c.h1(u, v) - p) < 1e-10);
        double w = c.h2_inv(p, u);
        CHECK(std::abs(c.h2(w, u) - p) < 1e-10);
      }
  }
}

TEST_CASE("frank closed forms") {
  auto c = BivariateCopula::frank(5.74);
  // Known relation: tau from the Debye-type integral; value near 0.5 at 5.74.
  CHECK(c.kendall_tau() == doctest::Approx(0.5).epsilon(2e-3));
  // Antisymmetry: C(u,v;-t) = v - C(1-u,v;t).
  auto cn = BivariateCopula::frank(-5.74);
  for (double u : {0.2, 0.5, 0.8})
    for (double v : {0.3, 0.7})
      CHECK(cn.cdf(u, v) == doctest::Approx(v - c.cdf(1.0 - u, v)).epsilon(1e-12));
}

TEST_CASE("sarmanov reduces to its cubic family and matches the rho map") {
  double a = 0.31;
  auto s = BivariateCopula::sarmanov(a);
  auto ps = BivariateCopula::partial_sarmanov(a, a * a);
  for (double u : {0.1, 0.37, 0.62, 0.9})
    for (double v : {0.21, 0.55, 0.83}) {
      CHECK(s.cdf(u, v) == doctest::Approx(ps.cdf(u, v)).epsilon(1e-12));
      CHECK(s.pdf(u, v) == doctest::Approx(ps.pdf(u, v)).epsilon(1e-12));
    }
  CHECK(s.spearman_rho() == doctest::Approx(a).epsilon(1e-10));
  CHECK_THROWS_AS(BivariateCopula::sarmanov(0.6), ParameterError);
}

TEST_CASE("averaged frank family is symmetric and collapses near zero") {
  auto pf = BivariateCopula::partial_frank(5.74, 200, 32);
  for (double u : {0.15, 0.4, 0.75})
    for (double v : {0.3, 0.6, 0.9})
      CHECK(pf.cdf(u, v) == doctest::Approx(pf.cdf(v, u)).epsilon(1e-9));

  // Direct average of the trivariate Frank conditional copula over the
  // conditioning variable.
  auto rule = gauss_legendre(64);
  for (double u : {0.25, 0.5, 0.8}) {
    for (double v : {0.35, 0.7}) {
      double direct = integrate_1d(
          [&](double w) { return frankmath::cond_cdf(5.74, u, v, w); }, rule);
      CHECK(pf.cdf(u, v) == doctest::Approx(direct).epsilon(5e-4));
    }
  }

  auto pf0 = BivariateCopula::partial_frank(1e-4, 64, 16);
  CHECK(pf0.cdf(0.5, 0.5) == doctest::Approx(0.25).epsilon(1e-5));
}

TEST_CASE("bb1 density integrates to one and has positive dependence") {
  auto c = BivariateCopula::bb1(2.0, 2.0);
  auto rule = gauss_legendre(96);
  double mass = integrate_2d([&](double u, double v) { return c.pdf(u, v); }, rule);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(c.kendall_tau() > 0.5);
  // tau(theta, delta) = 1 - 2 / (delta * (theta + 2)) for this family.
  CHECK(c.kendall_tau() == doctest::Approx(1.0 - 2.0 / (2.0 * 4.0)).epsilon(1e-6));
}

TEST_CASE("sampling matches the model law") {
  auto c = BivariateCopula::fgm(0.9);
  auto rows = c.sample(20000, 100);
  std::vector<double> us(rows.size()), vs(rows.size()), pits(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    us[i] = rows[i][0];
    vs[i] = rows[i][1];
    pits[i] = c.h1(rows[i][0], rows[i][1]);
  }
  double crit = ks_critical_value(rows.size(), 0.01);
  CHECK(ks_statistic_uniform(us) < crit);
  CHECK(ks_statistic_uniform(vs) < crit);
  CHECK(ks_statistic_uniform(pits) < crit);
  double rho_hat = spearman_corr_sample(us, vs);
  CHECK(std::abs(rho_hat - c.spearman_rho()) < 0.025);
}

TEST_CASE("checkerboard tables reproduce a smooth copula") {
  auto frank = BivariateCopula::frank(4.0);
  auto table = NumericBivariateCopula::from_cdf(
      [&](double u, double v) { return frank.cdf(u, v); }, 200, "frank4-table");
  auto c = BivariateCopula::numeric(std::make_shared<NumericBivariateCopula>(table));
  for (double u : {0.1, 0.35, 0.5, 0.85})
    for (double v : {0.2, 0.5, 0.9}) {
      CHECK(c.cdf(u, v) == doctest::Approx(frank.cdf(u, v)).epsilon(5e-4));
      CHECK(c.h1(u, v) == doctest::Approx(frank.h1(u, v)).epsilon(5e-3));
    }
  CHECK(table.max_margin_error() < 1e-9);
  CHECK(table.spearman_rho() == doctest::Approx(frank.spearman_rho()).epsilon(1e-3));
  // Exact inversion of the piecewise-linear h functions.
  for (int a = 1; a < 22; ++a)
    for (int b = 1; b < 22; ++b) {
      double p = a / 22.0, u = b / 22.0;
      CHECK(std::abs(c.h1(u, c.h1_inv(p, u)) - p) < 1e-9);
    }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(BivariateCopula::fgm(1.5), ParameterError);
  CHECK_THROWS_AS(BivariateCopula::asym_fgm(-1.5), ParameterError);
  CHECK_THROWS_AS(BivariateCopula::bb1(-1.0, 2.0), ParameterError);
  CHECK_THROWS_AS(BivariateCopula::bb1(2.0, 0.5), ParameterError);
}
