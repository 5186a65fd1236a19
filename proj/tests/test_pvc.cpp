#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "pvc/kld.hpp"
#include "pvc/presets.hpp"
#include "pvc/pvc_build.hpp"
#include "pvc/quad.hpp"

using namespace pvc;

TEST_CASE("first-order partial copula of a varying-parameter edge") {
  // Conditional FGM(u2): averaging the parameter gives exactly FGM(1/2).
  auto dgp = presets::ex3();
  auto table = first_order_partial(dgp.edge(1, 2), 32, 200);
  auto ref = BivariateCopula::fgm(0.5);
  for (double u : {0.1, 0.3, 0.5, 0.7, 0.9})
    for (double v : {0.2, 0.5, 0.8})
      CHECK(table.cdf(u, v) == doctest::Approx(ref.cdf(u, v)).epsilon(1e-10));
}

TEST_CASE("three-margin construction: partial copula eliminates the margin distortion") {
  auto dgp = presets::ex1(1.0);
  auto res = build_pvc(dgp);
  // The (1,3) margin of the PVC is the independence copula...
  auto margin = implicit_margin(res.spec, 1, 2, 32, 400);
  for (int a = 1; a < 10; ++a)
    for (int b = 1; b < 10; ++b) {
      double u = a / 10.0, v = b / 10.0;
      CHECK(margin.cdf(u, v) == doctest::Approx(u * v).epsilon(1e-9));
    }
  // ...while the DGP's implied (1,3) margin is not.
  auto dgp_margin = implicit_margin(dgp, 1, 2, 32, 400);
  double dev = 0.0;
  for (int a = 1; a < 10; ++a)
    for (int b = 1; b < 10; ++b)
      dev = std::max(dev, std::abs(dgp_margin.cdf(a / 10.0, b / 10.0) -
                                   presets::ex1_c13_closed_form(a / 10.0, b / 10.0, 1.0)));
  CHECK(dev < 1e-6);
  // The DGP's implied margin does deviate from independence (its largest
  // gap over the grid is on the order of 2e-3).
  double indep_gap = 0.0;
  for (int a = 1; a < 10; ++a)
    for (int b = 1; b < 10; ++b)
      indep_gap = std::max(indep_gap, std::abs(dgp_margin.cdf(a / 10.0, b / 10.0) -
                                               (a / 10.0) * (b / 10.0)));
  CHECK(indep_gap > 1e-3);
}

TEST_CASE("implied margin dependence of the quartic-section example") {
  auto dgp = presets::ex1(1.0);
  auto margin = implicit_margin(dgp, 1, 2, 32, 400);
  // Rank correlation of the implied (1,3) margin; closed forms derived by
  // direct integration of the quartic-section cdf.
  CHECK(margin.spearman_rho() == doctest::Approx(-1.0 / 90.0).epsilon(5e-4));
  CHECK(margin.kendall_tau() == doctest::Approx(-1.0 / 135.0).epsilon(5e-4));
}

TEST_CASE("five-margin build recovers the averaged second tree") {
  auto dgp = presets::fgm5();
  PvcBuildConfig cfg;
  cfg.sample_count = 200000;
  cfg.seed = 12;
  cfg.tree_family[3] = Family::Fgm;
  cfg.tree_family[4] = Family::Fgm;
  auto res = build_pvc(dgp, cfg);

  // Tree 2: the partial copula of FGM(1-2u2) is independence.
  for (int i = 1; i <= 3; ++i) {
    auto& c = res.spec.edge(i, 2);
    for (double u : {0.25, 0.5, 0.75})
      for (double v : {0.3, 0.7})
        CHECK(c.cdf(u, v) == doctest::Approx(u * v).epsilon(2e-3));
  }
  // Tree 3: fitted FGM parameter close to 1/9 (propagated dependence).
  for (const auto& d : res.diagnostics) {
    if (d.j == 3) {
      REQUIRE(d.mode == "parametric-fit");
      CHECK(d.params[0] == doctest::Approx(1.0 / 9.0).epsilon(0.35));
    }
  }
}

TEST_CASE("fourth-tree pair density: quadrature equals the closed form") {
  for (double a : {0.1, 0.3, 0.5, 0.7, 0.9})
    for (double b : {0.2, 0.5, 0.8}) {
      double q = fgm5::fourth_tree_density(a, b, 96);
      double c = fgm5::fourth_tree_density_closed_form(a, b);
      CHECK(q == doctest::Approx(c).epsilon(1e-6));
    }
  // Symmetry and normalization.
  CHECK(fgm5::fourth_tree_density(0.2, 0.7) ==
        doctest::Approx(fgm5::fourth_tree_density(0.7, 0.2)).epsilon(1e-10));
  auto rule = gauss_legendre(64);
  double mass = integrate_2d(
      [](double a, double b) { return fgm5::fourth_tree_density(a, b, 64); }, rule);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("pseudo conditional transforms are uniform but differ from the true ones") {
  auto dgp = presets::fgm5();
  PvcBuildConfig cfg;
  cfg.sample_count = 100000;
  cfg.tree_family[3] = Family::Fgm;
  cfg.tree_family[4] = Family::Fgm;
  auto res = build_pvc(dgp, cfg);
  auto diag = ppit_uniformity_diagnostic(dgp, res.spec, 1, 3, 20000, 77);
  CHECK(diag.ks_stat < ks_critical_value(20000, 0.01));
  CHECK(diag.max_abs_corr < 0.03);
  // The DGP is not simplified, so pseudo transforms differ from true ones.
  CHECK(diag.max_abs_ppit_cpit_gap > 0.01);
}

TEST_CASE("sub-vine extraction preserves edges") {
  auto dgp = presets::fgm5();
  auto sub = sub_vine(dgp, 2, 3);
  std::vector<double> u = {0.3, 0.6, 0.8};
  std::vector<double> cond = {0.6};
  // Margins 2..4 of the DGP: tree 1 independent, tree 2 conditional FGM.
  double expect = dgp.edge(2, 2).pdf(0.3, 0.8, cond);
  CHECK(sub.density(u) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("simplified input passes through the build unchanged") {
  auto dgp = presets::ex4(5.74, 64, 16);
  PvcBuildConfig cfg;
  cfg.sample_count = 50000;
  auto res = build_pvc(dgp, cfg);
  CounterRng rng(3);
  for (int k = 0; k < 20; ++k) {
    std::vector<double> u = {0.05 + 0.9 * rng.uniform(3 * k), 0.05 + 0.9 * rng.uniform(3 * k + 1),
                             0.05 + 0.9 * rng.uniform(3 * k + 2)};
    CHECK(res.spec.log_density(u) == doctest::Approx(dgp.log_density(u)).epsilon(1e-9));
  }
}
