#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "pvc/kld.hpp"
#include "pvc/presets.hpp"

using namespace pvc;

TEST_CASE("self divergence is zero") {
  auto sv = SimplifiedVineSpec(3);
  sv.edge(1, 1) = BivariateCopula::frank(4.0);
  sv.edge(2, 1) = BivariateCopula::fgm(0.5);
  sv.edge(1, 2) = BivariateCopula::fgm(0.2);
  auto rep = kld_total(sv.to_dvine(), sv, IntegrationSpec::quadrature(24));
  CHECK(std::abs(rep.total) < 1e-12);
  for (double v : rep.per_tree) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("per-tree terms add up to the total") {
  auto dgp = presets::ex3();
  SimplifiedVineSpec approx(3);
  approx.edge(1, 2) = BivariateCopula::fgm(0.5);
  auto rep = kld_total(dgp, approx, IntegrationSpec::quadrature(32));
  double s = 0.0;
  for (double v : rep.per_tree) s += v;
  CHECK(rep.total == doctest::Approx(s).epsilon(1e-14));
  CHECK(rep.method == "quadrature");
  CHECK(rep.total >= 0.0);
}

TEST_CASE("the averaged-parameter approximation beats independence") {
  auto dgp = presets::ex3();  // conditional FGM(u2), average parameter 1/2
  SimplifiedVineSpec partial(3);
  partial.edge(1, 2) = BivariateCopula::fgm(0.5);
  SimplifiedVineSpec indep(3);
  auto integ = IntegrationSpec::quadrature(32);
  double k_partial = kld_total(dgp, partial, integ).total;
  double k_indep = kld_total(dgp, indep, integ).total;
  CHECK(k_partial < k_indep);
  CHECK(k_partial > 0.0);  // the DGP is not simplified, so no exact match
}

TEST_CASE("second-tree divergence is minimized at the averaged parameter") {
  auto dgp = presets::ex3();
  auto integ = IntegrationSpec::quadrature(32);
  auto tree2_at = [&](double th) {
    SimplifiedVineSpec m(3);
    m.edge(1, 2) = BivariateCopula::fgm(th);
    return kld_per_tree(dgp, m, 2, integ);
  };
  double at_half = tree2_at(0.5);
  for (double delta : {0.02, 0.05, 0.1, 0.2}) {
    CHECK(at_half < tree2_at(0.5 + delta));
    CHECK(at_half < tree2_at(0.5 - delta));
  }
}

TEST_CASE("monte-carlo integration agrees with quadrature") {
  auto dgp = presets::ex3();
  SimplifiedVineSpec approx(3);
  approx.edge(1, 2) = BivariateCopula::fgm(0.35);
  double kq = kld_total(dgp, approx, IntegrationSpec::quadrature(32)).total;
  auto mc = kld_total(dgp, approx, IntegrationSpec::monte_carlo(400000, 3));
  CHECK(mc.method == "mc");
  CHECK(std::abs(mc.total - kq) < 5.0 * mc.error_estimate);
}

TEST_CASE("first-tree derivative of the divergence: symmetric family vanishes") {
  // With g(u2) = u2 the reflected-difference kernel of the symmetric family
  // is identically zero, so the gradient at independence is zero.
  auto d = kld_derivative_at_zero(Family::Fgm, [](double u) { return u; });
  CHECK(std::abs(d.via_formula) < 1e-12);
  CHECK(std::abs(d.via_finite_difference) < 1e-6);
}

TEST_CASE("first-tree derivative of the divergence: asymmetric family") {
  auto d = kld_derivative_at_zero(Family::AsymFgm, [](double u) { return u; });
  CHECK(d.via_formula == doctest::Approx(d.via_finite_difference).epsilon(1e-3));
  CHECK(d.via_formula != 0.0);
  // Stable in the quadrature order.
  auto d32 = kld_derivative_at_zero(Family::AsymFgm, [](double u) { return u; },
                                    32, 1e-4, 32);
  auto d128 = kld_derivative_at_zero(Family::AsymFgm, [](double u) { return u; },
                                     128, 1e-4, 48);
  CHECK(d32.via_formula == doctest::Approx(d128.via_formula).epsilon(1e-10));
  CHECK((d.via_formula > 0.0) == (d32.via_formula > 0.0));
  CHECK((d.via_formula > 0.0) == (d128.via_formula > 0.0));
}

TEST_CASE("nonzero gradient moves the total optimum off zero") {
  // With an asymmetric first-tree family, the best first-tree parameter for
  // the total divergence is not zero: scan a small grid.
  auto g = [](double u) { return u; };
  auto rule = gauss_legendre(64);
  double theta_bar = integrate_1d(g, rule);
  DVineSpec dgp(3);
  dgp.set_edge(1, 2, ConditionalEdge::mapped(Family::Fgm, ParamMap::unary([g](double u2) {
                       return std::vector<double>{g(u2)};
                     })));
  auto total_at = [&](double th) {
    SimplifiedVineSpec m(3);
    m.edge(1, 1) = BivariateCopula::asym_fgm(th);
    m.edge(1, 2) = BivariateCopula::fgm(theta_bar);
    return kld_total(dgp, m, IntegrationSpec::quadrature(32)).total;
  };
  auto d = kld_derivative_at_zero(Family::AsymFgm, g);
  double step = d.via_formula > 0.0 ? -0.01 : 0.01;  // descend the gradient
  CHECK(total_at(step) < total_at(0.0));
}

TEST_CASE("dimension mismatch is rejected") {
  auto dgp = presets::ex3();
  SimplifiedVineSpec wrong(4);
  CHECK_THROWS_AS(kld_total(dgp, wrong), StructureError);
}
