#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "pvc/quad.hpp"
#include "pvc/rng.hpp"
#include "pvc/stats.hpp"
#include "pvc/svc.hpp"

using namespace pvc;

namespace {

SimplifiedVineSpec make_sv4() {
  SimplifiedVineSpec sv(4);
  sv.edge(1, 1) = BivariateCopula::frank(4.0);
  sv.edge(2, 1) = BivariateCopula::fgm(0.6);
  sv.edge(3, 1) = BivariateCopula::frank(-2.5);
  sv.edge(1, 2) = BivariateCopula::fgm(0.3);
  sv.edge(2, 2) = BivariateCopula::fgm(-0.2);
  sv.edge(1, 3) = BivariateCopula::fgm(1.0 / 9.0);
  return sv;
}

}  // namespace

TEST_CASE("pseudo conditional cdf closed forms") {
  // Independence below the queried tree: the pseudo conditional cdf of an
  // FGM(1/9) edge at span width 3 reduces to u1 (1 + (1/9)(1-u1)(1-2u4)).
  SimplifiedVineSpec sv(4);
  sv.edge(1, 3) = BivariateCopula::fgm(1.0 / 9.0);
  for (double u1 : {0.2, 0.5, 0.85})
    for (double u4 : {0.1, 0.6, 0.95}) {
      std::vector<double> u = {u1, 0.4, 0.7, u4};
      double expect = u1 * (1.0 + (1.0 / 9.0) * (1.0 - u1) * (1.0 - 2.0 * u4));
      CHECK(sv.pseudo_cpit(u, 1, 2, 4) == doctest::Approx(expect).epsilon(1e-12));
    }

  // One-step pseudo conditional cdf is the plain h function of the edge.
  SimplifiedVineSpec pair(2);
  pair.edge(1, 1) = BivariateCopula::frank(3.0);
  std::vector<double> u = {0.3, 0.8};
  CHECK(pair.pseudo_cpit(u, 1, 2, 2) ==
        doctest::Approx(BivariateCopula::frank(3.0).h2(0.3, 0.8)).epsilon(1e-14));
}

TEST_CASE("density normalizes and matches the edge factorization") {
  auto sv = make_sv4();
  auto rule = gauss_legendre(24);
  double mass =
      integrate_nd([&](std::span<const double> u) { return sv.density(u); }, 4, rule);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("log likelihood is the sum of log densities") {
  auto sv = make_sv4();
  auto rows = sv.sample(500, 17);
  double direct = 0.0;
  for (const auto& r : rows) direct += sv.log_density(r);
  CHECK(sv.loglik(rows) == doctest::Approx(direct).epsilon(1e-11));
}

TEST_CASE("rosenblatt round trip and sampling law") {
  auto sv = make_sv4();
  CounterRng rng(9876);
  for (int k = 0; k < 30; ++k) {
    std::vector<double> u(4);
    for (int m = 0; m < 4; ++m) u[m] = 0.03 + 0.94 * rng.uniform(4 * k + m);
    auto w = sv.rosenblatt(u);
    auto back = sv.inverse_rosenblatt(w);
    for (int m = 0; m < 4; ++m) CHECK(back[m] == doctest::Approx(u[m]).epsilon(1e-9));
  }

  auto rows = sv.sample(8000, 5);
  for (int col = 0; col < 4; ++col) {
    std::vector<double> xs(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) xs[r] = rows[r][col];
    CHECK(ks_statistic_uniform(xs) < ks_critical_value(rows.size(), 0.01));
  }
  // Rosenblatt of simulated rows is uniform in every coordinate.
  std::vector<double> w2(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) w2[r] = sv.rosenblatt(rows[r])[3];
  CHECK(ks_statistic_uniform(w2) < ks_critical_value(rows.size(), 0.01));
}

TEST_CASE("bad input rows are reported with their index") {
  auto sv = make_sv4();
  std::vector<std::vector<double>> rows = {{0.5, 0.5, 0.5, 0.5}, {0.2, 1.5, 0.3, 0.4}};
  CHECK_THROWS_AS(sv.loglik(rows), EvaluationError);
}
