#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "pvc/fit.hpp"
#include "pvc/optim.hpp"
#include "pvc/presets.hpp"

using namespace pvc;

TEST_CASE("golden-section minimizer") {
  double x = golden_section_min([](double t) { return (t - 0.3) * (t - 0.3); }, -1.0, 1.0);
  CHECK(x == doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("nelder-mead on a shifted quadratic") {
  auto obj = [](const std::vector<double>& p) {
    double a = p[0] - 1.5, b = p[1] + 0.25;
    return a * a + 2.0 * b * b + 0.7;
  };
  auto res = nelder_mead(obj, {0.0, 0.0}, 0.5, 1e-12, 5000);
  CHECK(res.converged);
  CHECK(res.x[0] == doctest::Approx(1.5).epsilon(1e-4));
  CHECK(res.x[1] == doctest::Approx(-0.25).epsilon(1e-3));
  CHECK(res.fmin == doctest::Approx(0.7).epsilon(1e-10));
}

TEST_CASE("pseudo observations are scaled ranks") {
  std::vector<std::vector<double>> data = {{0.2, 5.0}, {0.9, -1.0}, {0.5, 2.0}};
  auto u = pseudo_obs(data);
  CHECK(u[0][0] == doctest::Approx(0.25));
  CHECK(u[1][0] == doctest::Approx(0.75));
  CHECK(u[2][0] == doctest::Approx(0.5));
  CHECK(u[0][1] == doctest::Approx(0.75));
  CHECK(u[1][1] == doctest::Approx(0.25));
  CHECK(u[2][1] == doctest::Approx(0.5));

  std::vector<std::vector<double>> flat = {{1.0, 2.0}, {1.0, 3.0}};
  CHECK_THROWS_AS(pseudo_obs(flat), ParameterError);
}

TEST_CASE("single-edge ml fit recovers a known parameter") {
  auto c = BivariateCopula::frank(4.0);
  auto pairs = c.sample(20000, 13);
  auto fit = detail::fit_edge_ml(Family::Frank, pairs, FitOptions());
  CHECK(fit.params[0] == doctest::Approx(4.0).epsilon(0.05));

  auto cb = BivariateCopula::bb1(2.0, 2.0);
  auto pb = cb.sample(20000, 14);
  auto fb = detail::fit_edge_ml(Family::Bb1, pb, FitOptions());
  CHECK(fb.params[0] == doctest::Approx(2.0).epsilon(0.15));
  CHECK(fb.params[1] == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("stepwise fit recovers a simplified model and joint fit does not degrade it") {
  auto dgp = presets::ex4(5.74, 64, 16);
  auto data = dgp.sample(8000, 21);

  ModelSpec model = presets::frank_pfrank_model();
  FitOptions opts;
  opts.pfrank_grid = 64;
  opts.pfrank_quad = 16;
  auto s = fit_stepwise(model, data, opts);
  REQUIRE(s.theta.size() == 3);
  CHECK(s.theta[0] == doctest::Approx(5.74).epsilon(0.06));
  CHECK(s.theta[1] == doctest::Approx(5.74).epsilon(0.06));
  CHECK(s.theta[2] == doctest::Approx(5.74).epsilon(0.25));

  auto j = fit_joint(model, data, s.theta, opts);
  CHECK(j.loglik >= s.loglik - 1e-6);
}

TEST_CASE("fits are deterministic") {
  auto dgp = presets::ex4(5.74, 64, 16);
  auto data = dgp.sample(2000, 33);
  ModelSpec model = presets::frank_pfrank_model();
  FitOptions opts;
  opts.pfrank_grid = 64;
  opts.pfrank_quad = 16;
  auto a = fit_stepwise(model, data, opts);
  auto b = fit_stepwise(model, data, opts);
  CHECK(a.theta == b.theta);
  CHECK(a.loglik == b.loglik);
}

TEST_CASE("population-level parameters of the averaged approximation") {
  // DGP with conditional FGM(u2): the limit second-tree FGM parameter is the
  // average 1/2.
  auto dgp = presets::ex3();
  ModelSpec model(3);
  model.family(1, 2) = Family::Fgm;
  auto th = pvc_limit_params(dgp, model, IntegrationSpec::quadrature(24));
  REQUIRE(th.size() == 1);
  CHECK(th[0] == doctest::Approx(0.5).epsilon(5e-3));
}

TEST_CASE("replication seeds are distinct and stable") {
  auto s1 = replication_seed(42, 500, 1);
  auto s2 = replication_seed(42, 500, 2);
  auto s3 = replication_seed(42, 2500, 1);
  CHECK(s1 != s2);
  CHECK(s1 != s3);
  CHECK(s1 == replication_seed(42, 500, 1));
}

TEST_CASE("small replication study produces paired statistics") {
  auto dgp = presets::ex4(5.74, 64, 16);
  ModelSpec model = presets::frank_pfrank_model();
  FitOptions opts;
  opts.pfrank_grid = 64;
  opts.pfrank_quad = 16;
  auto rep = replication_study(dgp, model, {300}, 8, 5, opts);
  CHECK(rep.rows.size() == 8);
  CHECK(rep.summaries.size() == 3);  // one per parameter coordinate
  for (const auto& s : rep.summaries) {
    CHECK(s.N == 300);
    CHECK(s.p_value >= 0.0);
    CHECK(s.p_value <= 1.0);
    CHECK(std::isfinite(s.mean_delta));
  }
}
