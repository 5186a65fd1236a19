#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "pvc/dvine.hpp"
#include "pvc/fit.hpp"
#include "pvc/svc.hpp"

namespace pvc {
namespace presets {

// 3-margin DGP with an asymmetric-FGM first pair, independent second pair,
// and conditional FGM(1-2u2) middle edge. The implied (1,3) margin has
// quartic sections; its closed form is ex1_c13 below.
inline DVineSpec ex1(double gamma = 1.0) {
  DVineSpec spec(3);
  spec.set_edge(1, 1, ConditionalEdge::fixed(BivariateCopula::asym_fgm(gamma)));
  spec.set_edge(2, 1, ConditionalEdge::fixed(BivariateCopula::independence()));
  spec.set_edge(1, 2, ConditionalEdge::mapped(Family::Fgm, ParamMap::unary([](double u2) {
                        return std::vector<double>{1.0 - 2.0 * u2};
                      })));
  return spec;
}

inline double ex1_c13_closed_form(double u1, double u3, double gamma) {
  return u1 * u3 *
         (gamma * (u1 - 3.0 * u1 * u1 + 2.0 * u1 * u1 * u1) * (1.0 - u3) + 3.0) / 3.0;
}

// 5-margin DGP: independence in the first tree, conditional FGM(g(u_mid))
// in the second, conditional independence above.
inline DVineSpec fgm5(std::function<double(double)> g = [](double u) { return 1.0 - 2.0 * u; }) {
  DVineSpec spec(5);
  for (int i = 1; i <= 3; ++i)
    spec.set_edge(i, 2, ConditionalEdge::mapped(Family::Fgm, ParamMap::unary([g](double u) {
                          return std::vector<double>{g(u)};
                        })));
  return spec;
}

// 3-margin DGP with independent first-tree pairs and conditional FGM(g(u2));
// default g(u2) = u2, whose first-order partial copula is FGM(1/2).
inline DVineSpec ex3(std::function<double(double)> g = [](double u) { return u; }) {
  DVineSpec spec(3);
  spec.set_edge(1, 2, ConditionalEdge::mapped(Family::Fgm, ParamMap::unary([g](double u2) {
                        return std::vector<double>{g(u2)};
                      })));
  return spec;
}

// Simplified 3-margin DGP: Frank pairs in the first tree and the partial
// Frank copula in the second; satisfies the simplifying assumption.
inline DVineSpec ex4(double theta = 5.74, int pfrank_grid = 200, int pfrank_quad = 32) {
  DVineSpec spec(3);
  spec.set_edge(1, 1, ConditionalEdge::fixed(BivariateCopula::frank(theta)));
  spec.set_edge(2, 1, ConditionalEdge::fixed(BivariateCopula::frank(theta)));
  spec.set_edge(1, 2, ConditionalEdge::fixed(
                          BivariateCopula::partial_frank(theta, pfrank_grid, pfrank_quad)));
  return spec;
}

// Trivariate Frank copula as a D-vine: Frank pairs in the first tree plus
// the exact (non-simplified) conditional copula in the second.
inline DVineSpec frank3(double theta = 5.74) {
  DVineSpec spec(3);
  spec.set_edge(1, 1, ConditionalEdge::fixed(BivariateCopula::frank(theta)));
  spec.set_edge(2, 1, ConditionalEdge::fixed(BivariateCopula::frank(theta)));
  spec.set_edge(1, 2, ConditionalEdge::frank3(theta));
  return spec;
}

// Sigmoid-driven conditional Sarmanov parameter; maps (0,1) onto
// (-0.2, sqrt(7)/5), the full Sarmanov range endpoint included in the limit.
inline double sarmanov3_g(double u2) {
  auto S = [](double x) { return 1.0 / (1.0 + std::exp(x)); };
  double f = 1.0 - 2.0 * S(10.0 * (u2 - 0.5)) + 2.0 * (1.0 - 2.0 * u2) * S(-5.0);
  return 0.1 * (std::sqrt(7.0) + 1.0) * (1.0 - f) - 0.2;
}

// 3-margin DGP: BB1(2,2) pairs in the first tree and a conditional Sarmanov
// copula with sigmoid-driven parameter in the second.
inline DVineSpec sarmanov3(double bb1_theta = 2.0, double bb1_delta = 2.0) {
  DVineSpec spec(3);
  spec.set_edge(1, 1, ConditionalEdge::fixed(BivariateCopula::bb1(bb1_theta, bb1_delta)));
  spec.set_edge(2, 1, ConditionalEdge::fixed(BivariateCopula::bb1(bb1_theta, bb1_delta)));
  spec.set_edge(1, 2, ConditionalEdge::mapped(Family::Sarmanov, ParamMap::unary([](double u2) {
                        return std::vector<double>{sarmanov3_g(u2)};
                      })));
  return spec;
}

// Parametric models used in the replication studies.
inline ModelSpec frank_pfrank_model() {
  ModelSpec m(3);
  m.family(1, 1) = Family::Frank;
  m.family(2, 1) = Family::Frank;
  m.family(1, 2) = Family::PartialFrank;
  return m;
}

inline ModelSpec bb1_psarmanov_model() {
  ModelSpec m(3);
  m.family(1, 1) = Family::Bb1;
  m.family(2, 1) = Family::Bb1;
  m.family(1, 2) = Family::PartialSarmanov;
  return m;
}

inline DVineSpec by_name(const std::string& name, double param) {
  if (name == "ex1") return ex1(param == 0.0 ? 1.0 : param);
  if (name == "fgm5") return fgm5();
  if (name == "ex3") return ex3();
  if (name == "ex4") return ex4(param == 0.0 ? 5.74 : param);
  if (name == "frank3" || name == "ex5") return frank3(param == 0.0 ? 5.74 : param);
  if (name == "sarmanov3" || name == "ex6") return sarmanov3();
  throw ParameterError("unknown dgp preset '" + name + "'");
}

}  // namespace presets
}  // namespace pvc
