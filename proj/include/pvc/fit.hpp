#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "pvc/kld.hpp"
#include "pvc/optim.hpp"
#include "pvc/stats.hpp"
#include "pvc/svc.hpp"

namespace pvc {

inline int worker_count() {
  if (const char* env = std::getenv("PVC_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Rank transform r/(n+1) per column (average ranks for ties).
inline std::vector<std::vector<double>> pseudo_obs(
    std::span<const std::vector<double>> data) {
  if (data.empty()) throw ParameterError("pseudo_obs: empty data");
  std::size_t n = data.size(), d = data[0].size();
  std::vector<std::vector<double>> out(n, std::vector<double>(d));
  std::vector<double> col(n);
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t r = 0; r < n; ++r) col[r] = data[r][k];
    double lo = col[0], hi = col[0];
    for (double v : col) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (lo == hi) throw ParameterError("pseudo_obs: constant column " + std::to_string(k));
    auto ranks = ranks_over_np1(col);
    for (std::size_t r = 0; r < n; ++r) out[r][k] = ranks[r];
  }
  return out;
}

struct FitOptions {
  int pfrank_grid = 64;
  int pfrank_quad = 16;
  double golden_tol = 1e-7;
  double nm_ftol = 1e-10;
  int nm_max_iter = 3000;
};

namespace detail {

struct FamilyShape {
  int n_free;
  std::array<double, 2> lo, hi, init;
};

inline FamilyShape family_shape(Family f) {
  switch (f) {
    case Family::Independence: return {0, {}, {}, {}};
    case Family::Fgm:
    case Family::AsymFgm: return {1, {-0.999, 0}, {0.999, 0}, {0.0, 0}};
    case Family::Frank: return {1, {-30.0, 0}, {30.0, 0}, {1.0, 0}};
    case Family::PartialFrank: return {1, {0.02, 0}, {30.0, 0}, {2.0, 0}};
    case Family::Sarmanov: return {1, {-0.529, 0}, {0.529, 0}, {0.0, 0}};
    case Family::PartialSarmanov: return {2, {-0.529, 0.0}, {0.529, 0.4}, {0.05, 0.05}};
    case Family::Bb1: return {2, {0.05, 1.0}, {8.0, 8.0}, {1.0, 1.5}};
    case Family::Numeric:
      throw ParameterError("numeric copulas have no free parameters to fit");
  }
  return {0, {}, {}, {}};
}

inline BivariateCopula make_copula(Family f, std::span<const double> p, const FitOptions& o) {
  if (f == Family::PartialFrank)
    return BivariateCopula::partial_frank(p[0], o.pfrank_grid, o.pfrank_quad);
  if (f == Family::Frank && std::abs(p[0]) < 1e-6)
    return BivariateCopula::independence();
  return BivariateCopula::from_tag(family_tag(f), p);
}

// Weighted negative log likelihood of one edge family on (a,b) pairs.
inline double edge_negloglik(Family f, std::span<const double> p,
                             std::span<const std::array<double, 2>> pairs,
                             std::span<const double> weights, const FitOptions& o) {
  BivariateCopula cop;
  try {
    cop = make_copula(f, p, o);
  } catch (const ParameterError&) {
    return 1e10;
  }
  double s = 0.0;
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    double dens = cop.pdf(pairs[r][0], pairs[r][1]);
    if (!(dens > 0.0) || !std::isfinite(dens)) return 1e10;
    double lg = std::log(dens);
    s -= weights.empty() ? lg : weights[r] * lg;
  }
  return s;
}

struct EdgeFit {
  std::vector<double> params;
  double negloglik = 0.0;
  bool converged = true;
};

inline EdgeFit fit_edge_ml(Family f, std::span<const std::array<double, 2>> pairs,
                           const FitOptions& o, std::span<const double> weights = {}) {
  FamilyShape sh = family_shape(f);
  EdgeFit out;
  if (sh.n_free == 0) {
    out.negloglik = 0.0;
    return out;
  }
  if (sh.n_free == 1) {
    auto obj = [&](double th) {
      double p[1] = {th};
      return edge_negloglik(f, p, pairs, weights, o);
    };
    double th = golden_section_min(obj, sh.lo[0], sh.hi[0], o.golden_tol);
    out.params = {th};
    out.negloglik = obj(th);
    return out;
  }
  auto obj = [&](const std::vector<double>& p) { return edge_negloglik(f, p, pairs, weights, o); };
  auto res = nelder_mead(obj, {sh.init[0], sh.init[1]}, 0.2, o.nm_ftol, o.nm_max_iter);
  out.params = res.x;
  out.negloglik = res.fmin;
  out.converged = res.converged && res.fmin < 1e9;
  return out;
}

}  // namespace detail

// Parametric simplified-vine model: a family per edge; the parameter vector
// concatenates free edge parameters tree by tree (j ascending, i ascending).
struct ModelSpec {
  int d;
  std::vector<std::vector<Family>> families;  // [j-1][i-1]

  explicit ModelSpec(int dim) : d(dim), families(dim - 1) {
    for (int j = 1; j < d; ++j) families[j - 1].assign(d - j, Family::Independence);
  }

  Family& family(int i, int j) { return families.at(j - 1).at(i - 1); }
  Family family(int i, int j) const { return families.at(j - 1).at(i - 1); }

  int n_params() const {
    int n = 0;
    for (const auto& tree : families)
      for (Family f : tree) n += detail::family_shape(f).n_free;
    return n;
  }

  SimplifiedVineSpec build(std::span<const double> theta,
                           const FitOptions& opts = FitOptions()) const {
    SimplifiedVineSpec spec(d);
    std::size_t pos = 0;
    for (int j = 1; j < d; ++j)
      for (int i = 1; i + j <= d; ++i) {
        Family f = family(i, j);
        int k = detail::family_shape(f).n_free;
        if (pos + k > theta.size()) throw ParameterError("ModelSpec::build: short parameter vector");
        spec.edge(i, j) = detail::make_copula(f, theta.subspan(pos, k), opts);
        pos += k;
      }
    if (pos != theta.size()) throw ParameterError("ModelSpec::build: long parameter vector");
    return spec;
  }
};

struct FitResult {
  std::vector<double> theta;
  double loglik = 0.0;
  std::string mode;
  int iterations = 0;
  bool converged = true;
};

inline FitResult fit_stepwise(const ModelSpec& model, std::span<const std::vector<double>> data,
                              const FitOptions& opts = FitOptions()) {
  int d = model.d;
  std::size_t n = data.size();
  SimplifiedVineSpec spec(d);
  FitResult res;
  res.mode = "stepwise";
  for (int j = 1; j < d; ++j) {
    // Pseudo-observations for this tree from the already-fitted lower trees.
    std::vector<std::vector<std::array<double, 2>>> pairs(d - j,
                                                          std::vector<std::array<double, 2>>(n));
    for (std::size_t r = 0; r < n; ++r) {
      auto t = spec.triangle(data[r]);
      for (int i = 1; i + j <= d; ++i)
        pairs[i - 1][r] = {t.f1[i][j - 1], t.f2[i + j][j - 1]};
    }
    for (int i = 1; i + j <= d; ++i) {
      Family f = model.family(i, j);
      auto ef = detail::fit_edge_ml(f, pairs[i - 1], opts);
      spec.edge(i, j) = detail::make_copula(f, ef.params, opts);
      res.theta.insert(res.theta.end(), ef.params.begin(), ef.params.end());
      res.converged = res.converged && ef.converged;
    }
  }
  res.loglik = spec.loglik(data);
  return res;
}

inline FitResult fit_joint(const ModelSpec& model, std::span<const std::vector<double>> data,
                           std::vector<double> init, const FitOptions& opts = FitOptions()) {
  FitResult res;
  res.mode = "joint";
  if (init.empty() || model.n_params() == 0) {
    res.loglik = model.build({}, opts).loglik(data);
    res.converged = true;
    return res;
  }
  auto obj = [&](const std::vector<double>& th) {
    try {
      return -model.build(th, opts).loglik(data);
    } catch (const ParameterError&) {
      return 1e10;
    } catch (const EvaluationError&) {
      return 1e10;
    }
  };
  double f0 = obj(init);
  auto nm = nelder_mead(obj, init, 0.05, opts.nm_ftol, opts.nm_max_iter);
  res.iterations = nm.iterations;
  std::vector<double> x = nm.fmin <= f0 ? nm.x : init;
  double fx = std::min(nm.fmin, f0);

  // Cyclic coordinate polish.  Nelder-Mead can stall on a collapsed simplex
  // along near-flat ridges of the likelihood, leaving the endpoint dependent
  // on the initial simplex; per-coordinate golden-section sweeps from the
  // simplex endpoint converge to a path-independent stationary point.
  std::size_t p = x.size();
  double width = 0.25;
  for (int sweep = 0; sweep < 40; ++sweep) {
    double before = fx;
    for (std::size_t k = 0; k < p; ++k) {
      auto line = [&](double t) {
        std::vector<double> y = x;
        y[k] = t;
        return obj(y);
      };
      double t = golden_section_min(line, x[k] - width, x[k] + width, 1e-5);
      double ft = line(t);
      if (ft < fx) {
        x[k] = t;
        fx = ft;
      }
    }
    if (before - fx < 1e-6 * (std::abs(fx) + 1.0)) {
      if (width <= 0.02) break;
      width *= 0.5;
    }
  }

  if (fx <= f0) {
    res.theta = std::move(x);
    res.loglik = -fx;
    res.converged = true;
  } else {
    res.theta = std::move(init);
    res.loglik = -f0;
    res.converged = false;
  }
  return res;
}

// Probability limit of the stepwise estimator: tree-by-tree expected
// log-likelihood maximization under the DGP.
inline std::vector<double> pvc_limit_params(const DVineSpec& dgp, const ModelSpec& model,
                                            IntegrationSpec integ = IntegrationSpec::monte_carlo(200'000),
                                            const FitOptions& opts = FitOptions()) {
  int d = model.d;
  // Integration points and weights (weight includes the dgp density for
  // quadrature; MC points are dgp draws with uniform weight).
  std::vector<std::vector<double>> pts;
  std::vector<double> wts;
  if (integ.method == IntegrationSpec::Method::Quadrature) {
    auto rule = gauss_legendre(integ.order);
    std::vector<int> idx(d, 0);
    while (true) {
      std::vector<double> u(d);
      double w = 1.0;
      for (int k = 0; k < d; ++k) {
        u[k] = rule.nodes[idx[k]];
        w *= rule.weights[idx[k]];
      }
      wts.push_back(w * dgp.density(u));
      pts.push_back(std::move(u));
      int k = 0;
      for (; k < d; ++k) {
        if (++idx[k] < integ.order) break;
        idx[k] = 0;
      }
      if (k == d) break;
    }
  } else {
    pts = dgp.sample(integ.mc_n, integ.seed);
    wts.assign(pts.size(), 1.0 / static_cast<double>(pts.size()));
  }

  SimplifiedVineSpec spec(d);
  std::vector<double> theta;
  for (int j = 1; j < d; ++j) {
    std::vector<std::vector<std::array<double, 2>>> pairs(
        d - j, std::vector<std::array<double, 2>>(pts.size()));
    for (std::size_t r = 0; r < pts.size(); ++r) {
      auto t = spec.triangle(pts[r]);
      for (int i = 1; i + j <= d; ++i)
        pairs[i - 1][r] = {t.f1[i][j - 1], t.f2[i + j][j - 1]};
    }
    for (int i = 1; i + j <= d; ++i) {
      Family f = model.family(i, j);
      auto ef = detail::fit_edge_ml(f, pairs[i - 1], opts, wts);
      spec.edge(i, j) = detail::make_copula(f, ef.params, opts);
      theta.insert(theta.end(), ef.params.begin(), ef.params.end());
    }
  }
  return theta;
}

// Joint KLD minimizer over the model's parameter space (pseudo-true
// parameters), by multistart Nelder-Mead from the stepwise limit.
inline std::vector<double> pseudo_true_params(const DVineSpec& dgp, const ModelSpec& model,
                                              IntegrationSpec integ = IntegrationSpec::monte_carlo(200'000),
                                              const FitOptions& opts = FitOptions()) {
  std::vector<double> start = pvc_limit_params(dgp, model, integ, opts);
  if (start.empty()) return start;
  auto obj = [&](const std::vector<double>& th) {
    try {
      return kld_total(dgp, model.build(th, opts), integ).total;
    } catch (const ParameterError&) {
      return 1e10;
    } catch (const EvaluationError&) {
      return 1e10;
    }
  };
  std::vector<double> best = start;
  double fbest = obj(start);
  for (double shift : {0.0, 0.05, -0.05}) {
    std::vector<double> x0 = start;
    for (double& v : x0) v += shift;
    auto nm = nelder_mead(obj, x0, 0.05, opts.nm_ftol, opts.nm_max_iter);
    if (nm.fmin < fbest) {
      fbest = nm.fmin;
      best = nm.x;
    }
  }
  return best;
}

struct ReplicationRow {
  std::int64_t N = 0;
  int r = 0;
  std::vector<double> theta_s, theta_j;
  bool ok = true;
};

struct ReplicationSummary {
  std::int64_t N = 0;
  int coord = 0;
  double mean_s = 0.0, mean_j = 0.0;
  double mean_delta = 0.0, se_delta = 0.0;
  double t_stat = 0.0, p_value = 1.0;
};

struct ReplicationReport {
  std::vector<std::int64_t> N_list;
  int R = 0;
  std::uint64_t seed = 0;
  std::vector<ReplicationRow> rows;
  std::vector<ReplicationSummary> summaries;
  int failures = 0;
};

inline std::uint64_t replication_seed(std::uint64_t base, std::int64_t N, int r) {
  return mix64(mix64(base ^ mix64(static_cast<std::uint64_t>(N))) ^
               static_cast<std::uint64_t>(r) * 0x9e3779b97f4a7c15ull);
}

inline ReplicationReport replication_study(const DVineSpec& dgp, const ModelSpec& model,
                                           std::vector<std::int64_t> N_list, int R,
                                           std::uint64_t seed,
                                           const FitOptions& opts = FitOptions()) {
  if (R < 2) throw ParameterError("replication_study: R >= 2 required");
  ReplicationReport rep;
  rep.N_list = N_list;
  rep.R = R;
  rep.seed = seed;
  rep.rows.resize(N_list.size() * R);

  int nthreads = worker_count();
  std::size_t total = rep.rows.size();
  auto work = [&](std::size_t slot) {
    std::size_t ni = slot / R;
    int r = static_cast<int>(slot % R);
    std::int64_t N = N_list[ni];
    ReplicationRow row;
    row.N = N;
    row.r = r;
    try {
      auto data = dgp.sample(N, replication_seed(seed, N, r));
      auto s = fit_stepwise(model, data, opts);
      auto j = fit_joint(model, data, s.theta, opts);
      row.theta_s = std::move(s.theta);
      row.theta_j = std::move(j.theta);
    } catch (const std::exception&) {
      row.ok = false;
    }
    rep.rows[slot] = std::move(row);
  };
  if (nthreads <= 1) {
    for (std::size_t s = 0; s < total; ++s) work(s);
  } else {
    std::vector<std::thread> pool;
    std::size_t chunk = (total + nthreads - 1) / nthreads;
    for (int t = 0; t < nthreads; ++t) {
      std::size_t lo = t * chunk, hi = std::min(total, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back([&, lo, hi] {
        for (std::size_t s = lo; s < hi; ++s) work(s);
      });
    }
    for (auto& th : pool) th.join();
  }

  int p = model.n_params();
  for (std::size_t ni = 0; ni < N_list.size(); ++ni) {
    std::vector<std::vector<double>> s_by_coord(p), j_by_coord(p);
    for (int r = 0; r < R; ++r) {
      const auto& row = rep.rows[ni * R + r];
      if (!row.ok) {
        ++rep.failures;
        continue;
      }
      for (int c = 0; c < p; ++c) {
        s_by_coord[c].push_back(row.theta_s[c]);
        j_by_coord[c].push_back(row.theta_j[c]);
      }
    }
    for (int c = 0; c < p; ++c) {
      ReplicationSummary sum;
      sum.N = N_list[ni];
      sum.coord = c;
      sum.mean_s = mean(s_by_coord[c]);
      sum.mean_j = mean(j_by_coord[c]);
      auto t = paired_t_test(s_by_coord[c], j_by_coord[c]);
      sum.mean_delta = t.mean_diff;
      sum.se_delta = t.se_diff;
      sum.t_stat = t.t_stat;
      sum.p_value = t.p_value;
      rep.summaries.push_back(sum);
    }
  }
  return rep;
}

}  // namespace pvc
