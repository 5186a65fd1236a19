// Batch front end: named experiments, PVC construction, simulation, fitting,
// and KLD scans, with deterministic CSV outputs and a hashed manifest.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "pvc/csv.hpp"
#include "pvc/fit.hpp"
#include "pvc/kld.hpp"
#include "pvc/presets.hpp"
#include "pvc/pvc_build.hpp"

using nlohmann::json;
using namespace pvc;

namespace {

struct Options {
  std::string experiment;
  std::string dgp = "ex1";
  std::string model;
  double param = 0.0;
  std::vector<std::int64_t> N_list;
  int R = 200;
  std::uint64_t seed = 42;
  std::string out = "out";
  int order = 48;
  std::int64_t mc_n = 1'000'000;
  std::int64_t N = 0;
  std::string first_tree = "asymfgm";
  std::string g = "u";
};

void apply_config_file(Options& o, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path);
  json j = json::parse(in);
  if (j.contains("experiment")) o.experiment = j["experiment"];
  if (j.contains("dgp")) o.dgp = j["dgp"];
  if (j.contains("model")) o.model = j["model"];
  if (j.contains("param")) o.param = j["param"];
  if (j.contains("N_list")) o.N_list = j["N_list"].get<std::vector<std::int64_t>>();
  if (j.contains("R")) o.R = j["R"];
  if (j.contains("seed")) o.seed = j["seed"];
  if (j.contains("out")) o.out = j["out"];
  if (j.contains("order")) o.order = j["order"];
  if (j.contains("mc_n")) o.mc_n = j["mc_n"];
  if (j.contains("N")) o.N = j["N"];
  if (j.contains("first_tree")) o.first_tree = j["first_tree"];
  if (j.contains("g")) o.g = j["g"];
}

std::string timestamp() {
  auto now = std::chrono::system_clock::now();
  auto t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::function<double(double)> g_by_name(const std::string& name) {
  if (name == "1-2u") return [](double u) { return 1.0 - 2.0 * u; };
  if (name == "u") return [](double u) { return u; };
  if (name == "const" || name == "0.5") return [](double) { return 0.5; };
  throw ParameterError("unknown g preset '" + name + "' (use 1-2u, u, const)");
}

ModelSpec model_by_name(const std::string& name) {
  if (name == "frank_pfrank" || name.empty()) return presets::frank_pfrank_model();
  if (name == "bb1_psarmanov") return presets::bb1_psarmanov_model();
  throw ParameterError("unknown model '" + name + "' (use frank_pfrank, bb1_psarmanov)");
}

void emit_replication(const ReplicationReport& rep, const std::filesystem::path& dir,
                      const std::string& prefix, Manifest& man) {
  CsvWriter rows({"N", "r", "coord", "theta_s", "theta_j", "delta"});
  for (const auto& row : rep.rows) {
    if (!row.ok) continue;
    for (std::size_t c = 0; c < row.theta_s.size(); ++c)
      rows.append(std::vector<double>{static_cast<double>(row.N), static_cast<double>(row.r),
                                      static_cast<double>(c), row.theta_s[c], row.theta_j[c],
                                      row.theta_s[c] - row.theta_j[c]});
  }
  write_csv(dir, prefix + "_replications.csv", rows, man);

  CsvWriter sum({"N", "coord", "mean_s", "mean_j", "mean_delta", "se_delta", "t_stat", "p_value"});
  for (const auto& s : rep.summaries)
    sum.append(std::vector<double>{static_cast<double>(s.N), static_cast<double>(s.coord),
                                   s.mean_s, s.mean_j, s.mean_delta, s.se_delta, s.t_stat,
                                   s.p_value});
  write_csv(dir, prefix + "_summary.csv", sum, man);
}

void run_ex1(const Options& o, Manifest& man) {
  double gamma = o.param == 0.0 ? 1.0 : o.param;
  auto dgp = presets::ex1(gamma);
  auto margin = implicit_margin(dgp, 1, 2, 32, 400);
  CsvWriter grid({"u1", "u3", "closed_form", "quadrature"});
  for (int a = 0; a <= 20; ++a)
    for (int b = 0; b <= 20; ++b) {
      double u1 = a / 20.0, u3 = b / 20.0;
      grid.append(std::vector<double>{u1, u3, presets::ex1_c13_closed_form(u1, u3, gamma),
                                      margin.cdf(u1, u3)});
    }
  write_csv(o.out, "ex1_margin.csv", grid, man);

  auto pvc = build_pvc(dgp);
  auto pvc_margin = implicit_margin(pvc.spec, 1, 2, 32, 400);
  double max_dev = 0.0;
  for (int a = 0; a <= 20; ++a)
    for (int b = 0; b <= 20; ++b)
      max_dev = std::max(max_dev,
                         std::abs(pvc_margin.cdf(a / 20.0, b / 20.0) - (a / 20.0) * (b / 20.0)));

  CsvWriter dep({"quantity", "value"});
  dep.append({"gamma", format_real(gamma)});
  dep.append({"rho_margin", format_real(margin.spearman_rho())});
  dep.append({"tau_margin", format_real(margin.kendall_tau())});
  dep.append({"rho_reference", format_real(-gamma / 1080.0)});
  dep.append({"tau_reference", format_real(-gamma / 135.0)});
  dep.append({"pvc_margin_max_dev_from_independence", format_real(max_dev)});
  write_csv(o.out, "ex1_dependence.csv", dep, man);
}

void run_fgm5(const Options& o, Manifest& man) {
  auto dgp = presets::fgm5();
  PvcBuildConfig cfg;
  cfg.sample_count = o.mc_n;
  cfg.seed = o.seed;
  cfg.tree_family[3] = Family::Fgm;
  cfg.tree_family[4] = Family::Fgm;
  auto res = build_pvc(dgp, cfg);

  CsvWriter diag({"i", "j", "mode", "param0", "ks_a", "ks_b"});
  for (const auto& d : res.diagnostics)
    diag.append(std::vector<std::string>{std::to_string(d.i), std::to_string(d.j), d.mode,
                                         d.params.empty() ? "" : format_real(d.params[0]),
                                         format_real(d.ks_stat_a), format_real(d.ks_stat_b)});
  write_csv(o.out, "fgm5_pvc_diagnostics.csv", diag, man);

  CsvWriter dens({"a", "b", "fourth_tree_density"});
  for (int a = 1; a < 20; ++a)
    for (int b = 1; b < 20; ++b)
      dens.append(std::vector<double>{a / 20.0, b / 20.0,
                                      fgm5::fourth_tree_density(a / 20.0, b / 20.0)});
  write_csv(o.out, "fgm5_fourth_tree_density.csv", dens, man);
}

void run_ex3(const Options& o, Manifest& man) {
  auto dgp = presets::ex3();
  CsvWriter csv({"theta_tree2", "kld_tree2"});
  for (double delta : {-0.2, -0.1, -0.05, 0.0, 0.05, 0.1, 0.2}) {
    SimplifiedVineSpec approx(3);
    approx.edge(1, 2) = BivariateCopula::fgm(0.5 + delta);
    csv.append(std::vector<double>{0.5 + delta,
                                   kld_per_tree(dgp, approx, 2, IntegrationSpec::quadrature(o.order))});
  }
  write_csv(o.out, "ex3_tree2_kld.csv", csv, man);
}

void run_study(const Options& o, Manifest& man, const std::string& name) {
  DVineSpec dgp = presets::by_name(name, o.param);
  ModelSpec model =
      name == "ex6" ? presets::bb1_psarmanov_model() : presets::frank_pfrank_model();
  std::vector<std::int64_t> Ns = o.N_list;
  if (o.N > 0) Ns = {o.N};
  if (Ns.empty()) {
    if (name == "ex4") Ns = {500, 2500};
    else if (name == "ex5") Ns = {25000};
    else Ns = {500};
  }
  auto rep = replication_study(dgp, model, Ns, o.R, o.seed);
  emit_replication(rep, o.out, name, man);
}

int run_experiment(const Options& o, Manifest& man) {
  if (o.experiment == "ex1") run_ex1(o, man);
  else if (o.experiment == "fgm5") run_fgm5(o, man);
  else if (o.experiment == "ex3") run_ex3(o, man);
  else if (o.experiment == "ex4" || o.experiment == "ex5" || o.experiment == "ex6")
    run_study(o, man, o.experiment);
  else {
    std::fprintf(stderr, "unknown experiment '%s'\n", o.experiment.c_str());
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"partial vine copula toolkit"};
  app.require_subcommand(1);

  Options o;
  std::string config_path;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--seed", o.seed, "RNG seed");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--order", o.order, "quadrature order");
    cmd->add_option("--mc-n", o.mc_n, "Monte Carlo sample count");
    cmd->add_option("--N", o.N, "sample size");
    cmd->add_option("--R", o.R, "replication count");
    cmd->add_option("--dgp", o.dgp, "DGP preset name");
    cmd->add_option("--model", o.model, "model name");
    cmd->add_option("--param", o.param, "DGP parameter (gamma/theta)");
    cmd->add_option("--gamma", o.param, "alias for --param");
    cmd->add_option("--first-tree", o.first_tree, "first-tree family for kld-scan");
    cmd->add_option("--g", o.g, "conditional parameter map preset (1-2u, u, const)");
  };

  auto* exp_cmd = app.add_subcommand("experiment", "run a named experiment");
  std::string exp_name;
  exp_cmd->add_option("name", exp_name, "experiment name")->required();
  add_common(exp_cmd);

  auto* build_cmd = app.add_subcommand("build-pvc", "build the PVC of a DGP preset");
  add_common(build_cmd);

  auto* sim_cmd = app.add_subcommand("simulate", "simulate rows from a DGP preset");
  add_common(sim_cmd);

  auto* fit_cmd = app.add_subcommand("fit", "simulate and fit a parametric vine");
  add_common(fit_cmd);

  auto* kld_cmd = app.add_subcommand("kld", "KLD of a DGP from its PVC");
  add_common(kld_cmd);

  auto* scan_cmd = app.add_subcommand("kld-scan", "scan total KLD over the first-tree parameter");
  add_common(scan_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (!config_path.empty()) {
      // File first, then re-apply flags so explicit flags win.
      Options file_opts = o;
      apply_config_file(file_opts, config_path);
      // Merge: a field from the file applies unless the corresponding flag
      // moved it off its default.
      Options defaults;
      auto pick = [](auto flag_val, auto def_val, auto file_val) {
        return flag_val != def_val ? flag_val : file_val;
      };
      o.dgp = pick(o.dgp, defaults.dgp, file_opts.dgp);
      o.model = pick(o.model, defaults.model, file_opts.model);
      o.param = pick(o.param, defaults.param, file_opts.param);
      o.R = pick(o.R, defaults.R, file_opts.R);
      o.seed = pick(o.seed, defaults.seed, file_opts.seed);
      o.experiment = pick(o.experiment, defaults.experiment, file_opts.experiment);
      o.out = pick(o.out, defaults.out, file_opts.out);
      o.order = pick(o.order, defaults.order, file_opts.order);
      o.mc_n = pick(o.mc_n, defaults.mc_n, file_opts.mc_n);
      o.N = pick(o.N, defaults.N, file_opts.N);
      o.first_tree = pick(o.first_tree, defaults.first_tree, file_opts.first_tree);
      o.g = pick(o.g, defaults.g, file_opts.g);
      if (o.N_list.empty()) o.N_list = file_opts.N_list;
    }

    std::filesystem::create_directories(o.out);
    Manifest man;
    int status = 0;

    if (exp_cmd->parsed()) {
      o.experiment = exp_name;
      status = run_experiment(o, man);
    } else if (build_cmd->parsed()) {
      auto dgp = presets::by_name(o.dgp, o.param);
      PvcBuildConfig cfg;
      cfg.sample_count = o.mc_n;
      cfg.seed = o.seed;
      if (o.dgp == "fgm5") {
        cfg.tree_family[3] = Family::Fgm;
        cfg.tree_family[4] = Family::Fgm;
      }
      auto res = build_pvc(dgp, cfg);
      CsvWriter diag({"i", "j", "mode", "params", "ks_a", "ks_b"});
      for (const auto& d : res.diagnostics) {
        std::string ps;
        for (std::size_t k = 0; k < d.params.size(); ++k)
          ps += (k ? ";" : "") + format_real(d.params[k]);
        diag.append(std::vector<std::string>{std::to_string(d.i), std::to_string(d.j), d.mode, ps,
                                             format_real(d.ks_stat_a), format_real(d.ks_stat_b)});
      }
      write_csv(o.out, "pvc_diagnostics.csv", diag, man);
    } else if (sim_cmd->parsed()) {
      auto dgp = presets::by_name(o.dgp, o.param);
      std::int64_t n = o.N > 0 ? o.N : 1000;
      auto rows = dgp.sample(n, o.seed);
      std::vector<std::string> header(dgp.dim());
      for (int k = 0; k < dgp.dim(); ++k) header[k] = "u" + std::to_string(k + 1);
      CsvWriter csv(header);
      for (const auto& r : rows) csv.append(r);
      write_csv(o.out, "samples.csv", csv, man);
    } else if (fit_cmd->parsed()) {
      auto dgp = presets::by_name(o.dgp, o.param);
      ModelSpec model = model_by_name(o.model);
      std::int64_t n = o.N > 0 ? o.N : 25000;
      auto data = dgp.sample(n, o.seed);
      auto s = fit_stepwise(model, data);
      auto jn = fit_joint(model, data, s.theta);
      CsvWriter csv({"mode", "coord", "theta", "loglik", "converged"});
      for (std::size_t c = 0; c < s.theta.size(); ++c)
        csv.append(std::vector<std::string>{"stepwise", std::to_string(c), format_real(s.theta[c]),
                                            format_real(s.loglik), s.converged ? "1" : "0"});
      for (std::size_t c = 0; c < jn.theta.size(); ++c)
        csv.append(std::vector<std::string>{"joint", std::to_string(c), format_real(jn.theta[c]),
                                            format_real(jn.loglik), jn.converged ? "1" : "0"});
      write_csv(o.out, "fit.csv", csv, man);
    } else if (kld_cmd->parsed()) {
      auto dgp = presets::by_name(o.dgp, o.param);
      PvcBuildConfig cfg;
      cfg.sample_count = o.mc_n;
      cfg.seed = o.seed;
      auto res = build_pvc(dgp, cfg);
      auto integ = dgp.dim() <= 3 ? IntegrationSpec::quadrature(o.order)
                                  : IntegrationSpec::monte_carlo(o.mc_n, o.seed);
      auto rep = kld_total(dgp, res.spec, integ);
      CsvWriter csv({"method", "tree", "value", "error"});
      csv.append(std::vector<std::string>{rep.method, "total", format_real(rep.total),
                                          format_real(rep.error_estimate)});
      for (std::size_t j = 0; j < rep.per_tree.size(); ++j)
        csv.append(std::vector<std::string>{rep.method, std::to_string(j + 1),
                                            format_real(rep.per_tree[j]), ""});
      write_csv(o.out, "kld.csv", csv, man);
    } else if (scan_cmd->parsed()) {
      Family first = o.first_tree == "fgm" ? Family::Fgm : Family::AsymFgm;
      auto g = g_by_name(o.g);
      auto grule = gauss_legendre(64);
      double theta_bar = integrate_1d(g, grule);
      DVineSpec dgp(3);
      dgp.set_edge(1, 2, ConditionalEdge::mapped(Family::Fgm, ParamMap::unary([g](double u2) {
                           return std::vector<double>{g(u2)};
                         })));
      CsvWriter csv({"theta12", "kld_total", "kld_tree1", "kld_tree2"});
      for (double th : {-0.1, -0.05, -0.02, 0.0, 0.02, 0.05, 0.1}) {
        SimplifiedVineSpec approx(3);
        approx.edge(1, 1) =
            BivariateCopula::from_tag(family_tag(first), std::vector<double>{th});
        approx.edge(1, 2) = BivariateCopula::fgm(theta_bar);
        auto rep = kld_total(dgp, approx, IntegrationSpec::quadrature(o.order));
        csv.append(std::vector<double>{th, rep.total, rep.per_tree[0], rep.per_tree[1]});
      }
      write_csv(o.out, "kld_scan.csv", csv, man);
    }

    if (status == 0) man.write(o.out, timestamp());
    return status;
  } catch (const ParameterError& e) {
    std::fprintf(stderr, "parameter error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
