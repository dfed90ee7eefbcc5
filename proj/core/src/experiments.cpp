// SPDX-License-Identifier: Apache-2.0

#include "ieti/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"

namespace ieti {

namespace {

using nlohmann::json;

std::string fmt(double v, const char* f = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string fmt_cond(const CondEstimate& ce) { return ce.failed ? "---" : fmt(ce.value); }

Precond parse_precond(const std::string& s) {
  if (s == "none") return Precond::None;
  if (s == "lumped") return Precond::Lumped;
  if (s == "dirichlet") return Precond::Dirichlet;
  throw ConfigError("unknown preconditioner: " + s);
}

BoundaryConfig make_bc(const std::string& name) {
  if (name == "cube-mixed") return BoundaryConfig::cube_mixed();
  if (name == "all-dirichlet") return BoundaryConfig::all_dirichlet();
  if (name == "all-neumann" || name == "torus-neumann") return BoundaryConfig::all_neumann();
  if (name == "torus-mixed") return BoundaryConfig::torus_mixed();
  throw ConfigError("unknown boundary layout: " + name);
}

std::pair<PatchDecomposition, ControlGraph> build_geometry(const ExperimentConfig& cfg, int size,
                                                           int s_h, const std::string& bc_name) {
  const BoundaryConfig bc = make_bc(bc_name);
  if (cfg.geometry == "cube") return build_cube_decomposition(size, s_h, bc);
  if (cfg.geometry == "torus") return build_torus_decomposition(size, s_h, bc);
  throw ConfigError("unknown geometry: " + cfg.geometry);
}

json cond_json(const CondEstimate& ce) {
  if (ce.failed) return "failed";
  return ce.value;
}

json report_json(const SolveReport& rep) {
  json j;
  j["n"] = rep.n;
  j["m_r"] = rep.m_r;
  j["n_gp"] = rep.n_gp;
  j["n_p"] = rep.n_p;
  j["iterations"] = rep.iterations;
  j["converged"] = rep.converged;
  j["residuals"] = rep.residuals;
  j["singular_subdomains"] = rep.singular_subdomains;
  j["connected"] = std::vector<int>(rep.connected.begin(), rep.connected.end());
  j["coarse_singular"] = rep.coarse_singular;
  j["cond_Krr"] = cond_json(rep.cond_Krr);
  j["cond_F"] = cond_json(rep.cond_F);
  j["cond_S"] = cond_json(rep.cond_S);
  j["cond_precond_S"] = cond_json(rep.cond_precond_S);
  j["eps_B"] = rep.eps_B;
  j["max_jump_rel"] = rep.max_jump_rel;
  j["time_setup"] = rep.time_setup;
  j["time_pcg"] = rep.time_pcg;
  j["time_total"] = rep.time_total;
  // PCG runs on the negated interface operator, which is positive definite;
  // condition numbers use absolute eigenvalues throughout.
  j["sign_convention"] = "cg on negated interface operator";
  return j;
}

struct SolvedRow {
  SolveResult res;
  bool ok = true;  // construction succeeded
  std::string error;
};

SolvedRow run_one(const ExperimentConfig& cfg, int size, int s_h, const std::string& bc_name,
                  bool belt, Precond precond, bool estimate_conditions) {
  SolvedRow row;
  try {
    auto [dec, graph] = build_geometry(cfg, size, s_h, bc_name);
    const GaugeTree tree = build_gauge_tree(graph, dec, belt, cfg.tie_break_seed);
    SolveOptions opt;
    opt.precond = precond;
    opt.tol = cfg.tol;
    opt.estimate_conditions = estimate_conditions;
    row.res = solve_ieti(dec, graph, tree, ManufacturedCase::trig(), opt);
  } catch (const std::exception& ex) {
    row.ok = false;
    row.error = ex.what();
  }
  return row;
}

}  // namespace

std::string report_to_json(const SolveReport& rep) { return report_json(rep).dump(2); }

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("bad JSON config: ") + ex.what());
  }

  ExperimentConfig cfg;
  cfg.geometry = j.value("geometry", cfg.geometry);
  cfg.bc = j.value("bc", cfg.bc);
  auto list_of = [&j](const char* key, const char* alt, std::vector<int> dflt) {
    const char* k = j.contains(key) ? key : (j.contains(alt) ? alt : nullptr);
    if (!k) return dflt;
    if (j[k].is_array()) return j[k].get<std::vector<int>>();
    return std::vector<int>{j[k].get<int>()};
  };
  cfg.s_h_list = list_of("s_h", "s_h_list", cfg.s_h_list);
  cfg.s_H_list = list_of("s_H", "n_ring", cfg.s_H_list);
  if (j.contains("precond")) cfg.precond = parse_precond(j["precond"].get<std::string>());
  cfg.tol = j.value("tol", cfg.tol);
  cfg.belt = j.value("belt", cfg.belt);
  cfg.tie_break_seed = j.value("seed", cfg.tie_break_seed);
  cfg.validate();
  return cfg;
}

void ExperimentConfig::validate() const {
  if (s_h_list.empty() || s_H_list.empty()) throw ConfigError("empty refinement list");
  if (!(tol > 0.0)) throw ConfigError("tolerance must be positive");
  for (int v : s_h_list)
    if (v < 1) throw ConfigError("s_h must be >= 1");
  for (int v : s_H_list)
    if (v < 1) throw ConfigError("size parameter must be >= 1");
  if (geometry != "cube" && geometry != "torus") throw ConfigError("unknown geometry: " + geometry);
}

ExperimentResult run_convergence(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult out;
  std::ostringstream csv;
  csv << "s_h,n,it,eps_B,rate\n";
  json sidecar = json::array();

  const int s_H = cfg.s_H_list.front();
  double prev_eps = 0.0;
  int prev_sh = 0;
  std::vector<double> lx, ly;
  for (int s_h : cfg.s_h_list) {
    SolvedRow row = run_one(cfg, s_H, s_h, cfg.bc, cfg.belt, cfg.precond, false);
    if (!row.ok) {
      csv << s_h << ",,,," << "\n";
      out.exit_code = 2;
      sidecar.push_back({{"s_h", s_h}, {"error", row.error}});
      continue;
    }
    const SolveReport& rep = row.res.report;
    if (!rep.converged) out.exit_code = 3;
    std::string rate;
    if (prev_sh > 0)
      rate = fmt(std::log(rep.eps_B / prev_eps) / std::log(double(s_h) / prev_sh));
    csv << s_h << ',' << rep.n << ',' << rep.iterations << ',' << fmt(rep.eps_B, "%.10g") << ','
        << rate << "\n";
    lx.push_back(std::log(double(s_h)));
    ly.push_back(std::log(rep.eps_B));
    prev_eps = rep.eps_B;
    prev_sh = s_h;
    json jr = report_json(rep);
    jr["s_h"] = s_h;
    jr["s_H"] = s_H;
    sidecar.push_back(jr);
  }

  // least-squares slope of log(eps_B) against log(s_h)
  double slope = 0.0;
  if (lx.size() >= 2) {
    double mx = 0, my = 0;
    for (size_t i = 0; i < lx.size(); ++i) {
      mx += lx[i];
      my += ly[i];
    }
    mx /= lx.size();
    my /= ly.size();
    double num = 0, den = 0;
    for (size_t i = 0; i < lx.size(); ++i) {
      num += (lx[i] - mx) * (ly[i] - my);
      den += (lx[i] - mx) * (lx[i] - mx);
    }
    slope = num / den;
  }
  json top;
  top["rows"] = sidecar;
  top["slope"] = slope;
  out.csv = csv.str();
  out.json = top.dump(2);
  return out;
}

ExperimentResult run_torus_study(const ExperimentConfig& cfg) {
  ExperimentConfig tc = cfg;
  tc.geometry = "torus";
  tc.validate();

  ExperimentResult out;
  std::ostringstream csv;
  csv << "config,N,s_h,cond_Krr,cond_F,cond_S,it,eps_B\n";
  json sidecar = json::array();

  struct Row {
    const char* name;
    const char* bc;
    bool belt;
  };
  const Row layouts[] = {{"mixed", "torus-mixed", true},
                         {"neumann", "torus-neumann", false},
                         {"neumann+belt", "torus-neumann", true}};

  const int s_h = tc.s_h_list.front();
  for (int N : tc.s_H_list) {
    for (const Row& lay : layouts) {
      SolvedRow row = run_one(tc, N, s_h, lay.bc, lay.belt, tc.precond, true);
      if (!row.ok) {
        csv << lay.name << ',' << N << ',' << s_h << ",---,---,---,," << "\n";
        sidecar.push_back({{"config", lay.name}, {"N", N}, {"error", row.error}});
        continue;
      }
      const SolveReport& rep = row.res.report;
      csv << lay.name << ',' << N << ',' << s_h << ',' << fmt_cond(rep.cond_Krr) << ','
          << fmt_cond(rep.cond_F) << ',' << fmt_cond(rep.cond_S) << ',' << rep.iterations << ','
          << fmt(rep.eps_B, "%.10g") << "\n";
      json jr = report_json(rep);
      jr["config"] = lay.name;
      jr["N"] = N;
      jr["s_h"] = s_h;
      sidecar.push_back(jr);
    }
  }
  out.csv = csv.str();
  out.json = json{{"rows", sidecar}}.dump(2);
  return out;
}

ExperimentResult run_scalability(const ExperimentConfig& cfg, int test) {
  cfg.validate();
  if (test < 1 || test > 3) throw ConfigError("scalability test must be 1, 2 or 3");

  std::vector<std::pair<int, int>> rows;  // (s_H, s_h)
  if (test == 1) {
    const int s_H = cfg.s_H_list.front();
    for (int s_h : cfg.s_h_list) rows.emplace_back(s_H, s_h);
  } else if (test == 2) {
    for (const auto p : {std::pair{2, 8}, std::pair{4, 4}, std::pair{8, 2}}) rows.push_back(p);
  } else {
    const int s_h = cfg.s_h_list.front();
    for (int s_H : cfg.s_H_list) rows.emplace_back(s_H, s_h);
  }

  ExperimentResult out;
  std::ostringstream csv;
  csv << "s_H,s_h,n,m_r,n_gp,cond_S,cond_MLS,cond_MDS,it_S,it_ML,it_MD,eps_B\n";
  json sidecar = json::array();

  for (const auto& [s_H, s_h] : rows) {
    const SolvedRow none = run_one(cfg, s_H, s_h, cfg.bc, cfg.belt, Precond::None, false);
    const SolvedRow lump = run_one(cfg, s_H, s_h, cfg.bc, cfg.belt, Precond::Lumped, false);
    const SolvedRow diri = run_one(cfg, s_H, s_h, cfg.bc, cfg.belt, Precond::Dirichlet, false);
    if (!none.ok || !lump.ok || !diri.ok) {
      out.exit_code = 2;
      csv << s_H << ',' << s_h << ",,,,,,,,,," << "\n";
      sidecar.push_back({{"s_H", s_H},
                         {"s_h", s_h},
                         {"error", !none.ok ? none.error : (!lump.ok ? lump.error : diri.error)}});
      continue;
    }
    const SolveReport& rn = none.res.report;
    const SolveReport& rl = lump.res.report;
    const SolveReport& rd = diri.res.report;
    if (!rn.converged || !rl.converged || !rd.converged) out.exit_code = 3;
    csv << s_H << ',' << s_h << ',' << rd.n << ',' << rd.m_r << ',' << rd.n_gp << ','
        << fmt_cond(rn.cond_S) << ',' << fmt_cond(rl.cond_precond_S) << ','
        << fmt_cond(rd.cond_precond_S) << ',' << rn.iterations << ',' << rl.iterations << ','
        << rd.iterations << ',' << fmt(rd.eps_B, "%.10g") << "\n";
    json jr;
    jr["s_H"] = s_H;
    jr["s_h"] = s_h;
    jr["none"] = report_json(rn);
    jr["lumped"] = report_json(rl);
    jr["dirichlet"] = report_json(rd);
    sidecar.push_back(jr);
  }
  out.csv = csv.str();
  out.json = json{{"test", test}, {"rows", sidecar}}.dump(2);
  return out;
}

ExperimentResult run_appendix_ratios(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.geometry != "cube") throw ConfigError("ratio table requires the cube geometry");

  ExperimentResult out;
  std::ostringstream csv;
  csv << "s_H,s_h,cotree_counted,cotree_analytic,wire_counted,wire_analytic,"
         "n_counted,n_analytic,n_gp,r_lambda_pct\n";
  json sidecar = json::array();

  for (int s_H : cfg.s_H_list) {
    for (int s_h : cfg.s_h_list) {
      try {
        auto [dec, graph] = build_geometry(cfg, s_H, s_h, cfg.bc);
        const GaugeTree tree = build_gauge_tree(graph, dec, cfg.belt, cfg.tie_break_seed);
        const int counted = cotree_wire_count(tree, graph, dec);
        const int analytic = 2 * s_H * s_H * s_H + 3 * s_H * s_H;
        int wire = 0;
        for (int e = 0; e < graph.num_edges(); ++e)
          if (graph.edge_has(e, flags::wire_basket)) ++wire;
        const int wire_ana = 3 * s_h * s_H * (s_H + 1) * (s_H + 1);
        int n = 0;
        for (const auto& em : graph.patch_edge_global) n += static_cast<int>(em.size());
        const int n_ana = 3 * s_H * s_H * s_H * s_h * (s_h + 1) * (s_h + 1);
        const double r_lambda = 2.0 / (3.0 * s_h * (s_h + 1) * (s_h + 1));
        if (counted != analytic || wire != wire_ana || n != n_ana) out.exit_code = 2;
        csv << s_H << ',' << s_h << ',' << counted << ',' << analytic << ',' << wire << ','
            << wire_ana << ',' << n << ',' << n_ana << ',' << tree.n_gp << ','
            << fmt(100.0 * r_lambda, "%.2f") << "\n";
        sidecar.push_back({{"s_H", s_H},
                           {"s_h", s_h},
                           {"cotree_counted", counted},
                           {"cotree_analytic", analytic},
                           {"n_gp", tree.n_gp},
                           {"r_lambda", r_lambda}});
      } catch (const std::exception& ex) {
        out.exit_code = 2;
        csv << s_H << ',' << s_h << ",,,,,,,," << "\n";
        sidecar.push_back({{"s_H", s_H}, {"s_h", s_h}, {"error", ex.what()}});
      }
    }
  }
  out.csv = csv.str();
  out.json = json{{"rows", sidecar}}.dump(2);
  return out;
}

ExperimentResult run_single_solve(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult out;
  const SolvedRow row = run_one(cfg, cfg.s_H_list.front(), cfg.s_h_list.front(), cfg.bc,
                                cfg.belt, cfg.precond, true);
  if (!row.ok) {
    out.exit_code = 2;
    out.json = json{{"error", row.error}}.dump(2);
    out.csv = "error\n" + row.error + "\n";
    return out;
  }
  const SolveReport& rep = row.res.report;
  if (!rep.converged) out.exit_code = 3;
  std::ostringstream csv;
  csv << "n,m_r,n_gp,it,cond_S,cond_precond_S,cond_F,cond_Krr,eps_B,max_jump_rel\n"
      << rep.n << ',' << rep.m_r << ',' << rep.n_gp << ',' << rep.iterations << ','
      << fmt_cond(rep.cond_S) << ',' << fmt_cond(rep.cond_precond_S) << ','
      << fmt_cond(rep.cond_F) << ',' << fmt_cond(rep.cond_Krr) << ','
      << fmt(rep.eps_B, "%.10g") << ',' << fmt(rep.max_jump_rel) << "\n";
  out.csv = csv.str();
  out.json = report_json(rep).dump(2);
  return out;
}

void write_outputs(const ExperimentResult& res, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << res.csv;
    return;
  }
  std::ofstream csv(out_path);
  if (!csv) throw ConfigError("cannot write output file: " + out_path);
  csv << res.csv;
  std::ofstream js(out_path + ".json");
  js << res.json << "\n";
}

}  // namespace ieti
