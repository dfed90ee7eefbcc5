// SPDX-License-Identifier: Apache-2.0
//
// Command-line runner for the study suite: convergence, torus kernel table,
// scalability tests, multiplier-count table, single configured solves.

#include <iostream>

#include <Eigen/Core>

#include "CLI11.hpp"
#include "ieti/experiments.hpp"

namespace {

void add_common(CLI::App* cmd, ieti::ExperimentConfig& cfg, std::string& out,
                std::string& precond, int& threads) {
  cmd->add_option("--precond", precond, "Preconditioner: none, lumped or dirichlet")
      ->check(CLI::IsMember({"none", "lumped", "dirichlet"}));
  cmd->add_option("--tol", cfg.tol, "Relative PCG tolerance")->check(CLI::PositiveNumber);
  cmd->add_flag("--belt,!--no-belt", cfg.belt, "Close loops around topological holes");
  cmd->add_option("--out", out, "CSV output path (JSON sidecar at <out>.json)");
  cmd->add_option("--threads", threads, "Worker threads for the linear algebra");
  cmd->add_option("--seed", cfg.tie_break_seed, "Deterministic tree tie-break seed");
}

void apply_precond(ieti::ExperimentConfig& cfg, const std::string& name) {
  if (name == "none") cfg.precond = ieti::Precond::None;
  else if (name == "lumped") cfg.precond = ieti::Precond::Lumped;
  else cfg.precond = ieti::Precond::Dirichlet;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-primal tearing solver for gauged curl-curl problems"};
  app.require_subcommand(1);

  ieti::ExperimentConfig cfg;
  std::string out, precond = "dirichlet", config_path;
  int threads = 1, test = 1;

  auto* conv = app.add_subcommand("convergence", "Error decay over mesh refinement");
  conv->add_option("--s_h", cfg.s_h_list, "Subdivision levels");
  conv->add_option("--s_H", cfg.s_H_list, "Patches per direction");
  conv->add_option("--bc", cfg.bc, "Boundary layout");
  add_common(conv, cfg, out, precond, threads);

  auto* torus = app.add_subcommand("torus", "Kernel table over torus boundary layouts");
  torus->add_option("--n_ring", cfg.s_H_list, "Patches around the ring");
  torus->add_option("--s_h", cfg.s_h_list, "Subdivision levels");
  add_common(torus, cfg, out, precond, threads);

  auto* sca = app.add_subcommand("scalability", "Scalability studies on the cube");
  sca->add_option("--test", test, "1: fixed s_H, 2: fixed global mesh, 3: fixed s_h")
      ->check(CLI::Range(1, 3));
  sca->add_option("--s_h", cfg.s_h_list, "Subdivision levels");
  sca->add_option("--s_H", cfg.s_H_list, "Patches per direction");
  sca->add_option("--bc", cfg.bc, "Boundary layout");
  add_common(sca, cfg, out, precond, threads);

  auto* ratios = app.add_subcommand("ratios", "Multiplier count table");
  ratios->add_option("--s_h", cfg.s_h_list, "Subdivision levels");
  ratios->add_option("--s_H", cfg.s_H_list, "Patches per direction");
  add_common(ratios, cfg, out, precond, threads);

  auto* solve = app.add_subcommand("solve", "One solve from a JSON config");
  solve->add_option("--config", config_path, "JSON config file")->required();
  add_common(solve, cfg, out, precond, threads);

  CLI11_PARSE(app, argc, argv);
  Eigen::setNbThreads(threads);

  try {
    ieti::ExperimentResult res;
    if (conv->parsed()) {
      apply_precond(cfg, precond);
      if (cfg.s_h_list == std::vector<int>{2}) cfg.s_h_list = {2, 4, 8, 16};
      res = ieti::run_convergence(cfg);
    } else if (torus->parsed()) {
      apply_precond(cfg, precond);
      cfg.geometry = "torus";
      if (cfg.s_H_list == std::vector<int>{2}) cfg.s_H_list = {3, 6};
      res = ieti::run_torus_study(cfg);
    } else if (sca->parsed()) {
      apply_precond(cfg, precond);
      if (test == 1 && cfg.s_h_list == std::vector<int>{2}) cfg.s_h_list = {2, 4, 8, 16};
      if (test == 3 && cfg.s_H_list == std::vector<int>{2}) cfg.s_H_list = {2, 3, 4};
      res = ieti::run_scalability(cfg, test);
    } else if (ratios->parsed()) {
      if (cfg.s_h_list == std::vector<int>{2}) cfg.s_h_list = {1, 2, 4};
      if (cfg.s_H_list == std::vector<int>{2}) cfg.s_H_list = {2, 4};
      res = ieti::run_appendix_ratios(cfg);
    } else {
      ieti::ExperimentConfig file_cfg = ieti::ExperimentConfig::from_json_file(config_path);
      if (solve->count("--precond")) apply_precond(file_cfg, precond);
      if (solve->count("--tol")) file_cfg.tol = cfg.tol;
      if (solve->count("--belt") || solve->count("--no-belt")) file_cfg.belt = cfg.belt;
      if (solve->count("--seed")) file_cfg.tie_break_seed = cfg.tie_break_seed;
      res = ieti::run_single_solve(file_cfg);
      if (out.empty()) {
        std::cout << res.json << "\n";
        return res.exit_code;
      }
    }
    ieti::write_outputs(res, out);
    return res.exit_code;
  } catch (const ieti::ConfigError& ex) {
    std::cerr << "config error: " << ex.what() << "\n";
    return 2;
  } catch (const ieti::InvariantViolation& ex) {
    std::cerr << "invariant violation: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 3;
  }
}
