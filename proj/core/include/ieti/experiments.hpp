// SPDX-License-Identifier: Apache-2.0

#ifndef IETI_EXPERIMENTS_HPP
#define IETI_EXPERIMENTS_HPP

#include <string>

#include "ieti/solver.hpp"

namespace ieti {

/// Configuration of one study; parsed from JSON for the `solve` subcommand,
/// populated from CLI flags otherwise.
struct ExperimentConfig {
  std::string geometry = "cube";  // "cube" | "torus"
  std::string bc = "cube-mixed";  // "cube-mixed","all-dirichlet","all-neumann","torus-mixed","torus-neumann"
  std::vector<int> s_h_list = {2};
  std::vector<int> s_H_list = {2};  // n_ring values for the torus
  Precond precond = Precond::Dirichlet;
  double tol = 1e-6;
  bool belt = true;
  uint64_t tie_break_seed = 0;

  static ExperimentConfig from_json_file(const std::string& path);
  void validate() const;  // throws ConfigError
};

struct ExperimentResult {
  std::string csv;
  std::string json;   // sidecar with the full reports
  int exit_code = 0;  // 0 ok, 2 invariant violation, 3 solver failure
};

/// Error decay over the s_h list; reports the least-squares slope of
/// log(eps_B) against log(s_h).
ExperimentResult run_convergence(const ExperimentConfig& cfg);

/// Condition-number table over boundary configurations of the torus:
/// mixed, all-Neumann, all-Neumann with belt edge; failures printed as ---.
ExperimentResult run_torus_study(const ExperimentConfig& cfg);

/// Scalability tests on the cube: 1 fixed s_H, 2 fixed global mesh
/// (s_h * s_H = 16), 3 fixed s_h. Each row solves with no, lumped and
/// Dirichlet preconditioner.
ExperimentResult run_scalability(const ExperimentConfig& cfg, int test);

/// Multiplier count table: counted vs. analytic coupled-cotree sizes and
/// the asymptotic multiplier ratio per subdomain.
ExperimentResult run_appendix_ratios(const ExperimentConfig& cfg);

/// One solve of the configured problem; JSON report.
ExperimentResult run_single_solve(const ExperimentConfig& cfg);

/// CSV to path, JSON sidecar to path + ".json"; empty path prints the CSV
/// to stdout and drops the sidecar.
void write_outputs(const ExperimentResult& res, const std::string& out_path);

std::string report_to_json(const SolveReport& rep);

}  // namespace ieti

#endif  // IETI_EXPERIMENTS_HPP
