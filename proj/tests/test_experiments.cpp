// SPDX-License-Identifier: Apache-2.0
//
// Experiment runner: configuration parsing, CSV shapes, determinism.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "ieti/experiments.hpp"
#include "json.hpp"

using namespace ieti;

namespace {

std::string write_temp(const std::string& contents) {
  const std::string path = "test_experiments_tmp.json";
  std::ofstream out(path);
  out << contents;
  return path;
}

int data_rows(const std::string& csv) {
  return static_cast<int>(std::count(csv.begin(), csv.end(), '\n')) - 1;
}

}  // namespace

TEST_CASE("JSON configuration") {
  SUBCASE("round trip of every field") {
    const std::string path = write_temp(R"({
      "geometry": "torus", "bc": "torus-neumann",
      "s_h": [1, 2], "n_ring": 3,
      "precond": "lumped", "tol": 1e-8, "belt": false, "seed": 7
    })");
    const ExperimentConfig cfg = ExperimentConfig::from_json_file(path);
    CHECK(cfg.geometry == "torus");
    CHECK(cfg.bc == "torus-neumann");
    CHECK(cfg.s_h_list == std::vector<int>{1, 2});
    CHECK(cfg.s_H_list == std::vector<int>{3});
    CHECK(cfg.precond == Precond::Lumped);
    CHECK(cfg.tol == 1e-8);
    CHECK(!cfg.belt);
    CHECK(cfg.tie_break_seed == 7);
    std::remove(path.c_str());
  }
  SUBCASE("errors: missing file, bad JSON, bad values") {
    CHECK_THROWS_AS(ExperimentConfig::from_json_file("does_not_exist.json"), ConfigError);
    const std::string bad = write_temp("{ not json");
    CHECK_THROWS_AS(ExperimentConfig::from_json_file(bad), ConfigError);
    std::remove(bad.c_str());

    ExperimentConfig cfg;
    cfg.tol = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = ExperimentConfig{};
    cfg.s_h_list.clear();
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = ExperimentConfig{};
    cfg.geometry = "sphere";
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = ExperimentConfig{};
    cfg.s_h_list = {0};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
}

TEST_CASE("convergence study") {
  SUBCASE("single mesh: rate column stays empty") {
    ExperimentConfig cfg;
    cfg.s_h_list = {2};
    const ExperimentResult res = run_convergence(cfg);
    CHECK(res.exit_code == 0);
    std::istringstream in(res.csv);
    std::string header, row;
    std::getline(in, header);
    CHECK(header == "s_h,n,it,eps_B,rate");
    std::getline(in, row);
    CHECK(row.back() == ',');  // nothing after the rate comma
  }
  SUBCASE("two meshes: rate near -1 and CSV deterministic across runs") {
    ExperimentConfig cfg;
    cfg.s_h_list = {2, 4};
    const ExperimentResult a = run_convergence(cfg);
    const ExperimentResult b = run_convergence(cfg);
    CHECK(a.csv == b.csv);
    const auto j = nlohmann::json::parse(a.json);
    CHECK(j["slope"].get<double>() < -0.8);
    CHECK(j["slope"].get<double>() > -1.2);
  }
}

TEST_CASE("ratio table reproduces the asymptotic multiplier percentages") {
  ExperimentConfig cfg;
  cfg.s_h_list = {1, 2, 4};
  cfg.s_H_list = {2};
  const ExperimentResult res = run_appendix_ratios(cfg);
  CHECK(res.exit_code == 0);
  CHECK(res.csv.find("16.67") != std::string::npos);
  CHECK(res.csv.find("3.70") != std::string::npos);
  CHECK(res.csv.find("0.67") != std::string::npos);
  CHECK(data_rows(res.csv) == 3);
  // bit-for-bit reproducible
  CHECK(run_appendix_ratios(cfg).csv == res.csv);
}

TEST_CASE("torus study emits one row per layout") {
  ExperimentConfig cfg;
  cfg.geometry = "torus";
  cfg.s_h_list = {1};
  cfg.s_H_list = {3};
  const ExperimentResult res = run_torus_study(cfg);
  CHECK(data_rows(res.csv) == 3);
  CHECK(res.csv.find("mixed") != std::string::npos);
  CHECK(res.csv.find("neumann+belt") != std::string::npos);
}

TEST_CASE("scalability table has the three preconditioner columns") {
  ExperimentConfig cfg;
  cfg.bc = "cube-mixed";
  cfg.s_h_list = {1};
  cfg.s_H_list = {2};
  const ExperimentResult res = run_scalability(cfg, 1);
  CHECK(res.exit_code == 0);
  std::istringstream in(res.csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "s_H,s_h,n,m_r,n_gp,cond_S,cond_MLS,cond_MDS,it_S,it_ML,it_MD,eps_B");
  CHECK(data_rows(res.csv) == 1);
  CHECK_THROWS_AS(run_scalability(cfg, 4), ConfigError);
}

TEST_CASE("single solve report") {
  ExperimentConfig cfg;
  cfg.s_h_list = {2};
  cfg.s_H_list = {2};
  const ExperimentResult res = run_single_solve(cfg);
  CHECK(res.exit_code == 0);
  const auto j = nlohmann::json::parse(res.json);
  CHECK(j["converged"].get<bool>());
  CHECK(j["max_jump_rel"].get<double>() <= 1e-8);
  CHECK(j["singular_subdomains"].empty());
}

TEST_CASE("output files: CSV plus JSON sidecar") {
  ExperimentConfig cfg;
  cfg.s_h_list = {1, 2};
  cfg.s_H_list = {2};
  const ExperimentResult res = run_appendix_ratios(cfg);
  const std::string path = "test_experiments_out.csv";
  write_outputs(res, path);
  std::ifstream csv(path), js(path + ".json");
  CHECK(csv.good());
  CHECK(js.good());
  nlohmann::json sidecar;
  js >> sidecar;
  CHECK(sidecar.contains("rows"));
  std::remove(path.c_str());
  std::remove((path + ".json").c_str());
}
