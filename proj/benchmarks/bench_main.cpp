// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "ieti/solver.hpp"

namespace {

using namespace ieti;

void BM_assemble_stiffness(benchmark::State& state) {
  Patch patch;
  patch.corners = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0),
                   Vec3(0, 0, 1), Vec3(1, 0, 1), Vec3(0, 1, 1), Vec3(1, 1, 1)};
  patch.subdivisions = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_stiffness(patch));
}
BENCHMARK(BM_assemble_stiffness)->Arg(4)->Arg(8)->Arg(16);

void BM_kruskal(benchmark::State& state) {
  const int s_H = static_cast<int>(state.range(0));
  auto [dec, graph] = build_cube_decomposition(s_H, 2, BoundaryConfig::cube_mixed());
  const auto weights = assign_weights(graph);
  for (auto _ : state) benchmark::DoNotOptimize(kruskal_tree(graph, weights));
  (void)dec;
}
BENCHMARK(BM_kruskal)->Arg(2)->Arg(4);

void BM_apply_interface_operator(benchmark::State& state) {
  const int s_h = static_cast<int>(state.range(0));
  auto [dec, graph] = build_cube_decomposition(2, s_h, BoundaryConfig::cube_mixed());
  const GaugeTree tree = build_gauge_tree(graph, dec);
  const DualPrimal dp(dec, graph, tree, ManufacturedCase::trig());
  const Eigen::VectorXd x = Eigen::VectorXd::Ones(dp.m_r());
  for (auto _ : state) benchmark::DoNotOptimize(dp.apply_neg_S(x));
}
BENCHMARK(BM_apply_interface_operator)->Arg(2)->Arg(4)->Arg(8);

}  // namespace

BENCHMARK_MAIN();
