// SPDX-License-Identifier: Apache-2.0
//
// Weighted spanning tree, belt edges, primal selection.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "ieti/tree.hpp"

using namespace ieti;

namespace {

int wire_cotree_count(const GaugeTree& tree, const ControlGraph& graph) {
  int n = 0;
  for (int e = 0; e < graph.num_edges(); ++e)
    if (graph.edge_has(e, flags::wire_basket) && !tree.in_tree[e]) ++n;
  return n;
}

}  // namespace

TEST_CASE("weight schedule follows the hierarchy") {
  auto [dec, graph] = build_cube_decomposition(2, 2, BoundaryConfig::cube_mixed());
  const auto w = assign_weights(graph);
  bool saw4 = false, saw6 = false, saw7 = false;
  for (int e = 0; e < graph.num_edges(); ++e) {
    CHECK(w[e] >= 1);
    CHECK(w[e] <= 7);
    switch (graph.edge_class[e]) {
      case EdgeClass::WbDI: CHECK(w[e] == 1); break;
      case EdgeClass::WbDN: CHECK(w[e] == 2); break;
      case EdgeClass::WbNI: CHECK(w[e] == 3); break;
      case EdgeClass::WbII: CHECK(w[e] == 4); saw4 = true; break;
      case EdgeClass::WbDD:
      case EdgeClass::WbNN: CHECK(w[e] == 5); break;
      case EdgeClass::FacetD: CHECK(w[e] == 6); saw6 = true; break;
      case EdgeClass::FacetN:
      case EdgeClass::FacetI: CHECK(w[e] == 6); break;
      case EdgeClass::Interior: CHECK(w[e] == 7); saw7 = true; break;
    }
  }
  CHECK(saw4);  // cross-edges not touching the boundary
  CHECK(saw6);  // Dirichlet facet interior
  CHECK(saw7);  // volume edges
  (void)dec;
}

TEST_CASE("kruskal on a single unit-cube patch: 7 tree edges, 5 wire-basket cotree edges") {
  auto [dec, graph] = build_cube_decomposition(1, 1, BoundaryConfig::all_neumann());
  const GaugeTree tree = kruskal_tree(graph, assign_weights(graph));
  CHECK(tree.tree_edges.size() == 7);  // 8 nodes
  CHECK(wire_cotree_count(tree, graph) == 5);
  CHECK(cotree_wire_count(tree, graph, dec) == 5);  // 6 - 1 - 1 + 1
}

TEST_CASE("cube 2x2x2: wire-basket cotree count is 2 s_H^3 + 3 s_H^2 = 28, for every s_h") {
  for (int s_h : {1, 2, 4}) {
    auto [dec, graph] = build_cube_decomposition(2, s_h, BoundaryConfig::cube_mixed());
    const GaugeTree tree = build_gauge_tree(graph, dec);
    CHECK(cotree_wire_count(tree, graph, dec) == 28);
    CHECK(wire_cotree_count(tree, graph) == 28);
  }
}

TEST_CASE("torus ring: cotree formula holds with Euler constant 0") {
  auto [dec, graph] = build_torus_decomposition(3, 1, BoundaryConfig::torus_mixed());
  const GaugeTree tree = build_gauge_tree(graph, dec);
  CHECK(coarse_euler_constant(dec) == 0);
  const int expected = dec.coarse_faces - dec.coarse_cells - 0 + 1;
  CHECK(cotree_wire_count(tree, graph, dec) == expected);
}

TEST_CASE("hierarchy validation") {
  SUBCASE("full pipeline on the mixed-BC cube passes every check") {
    auto [dec, graph] = build_cube_decomposition(2, 2, BoundaryConfig::cube_mixed());
    const GaugeTree tree = build_gauge_tree(graph, dec);
    const HierarchyReport rep = validate_hierarchy(tree, graph);
    CHECK(rep.wire_basket_spanned);
    CHECK(rep.dirichlet_spanned);
    CHECK(rep.acyclic);
  }
  SUBCASE("uniform weights ignore the hierarchy and break a spanning condition") {
    // Disconnected Dirichlet boundary (two opposite faces): without the
    // weight schedule the tree reaches Dirichlet nodes through the volume.
    auto [dec, graph] = build_grid_decomposition(2, 1, 1, 2, BoundaryConfig::cube_mixed());
    const GaugeTree naive = kruskal_tree(graph, std::vector<uint8_t>(graph.num_edges(), 1));
    CHECK(!validate_hierarchy(naive, graph).all_ok());
    const GaugeTree good = build_gauge_tree(graph, dec);
    CHECK(validate_hierarchy(good, graph).all_ok());
  }
  SUBCASE("single patch, all Dirichlet: boundary graph spanned by the tree") {
    auto [dec, graph] = build_cube_decomposition(1, 1, BoundaryConfig::all_dirichlet());
    const GaugeTree tree = build_gauge_tree(graph, dec);
    CHECK(validate_hierarchy(tree, graph).dirichlet_spanned);
  }
}

TEST_CASE("kruskal determinism and seeded tie-breaks") {
  auto [dec, graph] = build_cube_decomposition(2, 2, BoundaryConfig::cube_mixed());
  const auto w = assign_weights(graph);
  const GaugeTree a = kruskal_tree(graph, w);
  const GaugeTree b = kruskal_tree(graph, w);
  CHECK(a.tree_edges == b.tree_edges);
  // a seeded permutation still yields a valid hierarchical tree
  const GaugeTree s = build_gauge_tree(graph, dec, true, 12345);
  CHECK(validate_hierarchy(s, graph).all_ok());
  CHECK(s.tree_edges.size() == a.tree_edges.size());
}

TEST_CASE("belt edges") {
  SUBCASE("full-Neumann torus gets exactly one belt edge") {
    auto [dec, graph] = build_torus_decomposition(3, 1, BoundaryConfig::all_neumann());
    const GaugeTree tree = build_gauge_tree(graph, dec, true);
    CHECK(tree.belt_edges.size() == 1);
    CHECK(tree.eliminated(tree.belt_edges[0]));
    CHECK(!tree.in_tree[tree.belt_edges[0]]);
  }
  SUBCASE("simply connected cube: no-op") {
    auto [dec, graph] = build_cube_decomposition(2, 1, BoundaryConfig::all_neumann());
    const GaugeTree tree = build_gauge_tree(graph, dec, true);
    CHECK(tree.belt_edges.empty());
  }
  SUBCASE("Dirichlet band around the hole already removes the kernel: no-op") {
    auto [dec, graph] = build_torus_decomposition(3, 1, BoundaryConfig::torus_mixed());
    const GaugeTree tree = build_gauge_tree(graph, dec, true);
    CHECK(tree.belt_edges.empty());
  }
}

TEST_CASE("primal edge selection") {
  SUBCASE("single patch: no interfaces, no primal edges") {
    auto [dec, graph] = build_cube_decomposition(1, 2, BoundaryConfig::all_neumann());
    const GaugeTree tree = build_gauge_tree(graph, dec);
    CHECK(tree.primal_edges.empty());
    CHECK(tree.n_gp == 0);
    CHECK(tree.n_p == 0);
  }
  SUBCASE("two patches: primal edges sit on the shared-face perimeter") {
    auto [dec, graph] = build_grid_decomposition(2, 1, 1, 2, BoundaryConfig::all_neumann());
    const GaugeTree tree = build_gauge_tree(graph, dec);
    CHECK(!tree.primal_edges.empty());
    for (int e : tree.primal_edges) {
      CHECK(graph.edge_class[e] == EdgeClass::WbNI);
      CHECK(!tree.in_tree[e]);
    }
  }
  SUBCASE("coarse problem size is independent of the mesh size") {
    int n_gp_ref = -1;
    for (int s_h : {1, 2, 4}) {
      auto [dec, graph] = build_cube_decomposition(2, s_h, BoundaryConfig::cube_mixed());
      const GaugeTree tree = build_gauge_tree(graph, dec);
      if (n_gp_ref < 0) n_gp_ref = tree.n_gp;
      CHECK(tree.n_gp == n_gp_ref);
      CHECK(tree.n_gp <= 28);
    }
  }
  SUBCASE("every cross-edge ends up eliminated or primal") {
    auto [dec, graph] = build_cube_decomposition(2, 2, BoundaryConfig::all_neumann());
    const GaugeTree tree = build_gauge_tree(graph, dec);
    for (int e = 0; e < graph.num_edges(); ++e) {
      if (graph.edge_class[e] != EdgeClass::WbII) continue;
      const bool primal = std::binary_search(tree.primal_edges.begin(),
                                             tree.primal_edges.end(), e);
      CHECK((tree.in_tree[e] || primal));
    }
  }
}

TEST_CASE("eliminated local graphs") {
  SUBCASE("full pipeline keeps every subdomain connected (cube and torus, mixed BC)") {
    {
      auto [dec, graph] = build_cube_decomposition(2, 2, BoundaryConfig::cube_mixed());
      const GaugeTree tree = build_gauge_tree(graph, dec);
      for (int p = 0; p < graph.num_patches(); ++p)
        CHECK(eliminated_graph_connected(p, tree, graph));
    }
    {
      auto [dec, graph] = build_torus_decomposition(3, 2, BoundaryConfig::torus_mixed());
      const GaugeTree tree = build_gauge_tree(graph, dec);
      for (int p = 0; p < graph.num_patches(); ++p)
        CHECK(eliminated_graph_connected(p, tree, graph));
    }
  }
  SUBCASE("flat 3x3x1 grid, Dirichlet top and bottom, primal removed: disconnection") {
    auto [dec, graph] =
        build_grid_decomposition(3, 3, 1, 2, BoundaryConfig::cube_sides({"z0", "z1"}));
    GaugeTree tree = build_gauge_tree(graph, dec);
    tree.primal_edges.clear();
    tree.primal_local.assign(graph.num_patches(), {});
    tree.n_gp = 0;
    tree.n_p = 0;
    int disconnected = 0;
    for (int p = 0; p < graph.num_patches(); ++p)
      if (!eliminated_graph_connected(p, tree, graph)) ++disconnected;
    CHECK(disconnected >= 1);
  }
  SUBCASE("full-Neumann 3-patch torus without belt edge: one subdomain disconnected") {
    auto [dec, graph] = build_torus_decomposition(3, 1, BoundaryConfig::all_neumann());
    const GaugeTree tree = build_gauge_tree(graph, dec, /*belt=*/false);
    int disconnected = 0;
    for (int p = 0; p < graph.num_patches(); ++p)
      if (!eliminated_graph_connected(p, tree, graph)) ++disconnected;
    CHECK(disconnected >= 1);
  }
}

TEST_CASE("tree dump is CSV with one line per edge") {
  auto [dec, graph] = build_cube_decomposition(1, 1, BoundaryConfig::all_neumann());
  const GaugeTree tree = build_gauge_tree(graph, dec);
  const std::string csv = dump_tree_csv(tree, graph);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == graph.num_edges() + 1);
}
