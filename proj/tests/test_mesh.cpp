// SPDX-License-Identifier: Apache-2.0
//
// Multipatch decomposition and control-graph classification tests.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ieti/mesh.hpp"

using namespace ieti;

namespace {

int count_wire_basket(const ControlGraph& g) {
  int n = 0;
  for (int e = 0; e < g.num_edges(); ++e)
    if (g.edge_has(e, flags::wire_basket)) ++n;
  return n;
}

bool is_wb_class(EdgeClass c) {
  return c == EdgeClass::WbDI || c == EdgeClass::WbDN || c == EdgeClass::WbNI ||
         c == EdgeClass::WbII || c == EdgeClass::WbDD || c == EdgeClass::WbNN;
}

}  // namespace

TEST_CASE("trilinear patch map and jacobian on an affine cube") {
  Patch p;
  p.corners = {Vec3(0, 0, 0), Vec3(2, 0, 0), Vec3(0, 2, 0), Vec3(2, 2, 0),
               Vec3(0, 0, 2), Vec3(2, 0, 2), Vec3(0, 2, 2), Vec3(2, 2, 2)};
  CHECK((p.map(0.5, 0.5, 0.5) - Vec3(1, 1, 1)).norm() == doctest::Approx(0.0));
  const Eigen::Matrix3d J = p.jacobian(0.25, 0.75, 0.5);
  CHECK((J - 2.0 * Eigen::Matrix3d::Identity()).norm() == doctest::Approx(0.0));
}

TEST_CASE("cube decomposition: local DOF sum matches 3 s_H^3 s_h (s_h+1)^2") {
  auto [dec, graph] = build_cube_decomposition(2, 2, BoundaryConfig::cube_mixed());
  CHECK(dec.patches.size() == 8);
  int n = 0;
  for (const auto& em : graph.patch_edge_global) n += static_cast<int>(em.size());
  CHECK(n == 432);  // 3 * 8 * 2 * 9
  // unique global edges of the merged 4^3 mesh: 3 * 4 * 5^2
  CHECK(graph.num_edges() == 300);
}

TEST_CASE("single unit-cube patch: 12 edges, 8 nodes, everything on the wire basket") {
  auto [dec, graph] = build_cube_decomposition(1, 1, BoundaryConfig::all_neumann());
  CHECK(graph.num_nodes() == 8);
  CHECK(graph.num_edges() == 12);
  CHECK(count_wire_basket(graph) == 12);
  (void)dec;
}

TEST_CASE("wire basket size is 3 s_h s_H (s_H+1)^2") {
  for (int s_h : {1, 2}) {
    for (int s_H : {2, 3}) {
      auto [dec, graph] = build_cube_decomposition(s_H, s_h, BoundaryConfig::cube_mixed());
      CHECK(count_wire_basket(graph) == 3 * s_h * s_H * (s_H + 1) * (s_H + 1));
      (void)dec;
    }
  }
}

TEST_CASE("coarse Euler constant") {
  SUBCASE("2x2x2 cube grid: 27 - 54 + 36 - 8 = 1") {
    auto [dec, graph] = build_cube_decomposition(2, 1, BoundaryConfig::all_neumann());
    CHECK(dec.coarse_vertices == 27);
    CHECK(dec.coarse_edges == 54);
    CHECK(dec.coarse_faces == 36);
    CHECK(dec.coarse_cells == 8);
    CHECK(coarse_euler_constant(dec) == 1);
    CHECK(first_betti_number(dec) == 0);
    (void)graph;
  }
  SUBCASE("single patch: 8 - 12 + 6 - 1 = 1") {
    auto [dec, graph] = build_cube_decomposition(1, 1, BoundaryConfig::all_neumann());
    CHECK(coarse_euler_constant(dec) == 1);
    (void)graph;
  }
  SUBCASE("solid torus ring has Euler characteristic 0 and one hole") {
    for (int n_ring : {3, 6}) {
      auto [dec, graph] = build_torus_decomposition(n_ring, 1, BoundaryConfig::all_neumann());
      CHECK(coarse_euler_constant(dec) == 0);
      CHECK(first_betti_number(dec) == 1);
      (void)graph;
    }
  }
}

TEST_CASE("torus ring layouts") {
  SUBCASE("N=3: three wedge patches, conforming ring") {
    auto [dec, graph] = build_torus_decomposition(3, 1, BoundaryConfig::all_neumann());
    CHECK(dec.patches.size() == 3);
    CHECK(dec.coarse_cells == 3);
    // every patch has exactly two interface faces (its ring neighbours)
    for (const auto& pf : dec.faces) {
      int ifc = 0;
      for (const auto& f : pf)
        if (f.kind == FaceKind::Interface) ++ifc;
      CHECK(ifc == 2);
    }
    (void)graph;
  }
  SUBCASE("N=6: six patches, still a solid ring") {
    auto [dec, graph] = build_torus_decomposition(6, 1, BoundaryConfig::all_neumann());
    CHECK(dec.patches.size() == 6);
    CHECK(coarse_euler_constant(dec) == 0);
    CHECK(first_betti_number(dec) == 1);
    (void)graph;
  }
  SUBCASE("all-Neumann ring: no Dirichlet edges at all") {
    auto [dec, graph] = build_torus_decomposition(3, 1, BoundaryConfig::all_neumann());
    for (int e = 0; e < graph.num_edges(); ++e) CHECK(!graph.edge_has(e, flags::dirichlet));
    (void)dec;
  }
}

TEST_CASE("edge classification") {
  SUBCASE("single patch, all faces Dirichlet: every edge Dirichlet, none interface") {
    auto [dec, graph] = build_cube_decomposition(1, 1, BoundaryConfig::all_dirichlet());
    for (int e = 0; e < graph.num_edges(); ++e) {
      CHECK(graph.edge_has(e, flags::dirichlet));
      CHECK(!graph.edge_has(e, flags::interface_));
    }
    (void)dec;
  }
  SUBCASE("refined all-Dirichlet patch: boundary edges Dirichlet, volume edges untagged") {
    auto [dec, graph] = build_cube_decomposition(1, 2, BoundaryConfig::all_dirichlet());
    int interior = 0;
    for (int e = 0; e < graph.num_edges(); ++e) {
      if (graph.edge_class[e] == EdgeClass::Interior) {
        CHECK(!graph.edge_has(e, flags::dirichlet));
        ++interior;
      } else {
        CHECK(graph.edge_has(e, flags::dirichlet));
      }
    }
    CHECK(interior == 6);  // the two middle edges per direction
    (void)dec;
  }
  SUBCASE("two patches, no Dirichlet: shared-face perimeter edges are Neumann-interface") {
    auto [dec, graph] = build_grid_decomposition(2, 1, 1, 2, BoundaryConfig::all_neumann());
    int n_wb_interface = 0, n_facet_interface = 0;
    for (int e = 0; e < graph.num_edges(); ++e) {
      if (!graph.edge_has(e, flags::interface_)) continue;
      CHECK(graph.edge_owners[e].size() == 2);
      if (graph.edge_has(e, flags::wire_basket)) {
        CHECK(graph.edge_class[e] == EdgeClass::WbNI);
        ++n_wb_interface;
      } else {
        CHECK(graph.edge_class[e] == EdgeClass::FacetI);
        ++n_facet_interface;
      }
    }
    // shared face: 2*s*(s+1) = 12 edges, 8 of them on the perimeter
    CHECK(n_wb_interface == 8);
    CHECK(n_facet_interface == 4);
    (void)dec;
  }
  SUBCASE("2x2x2 cube grid: a cross-edge shared by 4 patches is interface-only") {
    auto [dec, graph] = build_cube_decomposition(2, 1, BoundaryConfig::all_neumann());
    int n_cross = 0;
    for (int e = 0; e < graph.num_edges(); ++e) {
      if (graph.edge_class[e] != EdgeClass::WbII) continue;
      ++n_cross;
      CHECK(graph.edge_owners[e].size() >= 3);
      CHECK(!graph.edge_has(e, flags::dirichlet));
      CHECK(!graph.edge_has(e, flags::neumann));
    }
    CHECK(n_cross > 0);
    (void)dec;
  }
  SUBCASE("classification covers the wire basket with exactly one class each") {
    auto [dec, graph] = build_cube_decomposition(2, 2, BoundaryConfig::cube_mixed());
    for (int e = 0; e < graph.num_edges(); ++e) {
      if (graph.edge_has(e, flags::wire_basket))
        CHECK(is_wb_class(graph.edge_class[e]));
      else
        CHECK(!is_wb_class(graph.edge_class[e]));
    }
    (void)dec;
  }
}

TEST_CASE("edge orientation and ownership bookkeeping") {
  auto [dec, graph] = build_cube_decomposition(2, 2, BoundaryConfig::cube_mixed());
  for (int e = 0; e < graph.num_edges(); ++e) {
    CHECK(graph.edges[e][0] < graph.edges[e][1]);
    CHECK(!graph.edge_owners[e].empty());
    for (const EdgeCopy& c : graph.edge_owners[e]) {
      CHECK((c.sign == 1 || c.sign == -1));
      CHECK(graph.patch_edge_global[c.patch][c.local_edge] == e);
      CHECK(graph.patch_edge_sign[c.patch][c.local_edge] == c.sign);
    }
  }
  (void)dec;
}

TEST_CASE("graph dump is non-empty CSV with one line per edge") {
  auto [dec, graph] = build_cube_decomposition(1, 1, BoundaryConfig::all_neumann());
  const std::string csv = dump_graph_csv(graph);
  const long lines = std::count(csv.begin(), csv.end(), '\n');
  CHECK(lines == graph.num_edges() + 1);  // header + rows
  (void)dec;
}
