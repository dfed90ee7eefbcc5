// SPDX-License-Identifier: Apache-2.0

#include "ieti/tree.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

namespace ieti {

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

int count_components(int num_nodes, const std::vector<char>& node_in,
                     const ControlGraph& g, const std::vector<char>& edge_in) {
  UnionFind uf(num_nodes);
  for (int e = 0; e < g.num_edges(); ++e)
    if (edge_in[e]) uf.unite(g.edges[e][0], g.edges[e][1]);
  std::vector<char> seen(num_nodes, 0);
  int comps = 0;
  for (int n = 0; n < num_nodes; ++n) {
    if (!node_in[n]) continue;
    const int r = uf.find(n);
    if (!seen[r]) {
      seen[r] = 1;
      ++comps;
    }
  }
  return comps;
}

}  // namespace

bool GaugeTree::is_belt(int e) const {
  return std::find(belt_edges.begin(), belt_edges.end(), e) != belt_edges.end();
}

std::vector<uint8_t> assign_weights(const ControlGraph& g) {
  std::vector<uint8_t> w(g.num_edges());
  for (int e = 0; e < g.num_edges(); ++e) {
    switch (g.edge_class[e]) {
      case EdgeClass::WbDI: w[e] = 1; break;
      case EdgeClass::WbDN: w[e] = 2; break;
      case EdgeClass::WbNI: w[e] = 3; break;
      case EdgeClass::WbII: w[e] = 4; break;
      case EdgeClass::WbDD:
      case EdgeClass::WbNN: w[e] = 5; break;
      case EdgeClass::FacetD:
      case EdgeClass::FacetN:
      case EdgeClass::FacetI: w[e] = 6; break;
      case EdgeClass::Interior: w[e] = 7; break;
      default: throw InvariantViolation("edge without classification");
    }
  }
  return w;
}

GaugeTree kruskal_tree(const ControlGraph& g, const std::vector<uint8_t>& weights,
                       uint64_t tie_break_seed) {
  GaugeTree t;
  t.weight = weights;
  t.in_tree.assign(g.num_edges(), 0);

  std::vector<int> order(g.num_edges());
  for (int e = 0; e < g.num_edges(); ++e) order[e] = e;
  if (tie_break_seed == 0) {
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return std::pair(weights[a], a) < std::pair(weights[b], b); });
  } else {
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return std::tuple(weights[a], splitmix64(a ^ tie_break_seed), a) <
             std::tuple(weights[b], splitmix64(b ^ tie_break_seed), b);
    });
  }

  UnionFind uf(g.num_nodes());
  for (int e : order) {
    if (uf.unite(g.edges[e][0], g.edges[e][1])) {
      t.in_tree[e] = 1;
      t.tree_edges.push_back(e);
    }
  }
  if (static_cast<int>(t.tree_edges.size()) != g.num_nodes() - 1) {
    // name one node of an unreached component
    const int root0 = uf.find(0);
    for (int n = 0; n < g.num_nodes(); ++n)
      if (uf.find(n) != root0)
        throw GeometryError("control graph is disconnected; node " + std::to_string(n) +
                            " is unreachable from node 0");
    throw InvariantViolation("tree edge count mismatch on connected graph");
  }
  std::sort(t.tree_edges.begin(), t.tree_edges.end());
  return t;
}

HierarchyReport validate_hierarchy(const GaugeTree& t, const ControlGraph& g) {
  HierarchyReport rep;

  // (c) acyclicity of the tree set on the full graph
  {
    UnionFind uf(g.num_nodes());
    rep.acyclic = true;
    for (int e : t.tree_edges)
      if (!uf.unite(g.edges[e][0], g.edges[e][1])) rep.acyclic = false;
  }

  auto spans = [&](uint8_t flag) {
    std::vector<char> nodes(g.num_nodes(), 0), all_e(g.num_edges(), 0), tree_e(g.num_edges(), 0);
    bool any = false;
    for (int n = 0; n < g.num_nodes(); ++n)
      if (g.node_flags[n] & flag) nodes[n] = 1, any = true;
    for (int e = 0; e < g.num_edges(); ++e)
      if (g.edge_flags[e] & flag) {
        all_e[e] = 1;
        tree_e[e] = t.in_tree[e];
      }
    if (!any) return true;
    return count_components(g.num_nodes(), nodes, g, tree_e) ==
           count_components(g.num_nodes(), nodes, g, all_e);
  };

  rep.wire_basket_spanned = spans(flags::wire_basket);
  rep.dirichlet_spanned = spans(flags::dirichlet);
  return rep;
}

int cotree_wire_count(const GaugeTree& t, const ControlGraph& g,
                      const PatchDecomposition& dec) {
  int counted = 0;
  for (int e = 0; e < g.num_edges(); ++e)
    if (g.edge_has(e, flags::wire_basket) && !t.in_tree[e]) ++counted;
  const int c1 = coarse_euler_constant(dec);
  const int formula = dec.coarse_faces - dec.coarse_cells - c1 + 1;
  if (counted != formula)
    throw InvariantViolation("wire-basket cotree count " + std::to_string(counted) +
                             " does not match Euler formula value " + std::to_string(formula));
  return counted;
}

namespace {

// winding number of a closed node loop around the z-axis
double loop_winding(const ControlGraph& g, const std::vector<int>& loop) {
  double total = 0.0;
  for (size_t i = 0; i < loop.size(); ++i) {
    const Vec3& a = g.node_coords[loop[i]];
    const Vec3& b = g.node_coords[loop[(i + 1) % loop.size()]];
    const double da = std::atan2(b.y(), b.x()) - std::atan2(a.y(), a.x());
    total += std::remainder(da, 2.0 * M_PI);
  }
  return total / (2.0 * M_PI);
}

// path between two nodes through a given edge subset (BFS); empty if none
std::vector<int> bfs_path(const ControlGraph& g, const std::vector<char>& edge_in,
                          int from, int to) {
  std::vector<std::vector<int>> adj(g.num_nodes());
  for (int e = 0; e < g.num_edges(); ++e)
    if (edge_in[e]) {
      adj[g.edges[e][0]].push_back(g.edges[e][1]);
      adj[g.edges[e][1]].push_back(g.edges[e][0]);
    }
  std::vector<int> parent(g.num_nodes(), -1);
  std::queue<int> q;
  q.push(from);
  parent[from] = from;
  while (!q.empty()) {
    const int n = q.front();
    q.pop();
    if (n == to) break;
    for (int m : adj[n])
      if (parent[m] < 0) {
        parent[m] = n;
        q.push(m);
      }
  }
  if (parent[to] < 0) return {};
  std::vector<int> path{to};
  while (path.back() != from) path.push_back(parent[path.back()]);
  std::reverse(path.begin(), path.end());
  return path;
}

// true if the edge subset contains a cycle winding around the z-axis
bool has_winding_cycle(const ControlGraph& g, const std::vector<char>& edge_in) {
  UnionFind uf(g.num_nodes());
  std::vector<char> forest(g.num_edges(), 0);
  std::vector<int> cotree;
  for (int e = 0; e < g.num_edges(); ++e) {
    if (!edge_in[e]) continue;
    if (uf.unite(g.edges[e][0], g.edges[e][1]))
      forest[e] = 1;
    else
      cotree.push_back(e);
  }
  for (int e : cotree) {
    auto path = bfs_path(g, forest, g.edges[e][1], g.edges[e][0]);
    if (path.empty()) continue;
    if (std::abs(loop_winding(g, path)) > 0.5) return true;
  }
  return false;
}

}  // namespace

void add_belt_edges(GaugeTree& t, const ControlGraph& g, const PatchDecomposition& dec) {
  const int b1 = first_betti_number(dec);
  if (b1 <= 0) return;

  // a Dirichlet loop around the hole already removes the harmonic kernel
  std::vector<char> d_edges(g.num_edges(), 0);
  bool any_d = false;
  for (int e = 0; e < g.num_edges(); ++e)
    if (g.edge_has(e, flags::dirichlet)) d_edges[e] = 1, any_d = true;
  if (any_d && has_winding_cycle(g, d_edges)) return;

  std::vector<char> eliminated(g.num_edges(), 0);
  for (int e = 0; e < g.num_edges(); ++e) eliminated[e] = t.in_tree[e];
  for (int e : t.belt_edges) eliminated[e] = 1;

  for (int hole = 0; hole < b1; ++hole) {
    bool found = false;
    for (int e = 0; e < g.num_edges() && !found; ++e) {
      if (eliminated[e] || !g.edge_has(e, flags::wire_basket)) continue;
      auto path = bfs_path(g, eliminated, g.edges[e][1], g.edges[e][0]);
      if (path.empty()) continue;
      if (std::abs(loop_winding(g, path)) > 0.5) {
        t.belt_edges.push_back(e);
        eliminated[e] = 1;
        found = true;
      }
    }
    if (!found)
      throw InvariantViolation("no belt-edge candidate closing a loop around the hole");
  }
}

void select_primal(GaugeTree& t, const ControlGraph& g) {
  t.primal_local.assign(g.num_patches(), {});
  t.primal_edges.clear();
  std::vector<char> primal(g.num_edges(), 0);
  for (int e = 0; e < g.num_edges(); ++e) {
    const EdgeClass c = g.edge_class[e];
    if ((c == EdgeClass::WbII || c == EdgeClass::WbNI) && !t.eliminated(e)) primal[e] = 1;
  }
  for (int e = 0; e < g.num_edges(); ++e)
    if (primal[e]) t.primal_edges.push_back(e);
  t.n_gp = static_cast<int>(t.primal_edges.size());
  t.n_p = 0;
  for (int p = 0; p < g.num_patches(); ++p) {
    for (int le = 0; le < static_cast<int>(g.patch_edge_global[p].size()); ++le)
      if (primal[g.patch_edge_global[p][le]]) t.primal_local[p].push_back(le);
    t.n_p += static_cast<int>(t.primal_local[p].size());
  }
}

bool eliminated_graph_connected(int patch, const GaugeTree& t, const ControlGraph& g) {
  std::vector<char> primal(g.num_edges(), 0);
  for (int le : t.primal_local[patch]) primal[g.patch_edge_global[patch][le]] = 1;

  const auto& nmap = g.patch_node_global[patch];
  const int nn = static_cast<int>(nmap.size());
  UnionFind uf(nn);
  // local node indices: reconstruct edge endpoints from the patch topology
  const int s = [&] {
    // nn = (s+1)^3
    int s_ = 1;
    while ((s_ + 1) * (s_ + 1) * (s_ + 1) < nn) ++s_;
    return s_;
  }();
  PatchTopology topo(s);
  int united = 0;
  for (int le = 0; le < topo.num_edges(); ++le) {
    const int ge = g.patch_edge_global[patch][le];
    const bool elim = g.edge_has(ge, flags::dirichlet) || t.eliminated(ge) || primal[ge];
    if (!elim) continue;
    auto [a, b] = topo.edge_nodes(le);
    if (uf.unite(a, b)) ++united;
  }
  return united == nn - 1;
}

GaugeTree build_gauge_tree(const ControlGraph& g, const PatchDecomposition& dec,
                           bool belt, uint64_t tie_break_seed) {
  auto weights = assign_weights(g);
  GaugeTree t = kruskal_tree(g, weights, tie_break_seed);
  const HierarchyReport rep = validate_hierarchy(t, g);
  if (!rep.all_ok())
    throw InvariantViolation("tree hierarchy validation failed (wire basket spanned: " +
                             std::to_string(rep.wire_basket_spanned) + ", Dirichlet spanned: " +
                             std::to_string(rep.dirichlet_spanned) + ", acyclic: " +
                             std::to_string(rep.acyclic) + ")");
  if (belt) add_belt_edges(t, g, dec);
  select_primal(t, g);
  return t;
}

std::string dump_tree_csv(const GaugeTree& t, const ControlGraph& g) {
  std::vector<char> primal(g.num_edges(), 0);
  for (int e : t.primal_edges) primal[e] = 1;
  std::ostringstream os;
  os << "edge,weight,in_tree,is_primal,is_belt\n";
  for (int e = 0; e < g.num_edges(); ++e)
    os << e << ',' << int(t.weight[e]) << ',' << int(t.in_tree[e]) << ',' << int(primal[e])
       << ',' << int(t.is_belt(e)) << '\n';
  return os.str();
}

}  // namespace ieti
