// SPDX-License-Identifier: Apache-2.0

#ifndef IETI_TREE_HPP
#define IETI_TREE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ieti/mesh.hpp"

namespace ieti {

/// Union-find over node ids with path compression and union by rank.
class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(n), rank_(n, 0) {
    for (int i = 0; i < n; ++i) parent_[i] = i;
  }
  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    return true;
  }

 private:
  std::vector<int> parent_;
  std::vector<int> rank_;
};

/// Spanning tree with the hierarchy weights, belt edges closing loops
/// around topological holes, and the derived primal edge sets.
struct GaugeTree {
  std::vector<uint8_t> weight;      // per global edge, 1..7
  std::vector<char> in_tree;        // per global edge
  std::vector<int> tree_edges;      // ascending edge ids
  std::vector<int> belt_edges;      // eliminated like tree edges

  std::vector<int> primal_edges;            // global primal edge ids, ascending
  std::vector<std::vector<int>> primal_local;  // per patch: local edge ids, ascending
  int n_gp = 0;  // |primal_edges|
  int n_p = 0;   // sum of local primal counts

  bool eliminated(int e) const { return in_tree[e] || is_belt(e); }
  bool is_belt(int e) const;
};

struct HierarchyReport {
  bool wire_basket_spanned = false;   // tree restricted to G_lambda spans it
  bool dirichlet_spanned = false;     // per component of G_D
  bool acyclic = false;
  bool all_ok() const { return wire_basket_spanned && dirichlet_spanned && acyclic; }
};

/// Kruskal weight per edge following the hierarchy: 1 DI, 2 DN, 3 NI, 4 II,
/// 5 DD/NN, 6 facet, 7 interior.
std::vector<uint8_t> assign_weights(const ControlGraph& graph);

/// Spanning tree by Kruskal in ascending (weight, edge id) order.
/// tie_break_seed != 0 permutes ids within each weight class deterministically.
GaugeTree kruskal_tree(const ControlGraph& graph, const std::vector<uint8_t>& weights,
                       uint64_t tie_break_seed = 0);

HierarchyReport validate_hierarchy(const GaugeTree& tree, const ControlGraph& graph);

/// Counted wire-basket cotree size, checked against
/// |F_dec| - |C_dec| - c1 + 1; throws InvariantViolation on mismatch.
int cotree_wire_count(const GaugeTree& tree, const ControlGraph& graph,
                      const PatchDecomposition& dec);

/// Adds one cotree edge per hole whose fundamental cycle winds around the
/// z-axis, unless a Dirichlet loop already closes around the hole.
/// No-op when the first Betti number is zero.
void add_belt_edges(GaugeTree& tree, const ControlGraph& graph,
                    const PatchDecomposition& dec);

/// Primal edges per subdomain: (E_II u E_NI) \ eliminated, and their global
/// union. Fills primal_* members of the tree.
void select_primal(GaugeTree& tree, const ControlGraph& graph);

/// True iff the graph of locally eliminated DOFs (Dirichlet, tree, belt,
/// primal) connects all nodes of subdomain i.
bool eliminated_graph_connected(int patch, const GaugeTree& tree, const ControlGraph& graph);

/// Full pipeline: weights, Kruskal, hierarchy check, belt edges, primal
/// selection. Throws InvariantViolation if the hierarchy check fails.
GaugeTree build_gauge_tree(const ControlGraph& graph, const PatchDecomposition& dec,
                           bool belt = true, uint64_t tie_break_seed = 0);

/// CSV dump: edge id, weight, in_tree, is_primal, is_belt.
std::string dump_tree_csv(const GaugeTree& tree, const ControlGraph& graph);

}  // namespace ieti

#endif  // IETI_TREE_HPP
