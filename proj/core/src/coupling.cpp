// SPDX-License-Identifier: Apache-2.0

#include "ieti/coupling.hpp"

#include <algorithm>
#include <cmath>

namespace ieti {

std::vector<CouplingRow> build_coupling(const ControlGraph& graph) {
  std::vector<CouplingRow> rows;
  for (int e = 0; e < graph.num_edges(); ++e) {
    const auto& owners = graph.edge_owners[e];
    for (size_t t = 0; t + 1 < owners.size(); ++t) {
      CouplingRow r;
      r.sub_a = owners[t].patch;
      r.dof_a = owners[t].local_edge;
      r.sign_a = owners[t].sign;
      r.sub_b = owners[t + 1].patch;
      r.dof_b = owners[t + 1].local_edge;
      r.sign_b = static_cast<int8_t>(-owners[t + 1].sign);
      rows.push_back(r);
    }
  }
  return rows;
}

CouplingSplit split_coupling(const std::vector<CouplingRow>& rows,
                             const std::vector<std::vector<DofTag>>& tags) {
  auto eliminated = [](DofTag t) { return t == DofTag::Dirichlet || t == DofTag::Tree; };
  CouplingSplit out;
  for (const CouplingRow& r : rows) {
    const DofTag ta = tags[r.sub_a][r.dof_a];
    const DofTag tb = tags[r.sub_b][r.dof_b];
    if (eliminated(ta) != eliminated(tb) || (ta == DofTag::Primal) != (tb == DofTag::Primal))
      throw InvariantViolation("coupling row endpoints classified differently");
    if (eliminated(ta)) continue;
    if (ta == DofTag::Primal)
      out.primal.push_back(r);
    else
      out.dual.push_back(r);
  }
  return out;
}

PrimalBasis build_primal_basis(const ControlGraph& graph, const GaugeTree& tree) {
  PrimalBasis basis;
  basis.n_gp = tree.n_gp;
  basis.row_offset.resize(graph.num_patches(), 0);

  std::vector<Eigen::Triplet<double>> trips;
  int row = 0;
  for (int p = 0; p < graph.num_patches(); ++p) {
    basis.row_offset[p] = row;
    for (int le : tree.primal_local[p]) {
      const int ge = graph.patch_edge_global[p][le];
      const auto it = std::lower_bound(tree.primal_edges.begin(), tree.primal_edges.end(), ge);
      if (it == tree.primal_edges.end() || *it != ge)
        throw InvariantViolation("local primal edge missing from global primal set");
      const int col = static_cast<int>(it - tree.primal_edges.begin());
      trips.emplace_back(row, col, double(graph.patch_edge_sign[p][le]));
      ++row;
    }
  }
  basis.n_p = row;
  basis.C.resize(basis.n_p, basis.n_gp);
  basis.C.setFromTriplets(trips.begin(), trips.end());
  return basis;
}

namespace {

// stacked-primal row index of local edge le of patch p
int primal_row(const GaugeTree& tree, const PrimalBasis& basis, int p, int le) {
  const auto& loc = tree.primal_local[p];
  const auto it = std::lower_bound(loc.begin(), loc.end(), le);
  if (it == loc.end() || *it != le)
    throw InvariantViolation("primal coupling row touches a non-primal DOF");
  return basis.row_offset[p] + static_cast<int>(it - loc.begin());
}

}  // namespace

int primal_coupling_max(const std::vector<CouplingRow>& primal_rows,
                        const ControlGraph& graph, const GaugeTree& tree,
                        const PrimalBasis& basis) {
  // B_p C has one candidate nonzero per row: both endpoints map to the
  // same global primal column, so the entry is sa*C_a + sb*C_b.
  // C has exactly one nonzero per row; gather row -> (column, value) once.
  std::vector<int> row_col(basis.n_p, -1), row_val(basis.n_p, 0);
  for (int col = 0; col < basis.C.outerSize(); ++col)
    for (SpMat::InnerIterator it(basis.C, col); it; ++it) {
      row_col[it.row()] = col;
      row_val[it.row()] = int(std::lround(it.value()));
    }

  int worst = 0;
  for (const CouplingRow& r : primal_rows) {
    const int ra = primal_row(tree, basis, r.sub_a, r.dof_a);
    const int rb = primal_row(tree, basis, r.sub_b, r.dof_b);
    const int col_a = row_col[ra], val_a = row_val[ra];
    const int col_b = row_col[rb], val_b = row_val[rb];
    if (col_a < 0 || col_b < 0) throw InvariantViolation("empty primal basis row");
    if (col_a != col_b)
      throw InvariantViolation("primal coupling row spans two global primal edges");
    worst = std::max(worst, std::abs(r.sign_a * val_a + r.sign_b * val_b));
  }
  return worst;
}

double max_interface_jump(const std::vector<CouplingRow>& rows,
                          const std::vector<Eigen::VectorXd>& coeffs) {
  double worst = 0.0;
  for (const CouplingRow& r : rows)
    worst = std::max(worst, std::abs(r.sign_a * coeffs[r.sub_a][r.dof_a] +
                                     r.sign_b * coeffs[r.sub_b][r.dof_b]));
  return worst;
}

std::vector<SpMat> jump_matrices(const std::vector<CouplingRow>& rows, int num_patches,
                                 const std::vector<std::vector<int>>& index_map,
                                 const std::vector<int>& local_dim) {
  std::vector<std::vector<Eigen::Triplet<double>>> trips(num_patches);
  const int m = static_cast<int>(rows.size());
  for (int i = 0; i < m; ++i) {
    const CouplingRow& r = rows[i];
    const int na = index_map[r.sub_a][r.dof_a];
    const int nb = index_map[r.sub_b][r.dof_b];
    if (na < 0 || nb < 0) throw InvariantViolation("jump row touches a removed DOF");
    trips[r.sub_a].emplace_back(i, na, double(r.sign_a));
    trips[r.sub_b].emplace_back(i, nb, double(r.sign_b));
  }
  std::vector<SpMat> B(num_patches);
  for (int p = 0; p < num_patches; ++p) {
    B[p].resize(m, local_dim[p]);
    B[p].setFromTriplets(trips[p].begin(), trips[p].end());
  }
  return B;
}

}  // namespace ieti
