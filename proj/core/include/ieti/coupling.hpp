// SPDX-License-Identifier: Apache-2.0

#ifndef IETI_COUPLING_HPP
#define IETI_COUPLING_HPP

#include "ieti/assembly.hpp"

namespace ieti {

/// One signed jump constraint sign_a * x[sub_a][dof_a] + sign_b * x[sub_b][dof_b] = 0.
/// DOF indices are patch-local edge ids of the untrimmed local systems.
struct CouplingRow {
  int sub_a = -1, dof_a = -1;
  int sub_b = -1, dof_b = -1;
  int8_t sign_a = 1, sign_b = -1;
};

/// Chained coupling rows for every global edge with two or more copies:
/// k copies give k-1 rows between consecutive owners.
std::vector<CouplingRow> build_coupling(const ControlGraph& graph);

/// Rows split into the dual jump operator and the primal constraints.
/// Rows whose endpoints are both eliminated (Dirichlet or gauged) are
/// dropped; an inconsistent split throws InvariantViolation.
struct CouplingSplit {
  std::vector<CouplingRow> dual;    // remaining (r) DOFs
  std::vector<CouplingRow> primal;  // primal DOFs
};
CouplingSplit split_coupling(const std::vector<CouplingRow>& rows,
                             const std::vector<std::vector<DofTag>>& tags);

/// Primal assembly basis C: stacked local primal DOFs (patch-major, local
/// order ascending) against the global primal edges; entries are the copy
/// signs, so the primal jump rows annihilate C exactly.
struct PrimalBasis {
  SpMat C;                       // n_p x n_gp, entries in {-1,+1}
  std::vector<int> row_offset;   // per patch, start of its block in C
  int n_p = 0;
  int n_gp = 0;
};
PrimalBasis build_primal_basis(const ControlGraph& graph, const GaugeTree& tree);

/// Largest integer entry of B_p C over the primal rows; zero by construction.
int primal_coupling_max(const std::vector<CouplingRow>& primal_rows,
                        const ControlGraph& graph, const GaugeTree& tree,
                        const PrimalBasis& basis);

/// Largest |jump| of per-patch coefficient vectors over the given rows.
double max_interface_jump(const std::vector<CouplingRow>& rows,
                          const std::vector<Eigen::VectorXd>& coeffs);

/// Per-subdomain sparse jump matrices: B[s] is num_rows x local_dim(s),
/// with the row DOF indices remapped through index_map[s] (old -> new,
/// -1 meaning the DOF was removed; touching a removed DOF throws).
std::vector<SpMat> jump_matrices(const std::vector<CouplingRow>& rows, int num_patches,
                                 const std::vector<std::vector<int>>& index_map,
                                 const std::vector<int>& local_dim);

}  // namespace ieti

#endif  // IETI_COUPLING_HPP
