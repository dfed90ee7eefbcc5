// SPDX-License-Identifier: Apache-2.0

#ifndef IETI_ASSEMBLY_HPP
#define IETI_ASSEMBLY_HPP

#include <functional>

#include <Eigen/Sparse>

#include "ieti/mesh.hpp"
#include "ieti/tree.hpp"

namespace ieti {

using SpMat = Eigen::SparseMatrix<double>;

/// Lowest-order edge shape functions on the unit cube. Edge k = 4d + c0 + 2c1
/// runs along direction d with the two cross coordinates clamped to (c0,c1);
/// the cross coordinates are taken cyclically (d+1, d+2 mod 3).
struct ReferenceBasis {
  static Eigen::Matrix<double, 3, 12> values(const Vec3& xhat);
  static Eigen::Matrix<double, 3, 12> curls(const Vec3& xhat);
  /// direction and cross-coordinate sides of edge k
  static void edge_info(int k, int& d, int& c0, int& c1);
};

/// Manufactured solution data: analytic potential, flux density, source.
struct ManufacturedCase {
  std::function<Vec3(const Vec3&)> A;
  std::function<Vec3(const Vec3&)> B;  // = curl A
  std::function<Vec3(const Vec3&)> J;  // = curl curl A (nu = 1)
  double nu = 1.0;

  /// The trigonometric case used throughout the experiments.
  static ManufacturedCase trig();
  /// Zero data (A = B = J = 0).
  static ManufacturedCase zero();
};

enum class DofTag : uint8_t {
  Dirichlet,
  Tree,               // includes belt edges; gauge value 0
  Primal,
  RemainingInterface, // coupled, not eliminated
  RemainingInterior,  // unconstrained
};

/// Per-subdomain system: full (untrimmed) stiffness, right-hand side, DOF
/// partition and Dirichlet coefficient values.
struct LocalSystem {
  SpMat K;
  Eigen::VectorXd rhs;
  std::vector<DofTag> tag;
  Eigen::VectorXd dirichlet_values;
};

/// Curl-curl stiffness of one patch with tensor Gauss quadrature
/// (3 points per direction). Throws GeometryError on nonpositive Jacobians.
SpMat assemble_stiffness(const Patch& patch,
                         const std::function<double(const Vec3&)>& nu = {});

/// Volume source term plus Neumann surface term g_N = (nu curl A) x n on
/// the patch faces tagged Neumann.
Eigen::VectorXd assemble_rhs(const Patch& patch, const std::array<PatchFace, 6>& faces,
                             const ManufacturedCase& mc);

/// Edge-wise line integrals of A . t along each Dirichlet edge of the patch
/// (patch-local orientation), zero elsewhere. 4-point Gauss per edge.
Eigen::VectorXd dirichlet_values(const Patch& patch, const ControlGraph& graph, int patch_idx,
                                 const ManufacturedCase& mc);

/// Tags every local DOF of a patch from the global classification and tree.
std::vector<DofTag> build_dof_tags(const ControlGraph& graph, const GaugeTree& tree,
                                   int patch_idx);

/// Assembles the full local system for one subdomain.
LocalSystem build_local_system(const PatchDecomposition& dec, const ControlGraph& graph,
                               const GaugeTree& tree, const ManufacturedCase& mc,
                               int patch_idx);

/// Removes Dirichlet rows/columns; rhs of retained DOFs is updated by the
/// Dirichlet coefficient values. retained_index maps old -> new (-1 dropped).
LocalSystem eliminate_dirichlet(const LocalSystem& sys, std::vector<int>* retained_index = nullptr);

/// Subdomain-wise H(curl) seminorm error of the discrete field against the
/// manufactured flux density; coefficients in patch-local orientation.
/// Quadrature one order higher than assembly (4 points per direction).
double error_B(const PatchDecomposition& dec, const std::vector<Eigen::VectorXd>& coeffs,
               const ManufacturedCase& mc);

/// L2 norm over the domain of the difference of two discrete flux densities
/// given by per-patch coefficient vectors, and the norm of the second field.
std::pair<double, double> curl_field_difference(const PatchDecomposition& dec,
                                                const std::vector<Eigen::VectorXd>& a,
                                                const std::vector<Eigen::VectorXd>& b);

/// Patch-local edge id of element-local edge k of element (ex,ey,ez).
int element_edge_to_patch_edge(const PatchTopology& topo, int ex, int ey, int ez, int k);

}  // namespace ieti

#endif  // IETI_ASSEMBLY_HPP
