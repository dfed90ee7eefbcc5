// SPDX-License-Identifier: Apache-2.0

#ifndef IETI_MESH_HPP
#define IETI_MESH_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ieti {

using Vec3 = Eigen::Vector3d;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvariantViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Hexahedral patch given by its 8 corners and a trilinear map from the
/// unit cube. Corner c[i + 2j + 4k] sits at parameter (u,v,w) = (i,j,k).
struct Patch {
  std::array<Vec3, 8> corners;
  int subdivisions = 1;  // s_h, uniform per direction

  Vec3 map(double u, double v, double w) const;
  Eigen::Matrix3d jacobian(double u, double v, double w) const;
};

enum class BcTag : uint8_t { Dirichlet, Neumann };

/// Tags every exterior patch-face. The predicate receives the four face
/// corners (physical coordinates) and the outward face centroid normal.
struct BoundaryConfig {
  std::function<BcTag(const std::array<Vec3, 4>& face_corners, const Vec3& outward_normal)> tag;

  static BoundaryConfig all_dirichlet();
  static BoundaryConfig all_neumann();
  /// Dirichlet on the two unit-cube sides y=0 and y=1, Neumann elsewhere.
  static BoundaryConfig cube_mixed();
  /// Dirichlet on the inner mantle of the polyhedral torus (all face
  /// corners at radius <= r_inner + tol), Neumann elsewhere.
  static BoundaryConfig torus_mixed(double r_inner = 1.0);
  /// Dirichlet on the named axis-aligned unit-cube sides ("x0","x1",...).
  static BoundaryConfig cube_sides(const std::vector<std::string>& dirichlet_sides);
};

enum class FaceKind : uint8_t { Dirichlet, Neumann, Interface };

struct PatchFace {
  FaceKind kind = FaceKind::Neumann;
  int neighbor_patch = -1;  // for interfaces
  int neighbor_face = -1;
};

/// Coarse multipatch layout: the patches plus the CW-complex counts of the
/// decomposition and the per-face connectivity.
struct PatchDecomposition {
  std::vector<Patch> patches;
  std::vector<std::array<PatchFace, 6>> faces;  // per patch, local face 0..5

  // counts of the coarse complex (corners merged across patches)
  int coarse_vertices = 0;
  int coarse_edges = 0;
  int coarse_faces = 0;
  int coarse_cells = 0;

  // interface list: (patch_i, face_of_i, patch_j, face_of_j) with i < j
  std::vector<std::array<int, 4>> interface_list;
};

// Bit flags for node/edge membership (an entity may carry several).
namespace flags {
inline constexpr uint8_t dirichlet = 1u << 0;   // on some Dirichlet face
inline constexpr uint8_t neumann = 1u << 1;     // on some Neumann face
inline constexpr uint8_t interface_ = 1u << 2;  // on some interface face
inline constexpr uint8_t wire_basket = 1u << 3; // on some patch macro-edge
}  // namespace flags

/// Disjoint classification of the wire-basket edges (priority order as in
/// the Kruskal weight schedule) plus the facet/interior classes.
enum class EdgeClass : uint8_t {
  WbDI,       // wire basket, Dirichlet & interface
  WbDN,       // remaining Dirichlet & Neumann
  WbNI,       // remaining Neumann & interface
  WbII,       // remaining interface-only (cross-edges)
  WbDD,       // remaining Dirichlet-only wire basket
  WbNN,       // remaining Neumann-only wire basket
  FacetD,     // Dirichlet facet interior
  FacetN,     // Neumann facet interior
  FacetI,     // interface facet interior
  Interior,   // volume edge
};

struct EdgeCopy {
  int patch = -1;
  int local_edge = -1;
  int8_t sign = 1;  // +1 if patch-local orientation matches global lo->hi
};

struct NodeCopy {
  int patch = -1;
  int local_node = -1;
};

/// Global p=1 control graph of the multipatch mesh. Nodes and edges are the
/// mesh vertices and mesh edges, merged across patches; numbering is
/// lexicographic by rounded (z,y,x) coordinate.
struct ControlGraph {
  std::vector<Vec3> node_coords;
  std::vector<std::array<int, 2>> edges;  // (lo,hi) global node ids, lo < hi

  std::vector<std::vector<EdgeCopy>> edge_owners;
  std::vector<std::vector<NodeCopy>> node_owners;

  std::vector<uint8_t> edge_flags;  // see namespace flags
  std::vector<uint8_t> node_flags;
  std::vector<EdgeClass> edge_class;

  // per patch: local entity -> global id; local edge copy sign
  std::vector<std::vector<int>> patch_node_global;
  std::vector<std::vector<int>> patch_edge_global;
  std::vector<std::vector<int8_t>> patch_edge_sign;

  int num_nodes() const { return static_cast<int>(node_coords.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
  int num_patches() const { return static_cast<int>(patch_node_global.size()); }

  bool edge_has(int e, uint8_t f) const { return (edge_flags[e] & f) != 0; }
};

/// Local index helpers for the structured (s+1)^3 node / 3 s (s+1)^2 edge
/// numbering inside one patch.
struct PatchTopology {
  int s;  // subdivisions per direction

  explicit PatchTopology(int subdivisions) : s(subdivisions) {}

  int num_nodes() const { return (s + 1) * (s + 1) * (s + 1); }
  int num_edges() const { return 3 * s * (s + 1) * (s + 1); }

  int node_index(int i, int j, int k) const {
    return i + (s + 1) * (j + (s + 1) * k);
  }
  /// Edge in direction d (0,1,2) with tail node (i,j,k); the coordinate in
  /// direction d ranges over 0..s-1, the others over 0..s.
  int edge_index(int d, int i, int j, int k) const;
  /// Inverse of edge_index.
  void edge_decode(int e, int& d, int& i, int& j, int& k) const;
  /// Tail and head node of an edge (head = tail advanced along d).
  std::array<int, 2> edge_nodes(int e) const;
  /// True if node (i,j,k) lies on local face f (0:u=0, 1:u=1, 2:v=0, ...).
  static bool node_on_face(int f, int i, int j, int k, int s);
};

/// Face corner parameter coordinates: face f of the unit cube, corners in a
/// consistent order; also the outward normal direction in parameter space.
std::array<std::array<int, 3>, 4> face_corner_params(int f);
int face_normal_axis(int f);   // 0,1,2
int face_normal_sign(int f);   // -1 for f even (coord=0), +1 for f odd

/// N = s_H^3 equal cubes tiling the unit cube, each subdivided s_h times.
std::pair<PatchDecomposition, ControlGraph>
build_cube_decomposition(int s_H, int s_h, const BoundaryConfig& bc);

/// General axis-aligned grid of nx*ny*nz unit-cube cells scaled into the
/// unit cube; used for non-cubic layouts (e.g. flat 3x3x1 grids).
std::pair<PatchDecomposition, ControlGraph>
build_grid_decomposition(int nx, int ny, int nz, int s_h, const BoundaryConfig& bc);

/// Ring of n_ring wedge patches around the z-axis (polyhedral torus with
/// planar faces), height 2, inner radius 1, outer radius 2.
std::pair<PatchDecomposition, ControlGraph>
build_torus_decomposition(int n_ring, int s_h, const BoundaryConfig& bc);

/// Euler characteristic |N_dec| - |E_dec| + |F_dec| - |C_dec| of the coarse
/// complex.
int coarse_euler_constant(const PatchDecomposition& dec);

/// First Betti number of the solid (1 - Euler characteristic for a solid
/// handlebody).
int first_betti_number(const PatchDecomposition& dec);

/// Fill edge/node flags and the disjoint wire-basket classification from
/// the per-face kinds. Called by the builders; exposed for tests.
void classify_edges(ControlGraph& graph, const PatchDecomposition& dec);

/// CSV dump of the graph: edge id, node ids, class, flags, owners.
std::string dump_graph_csv(const ControlGraph& graph);

}  // namespace ieti

#endif  // IETI_MESH_HPP
