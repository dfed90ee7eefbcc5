// SPDX-License-Identifier: Apache-2.0

#include "ieti/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <tuple>

namespace ieti {

namespace {

double lin(int side, double t) { return side == 0 ? 1.0 - t : t; }

using NodeKey = std::array<long long, 3>;  // rounded (z,y,x)

NodeKey key_of(const Vec3& p) {
  auto r = [](double x) { return std::llround(x * 1e9); };
  return {r(p.z()), r(p.y()), r(p.x())};
}

}  // namespace

Vec3 Patch::map(double u, double v, double w) const {
  Vec3 p = Vec3::Zero();
  for (int c = 0; c < 8; ++c) {
    const int i = c & 1, j = (c >> 1) & 1, k = (c >> 2) & 1;
    p += corners[c] * (lin(i, u) * lin(j, v) * lin(k, w));
  }
  return p;
}

Eigen::Matrix3d Patch::jacobian(double u, double v, double w) const {
  Eigen::Matrix3d J = Eigen::Matrix3d::Zero();
  for (int c = 0; c < 8; ++c) {
    const int i = c & 1, j = (c >> 1) & 1, k = (c >> 2) & 1;
    const double du = (i == 0 ? -1.0 : 1.0) * lin(j, v) * lin(k, w);
    const double dv = lin(i, u) * (j == 0 ? -1.0 : 1.0) * lin(k, w);
    const double dw = lin(i, u) * lin(j, v) * (k == 0 ? -1.0 : 1.0);
    J.col(0) += corners[c] * du;
    J.col(1) += corners[c] * dv;
    J.col(2) += corners[c] * dw;
  }
  return J;
}

BoundaryConfig BoundaryConfig::all_dirichlet() {
  return {[](const std::array<Vec3, 4>&, const Vec3&) { return BcTag::Dirichlet; }};
}

BoundaryConfig BoundaryConfig::all_neumann() {
  return {[](const std::array<Vec3, 4>&, const Vec3&) { return BcTag::Neumann; }};
}

BoundaryConfig BoundaryConfig::cube_mixed() {
  return {[](const std::array<Vec3, 4>& fc, const Vec3&) {
    const double y = (fc[0].y() + fc[1].y() + fc[2].y() + fc[3].y()) / 4.0;
    const bool on_y_side = std::abs(y) < 1e-9 || std::abs(y - 1.0) < 1e-9;
    return on_y_side ? BcTag::Dirichlet : BcTag::Neumann;
  }};
}

BoundaryConfig BoundaryConfig::torus_mixed(double r_inner) {
  return {[r_inner](const std::array<Vec3, 4>& fc, const Vec3&) {
    for (const auto& p : fc) {
      if (std::hypot(p.x(), p.y()) > r_inner + 1e-6) return BcTag::Neumann;
    }
    return BcTag::Dirichlet;
  }};
}

BoundaryConfig BoundaryConfig::cube_sides(const std::vector<std::string>& dirichlet_sides) {
  return {[dirichlet_sides](const std::array<Vec3, 4>& fc, const Vec3&) {
    Vec3 c = (fc[0] + fc[1] + fc[2] + fc[3]) / 4.0;
    std::string side;
    for (int a = 0; a < 3; ++a) {
      if (std::abs(c[a]) < 1e-9) side = std::string(1, char('x' + a)) + "0";
      if (std::abs(c[a] - 1.0) < 1e-9) side = std::string(1, char('x' + a)) + "1";
    }
    const bool dir = std::find(dirichlet_sides.begin(), dirichlet_sides.end(), side) !=
                     dirichlet_sides.end();
    return dir ? BcTag::Dirichlet : BcTag::Neumann;
  }};
}

int PatchTopology::edge_index(int d, int i, int j, int k) const {
  // block per direction; within a block lexicographic by (k,j,i)
  const int sp = s + 1;
  switch (d) {
    case 0: return i + s * (j + sp * k);
    case 1: return s * sp * sp + i + sp * (j + s * k);
    default: return 2 * s * sp * sp + i + sp * (j + sp * k);
  }
}

void PatchTopology::edge_decode(int e, int& d, int& i, int& j, int& k) const {
  const int sp = s + 1;
  const int block = s * sp * sp;
  d = e / block;
  int r = e - d * block;
  if (d == 0) {
    i = r % s; r /= s; j = r % sp; k = r / sp;
  } else if (d == 1) {
    i = r % sp; r /= sp; j = r % s; k = r / s;
  } else {
    i = r % sp; r /= sp; j = r % sp; k = r / sp;
  }
}

std::array<int, 2> PatchTopology::edge_nodes(int e) const {
  int d, i, j, k;
  edge_decode(e, d, i, j, k);
  const int tail = node_index(i, j, k);
  const int head = node_index(i + (d == 0), j + (d == 1), k + (d == 2));
  return {tail, head};
}

bool PatchTopology::node_on_face(int f, int i, int j, int k, int s) {
  const int a = f / 2;
  const int coord = (a == 0) ? i : (a == 1) ? j : k;
  return coord == (f % 2 == 0 ? 0 : s);
}

std::array<std::array<int, 3>, 4> face_corner_params(int f) {
  const int a = f / 2, side = f % 2;
  const int b = (a + 1) % 3, c = (a + 2) % 3;
  std::array<std::array<int, 3>, 4> out{};
  const int pat[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  for (int q = 0; q < 4; ++q) {
    std::array<int, 3> p{};
    p[a] = side;
    p[b] = pat[q][0];
    p[c] = pat[q][1];
    out[q] = p;
  }
  return out;
}

int face_normal_axis(int f) { return f / 2; }
int face_normal_sign(int f) { return f % 2 == 0 ? -1 : 1; }

namespace {

Vec3 outward_normal_at_centroid(const Patch& p, int f) {
  const int a = face_normal_axis(f);
  double uvw[3] = {0.5, 0.5, 0.5};
  uvw[a] = f % 2 == 0 ? 0.0 : 1.0;
  const Eigen::Matrix3d J = p.jacobian(uvw[0], uvw[1], uvw[2]);
  // cofactor action: det(J) J^{-T} e_a, pointing along +-parametric a
  Vec3 n = J.determinant() * J.inverse().transpose().col(a);
  n *= face_normal_sign(f);
  return n.normalized();
}

void check_jacobians(const Patch& p, int patch_id) {
  static const double g3[3] = {0.5 - std::sqrt(0.15), 0.5, 0.5 + std::sqrt(0.15)};
  for (double u : g3)
    for (double v : g3)
      for (double w : g3)
        if (p.jacobian(u, v, w).determinant() <= 0.0)
          throw GeometryError("nonpositive Jacobian determinant in patch " +
                              std::to_string(patch_id));
}

std::pair<PatchDecomposition, ControlGraph>
build_from_patches(std::vector<Patch> patches, const BoundaryConfig& bc) {
  if (!bc.tag) throw ConfigError("boundary config has no tagging function");

  PatchDecomposition dec;
  dec.patches = std::move(patches);
  const int N = static_cast<int>(dec.patches.size());
  dec.faces.assign(N, {});
  dec.coarse_cells = N;

  for (int p = 0; p < N; ++p) check_jacobians(dec.patches[p], p);

  // --- coarse complex: merge patch corners ---
  std::map<NodeKey, int> corner_id;
  std::vector<std::array<int, 8>> patch_corner(N);
  for (int p = 0; p < N; ++p)
    for (int c = 0; c < 8; ++c) {
      auto [it, ins] = corner_id.try_emplace(key_of(dec.patches[p].corners[c]),
                                             static_cast<int>(corner_id.size()));
      patch_corner[p][c] = it->second;
    }
  dec.coarse_vertices = static_cast<int>(corner_id.size());

  std::map<std::array<int, 2>, int> coarse_edge;
  static const int cube_edges[12][2] = {{0, 1}, {2, 3}, {4, 5}, {6, 7}, {0, 2}, {1, 3},
                                        {4, 6}, {5, 7}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};
  for (int p = 0; p < N; ++p)
    for (auto& e : cube_edges) {
      std::array<int, 2> k{patch_corner[p][e[0]], patch_corner[p][e[1]]};
      if (k[0] > k[1]) std::swap(k[0], k[1]);
      coarse_edge.try_emplace(k, static_cast<int>(coarse_edge.size()));
    }
  dec.coarse_edges = static_cast<int>(coarse_edge.size());

  std::map<std::array<int, 4>, std::vector<std::array<int, 2>>> face_map;
  for (int p = 0; p < N; ++p)
    for (int f = 0; f < 6; ++f) {
      auto fc = face_corner_params(f);
      std::array<int, 4> k{};
      for (int q = 0; q < 4; ++q)
        k[q] = patch_corner[p][fc[q][0] + 2 * fc[q][1] + 4 * fc[q][2]];
      std::sort(k.begin(), k.end());
      face_map[k].push_back({p, f});
    }
  dec.coarse_faces = static_cast<int>(face_map.size());

  for (auto& [key, owners] : face_map) {
    if (owners.size() > 2)
      throw GeometryError("patch face shared by more than two patches");
    if (owners.size() == 2) {
      auto [pi, fi] = std::pair{owners[0][0], owners[0][1]};
      auto [pj, fj] = std::pair{owners[1][0], owners[1][1]};
      dec.faces[pi][fi] = {FaceKind::Interface, pj, fj};
      dec.faces[pj][fj] = {FaceKind::Interface, pi, fi};
      dec.interface_list.push_back({pi, fi, pj, fj});
    } else {
      const int p = owners[0][0], f = owners[0][1];
      std::array<Vec3, 4> fc{};
      auto params = face_corner_params(f);
      for (int q = 0; q < 4; ++q)
        fc[q] = dec.patches[p].corners[params[q][0] + 2 * params[q][1] + 4 * params[q][2]];
      const BcTag tag = bc.tag(fc, outward_normal_at_centroid(dec.patches[p], f));
      dec.faces[p][f].kind = tag == BcTag::Dirichlet ? FaceKind::Dirichlet : FaceKind::Neumann;
    }
  }
  std::sort(dec.interface_list.begin(), dec.interface_list.end());

  // --- fine control graph ---
  ControlGraph g;
  g.patch_node_global.resize(N);
  g.patch_edge_global.resize(N);
  g.patch_edge_sign.resize(N);

  std::map<NodeKey, int> node_id;  // ordered by (z,y,x): lexicographic numbering
  std::vector<std::vector<NodeKey>> patch_keys(N);
  for (int p = 0; p < N; ++p) {
    const Patch& pa = dec.patches[p];
    const PatchTopology topo(pa.subdivisions);
    const int s = pa.subdivisions;
    patch_keys[p].resize(topo.num_nodes());
    for (int k = 0; k <= s; ++k)
      for (int j = 0; j <= s; ++j)
        for (int i = 0; i <= s; ++i) {
          const Vec3 x = pa.map(double(i) / s, double(j) / s, double(k) / s);
          patch_keys[p][topo.node_index(i, j, k)] = key_of(x);
          node_id.try_emplace(patch_keys[p][topo.node_index(i, j, k)], 0);
        }
  }
  {
    int id = 0;
    for (auto& [k, v] : node_id) v = id++;  // std::map iterates in key order
  }
  g.node_coords.resize(node_id.size());
  g.node_owners.resize(node_id.size());
  for (int p = 0; p < N; ++p) {
    const PatchTopology topo(dec.patches[p].subdivisions);
    g.patch_node_global[p].resize(topo.num_nodes());
    for (int ln = 0; ln < topo.num_nodes(); ++ln) {
      const int gn = node_id.at(patch_keys[p][ln]);
      g.patch_node_global[p][ln] = gn;
      g.node_owners[gn].push_back({p, ln});
      const auto& k = patch_keys[p][ln];
      g.node_coords[gn] = Vec3(k[2] * 1e-9, k[1] * 1e-9, k[0] * 1e-9);
    }
  }

  std::map<std::array<int, 2>, int> edge_id;
  for (int p = 0; p < N; ++p) {
    const PatchTopology topo(dec.patches[p].subdivisions);
    for (int le = 0; le < topo.num_edges(); ++le) {
      auto [t, h] = topo.edge_nodes(le);
      std::array<int, 2> k{g.patch_node_global[p][t], g.patch_node_global[p][h]};
      if (k[0] > k[1]) std::swap(k[0], k[1]);
      edge_id.try_emplace(k, 0);
    }
  }
  {
    int id = 0;
    for (auto& [k, v] : edge_id) v = id++;
  }
  g.edges.resize(edge_id.size());
  g.edge_owners.resize(edge_id.size());
  for (auto& [k, v] : edge_id) g.edges[v] = k;
  for (int p = 0; p < N; ++p) {
    const PatchTopology topo(dec.patches[p].subdivisions);
    g.patch_edge_global[p].resize(topo.num_edges());
    g.patch_edge_sign[p].resize(topo.num_edges());
    for (int le = 0; le < topo.num_edges(); ++le) {
      auto [t, h] = topo.edge_nodes(le);
      const int gt = g.patch_node_global[p][t], gh = g.patch_node_global[p][h];
      std::array<int, 2> k{std::min(gt, gh), std::max(gt, gh)};
      const int ge = edge_id.at(k);
      const int8_t sign = gt < gh ? 1 : -1;
      g.patch_edge_global[p][le] = ge;
      g.patch_edge_sign[p][le] = sign;
      g.edge_owners[ge].push_back({p, le, sign});
    }
  }

  classify_edges(g, dec);
  return {std::move(dec), std::move(g)};
}

}  // namespace

void classify_edges(ControlGraph& g, const PatchDecomposition& dec) {
  const int N = static_cast<int>(dec.patches.size());
  g.edge_flags.assign(g.num_edges(), 0);
  g.node_flags.assign(g.num_nodes(), 0);
  g.edge_class.assign(g.num_edges(), EdgeClass::Interior);

  for (int p = 0; p < N; ++p) {
    const int s = dec.patches[p].subdivisions;
    const PatchTopology topo(s);

    // wire basket: both off-direction coordinates extremal
    for (int le = 0; le < topo.num_edges(); ++le) {
      int d, i, j, k;
      topo.edge_decode(le, d, i, j, k);
      const int coords[3] = {i, j, k};
      bool wb = true;
      for (int a = 0; a < 3; ++a)
        if (a != d && coords[a] != 0 && coords[a] != s) wb = false;
      if (wb) g.edge_flags[g.patch_edge_global[p][le]] |= flags::wire_basket;
    }
    for (int k = 0; k <= s; ++k)
      for (int j = 0; j <= s; ++j)
        for (int i = 0; i <= s; ++i) {
          const int ext = (i == 0 || i == s) + (j == 0 || j == s) + (k == 0 || k == s);
          if (ext >= 2)
            g.node_flags[g.patch_node_global[p][topo.node_index(i, j, k)]] |= flags::wire_basket;
        }

    for (int f = 0; f < 6; ++f) {
      uint8_t fl = 0;
      switch (dec.faces[p][f].kind) {
        case FaceKind::Dirichlet: fl = flags::dirichlet; break;
        case FaceKind::Neumann: fl = flags::neumann; break;
        case FaceKind::Interface: fl = flags::interface_; break;
      }
      const int a = face_normal_axis(f);
      const int want = f % 2 == 0 ? 0 : s;
      for (int le = 0; le < topo.num_edges(); ++le) {
        int d, i, j, k;
        topo.edge_decode(le, d, i, j, k);
        if (d == a) continue;
        const int coords[3] = {i, j, k};
        if (coords[a] == want) g.edge_flags[g.patch_edge_global[p][le]] |= fl;
      }
      for (int k = 0; k <= s; ++k)
        for (int j = 0; j <= s; ++j)
          for (int i = 0; i <= s; ++i)
            if (PatchTopology::node_on_face(f, i, j, k, s))
              g.node_flags[g.patch_node_global[p][topo.node_index(i, j, k)]] |= fl;
    }
  }

  for (int e = 0; e < g.num_edges(); ++e) {
    const bool D = g.edge_has(e, flags::dirichlet);
    const bool Nn = g.edge_has(e, flags::neumann);
    const bool I = g.edge_has(e, flags::interface_);
    if (g.edge_has(e, flags::wire_basket)) {
      if (D && I) g.edge_class[e] = EdgeClass::WbDI;
      else if (D && Nn) g.edge_class[e] = EdgeClass::WbDN;
      else if (Nn && I) g.edge_class[e] = EdgeClass::WbNI;
      else if (I) g.edge_class[e] = EdgeClass::WbII;
      else if (D) g.edge_class[e] = EdgeClass::WbDD;
      else if (Nn) g.edge_class[e] = EdgeClass::WbNN;
      else throw InvariantViolation("wire-basket edge without facet membership");
    } else if (I) {
      g.edge_class[e] = EdgeClass::FacetI;
    } else if (D) {
      g.edge_class[e] = EdgeClass::FacetD;
    } else if (Nn) {
      g.edge_class[e] = EdgeClass::FacetN;
    } else {
      g.edge_class[e] = EdgeClass::Interior;
    }
  }
}

std::pair<PatchDecomposition, ControlGraph>
build_grid_decomposition(int nx, int ny, int nz, int s_h, const BoundaryConfig& bc) {
  if (nx < 1 || ny < 1 || nz < 1 || s_h < 1)
    throw ConfigError("grid decomposition requires positive cell counts and subdivisions");
  std::vector<Patch> patches;
  const double hx = 1.0 / nx, hy = 1.0 / ny, hz = 1.0 / nz;
  for (int pz = 0; pz < nz; ++pz)
    for (int py = 0; py < ny; ++py)
      for (int px = 0; px < nx; ++px) {
        Patch p;
        p.subdivisions = s_h;
        for (int c = 0; c < 8; ++c) {
          const int i = c & 1, j = (c >> 1) & 1, k = (c >> 2) & 1;
          p.corners[c] = Vec3((px + i) * hx, (py + j) * hy, (pz + k) * hz);
        }
        patches.push_back(p);
      }
  return build_from_patches(std::move(patches), bc);
}

std::pair<PatchDecomposition, ControlGraph>
build_cube_decomposition(int s_H, int s_h, const BoundaryConfig& bc) {
  if (s_H < 1 || s_h < 1) throw ConfigError("cube decomposition requires s_H >= 1, s_h >= 1");
  return build_grid_decomposition(s_H, s_H, s_H, s_h, bc);
}

std::pair<PatchDecomposition, ControlGraph>
build_torus_decomposition(int n_ring, int s_h, const BoundaryConfig& bc) {
  // odd counts: n_ring wedges of full height; even counts: n_ring/2 wedges
  // split into two vertical layers, which makes the subdomain cross-sections
  // square and gives the layout with horizontal interfaces
  const int n_ang = n_ring % 2 == 0 ? n_ring / 2 : n_ring;
  const int n_lay = n_ring % 2 == 0 ? 2 : 1;
  if (n_ang < 3) throw ConfigError("torus ring requires at least 3 wedges");
  if (s_h < 1) throw ConfigError("torus requires s_h >= 1");
  const double r_i = 1.0, r_o = 2.0, height = 2.0;
  std::vector<double> ca(n_ang), sa(n_ang);
  for (int k = 0; k < n_ang; ++k) {
    const double th = 2.0 * M_PI * k / n_ang;
    ca[k] = std::cos(th);
    sa[k] = std::sin(th);
  }
  std::vector<Patch> patches;
  for (int l = 0; l < n_lay; ++l)
    for (int k = 0; k < n_ang; ++k) {
      const int kn = (k + 1) % n_ang;
      const double z0 = height * l / n_lay, z1 = height * (l + 1) / n_lay;
      Patch p;
      p.subdivisions = s_h;
      // u: radial, v: angular (counterclockwise), w: z
      for (int c = 0; c < 8; ++c) {
        const int i = c & 1, j = (c >> 1) & 1, kk = (c >> 2) & 1;
        const double r = i == 0 ? r_i : r_o;
        const int ang = j == 0 ? k : kn;
        p.corners[c] = Vec3(r * ca[ang], r * sa[ang], kk == 0 ? z0 : z1);
      }
      patches.push_back(p);
    }
  return build_from_patches(std::move(patches), bc);
}

int coarse_euler_constant(const PatchDecomposition& dec) {
  return dec.coarse_vertices - dec.coarse_edges + dec.coarse_faces - dec.coarse_cells;
}

int first_betti_number(const PatchDecomposition& dec) {
  return 1 - coarse_euler_constant(dec);
}

std::string dump_graph_csv(const ControlGraph& g) {
  static const char* names[] = {"WbDI", "WbDN", "WbNI", "WbII", "WbDD",
                                "WbNN", "FacetD", "FacetN", "FacetI", "Interior"};
  std::ostringstream os;
  os << "edge,node_lo,node_hi,class,dirichlet,neumann,interface,wire_basket,owners\n";
  for (int e = 0; e < g.num_edges(); ++e) {
    os << e << ',' << g.edges[e][0] << ',' << g.edges[e][1] << ','
       << names[static_cast<int>(g.edge_class[e])] << ','
       << g.edge_has(e, flags::dirichlet) << ',' << g.edge_has(e, flags::neumann) << ','
       << g.edge_has(e, flags::interface_) << ',' << g.edge_has(e, flags::wire_basket) << ',';
    for (size_t c = 0; c < g.edge_owners[e].size(); ++c) {
      if (c) os << ';';
      os << g.edge_owners[e][c].patch;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace ieti
