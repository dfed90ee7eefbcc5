// SPDX-License-Identifier: Apache-2.0

#include "ieti/assembly.hpp"

#include <cmath>
#include <vector>

namespace ieti {

namespace {

struct Gauss {
  std::vector<double> x, w;  // on [0,1]
};

Gauss gauss_rule(int n) {
  Gauss g;
  switch (n) {
    case 2: {
      const double d = 0.5 / std::sqrt(3.0);
      g.x = {0.5 - d, 0.5 + d};
      g.w = {0.5, 0.5};
      break;
    }
    case 3: {
      const double d = 0.5 * std::sqrt(0.6);
      g.x = {0.5 - d, 0.5, 0.5 + d};
      g.w = {5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0};
      break;
    }
    case 4: {
      const double a = 0.3399810435848563, b = 0.8611363115940526;
      const double wa = 0.6521451548625461, wb = 0.3478548451374538;
      g.x = {0.5 * (1 - b), 0.5 * (1 - a), 0.5 * (1 + a), 0.5 * (1 + b)};
      g.w = {0.5 * wb, 0.5 * wa, 0.5 * wa, 0.5 * wb};
      break;
    }
    default: throw std::invalid_argument("unsupported Gauss rule");
  }
  return g;
}

double lin(int side, double t) { return side == 0 ? 1.0 - t : t; }
double dlin(int side) { return side == 0 ? -1.0 : 1.0; }

/// 8 corner points of element (ex,ey,ez) of a patch.
std::array<Vec3, 8> element_corners(const Patch& p, int ex, int ey, int ez) {
  const double s = p.subdivisions;
  std::array<Vec3, 8> c{};
  for (int q = 0; q < 8; ++q) {
    const int i = q & 1, j = (q >> 1) & 1, k = (q >> 2) & 1;
    c[q] = p.map((ex + i) / s, (ey + j) / s, (ez + k) / s);
  }
  return c;
}

Eigen::Matrix3d element_jacobian(const std::array<Vec3, 8>& c, const Vec3& xi) {
  Eigen::Matrix3d J = Eigen::Matrix3d::Zero();
  for (int q = 0; q < 8; ++q) {
    const int i = q & 1, j = (q >> 1) & 1, k = (q >> 2) & 1;
    J.col(0) += c[q] * (dlin(i) * lin(j, xi[1]) * lin(k, xi[2]));
    J.col(1) += c[q] * (lin(i, xi[0]) * dlin(j) * lin(k, xi[2]));
    J.col(2) += c[q] * (lin(i, xi[0]) * lin(j, xi[1]) * dlin(k));
  }
  return J;
}

Vec3 element_map(const std::array<Vec3, 8>& c, const Vec3& xi) {
  Vec3 p = Vec3::Zero();
  for (int q = 0; q < 8; ++q) {
    const int i = q & 1, j = (q >> 1) & 1, k = (q >> 2) & 1;
    p += c[q] * (lin(i, xi[0]) * lin(j, xi[1]) * lin(k, xi[2]));
  }
  return p;
}

}  // namespace

void ReferenceBasis::edge_info(int k, int& d, int& c0, int& c1) {
  d = k / 4;
  c0 = k % 2;
  c1 = (k / 2) % 2;
}

Eigen::Matrix<double, 3, 12> ReferenceBasis::values(const Vec3& x) {
  Eigen::Matrix<double, 3, 12> v = Eigen::Matrix<double, 3, 12>::Zero();
  for (int k = 0; k < 12; ++k) {
    int d, c0, c1;
    edge_info(k, d, c0, c1);
    const int b = (d + 1) % 3, c = (d + 2) % 3;
    v(d, k) = lin(c0, x[b]) * lin(c1, x[c]);
  }
  return v;
}

Eigen::Matrix<double, 3, 12> ReferenceBasis::curls(const Vec3& x) {
  Eigen::Matrix<double, 3, 12> v = Eigen::Matrix<double, 3, 12>::Zero();
  for (int k = 0; k < 12; ++k) {
    int d, c0, c1;
    edge_info(k, d, c0, c1);
    const int b = (d + 1) % 3, c = (d + 2) % 3;
    // curl(f e_d) = (d_c f) e_b - (d_b f) e_c for cyclic (d,b,c)
    v(b, k) = lin(c0, x[b]) * dlin(c1);
    v(c, k) = -dlin(c0) * lin(c1, x[c]);
  }
  return v;
}

ManufacturedCase ManufacturedCase::trig() {
  ManufacturedCase mc;
  mc.A = [](const Vec3& p) {
    return Vec3(std::cos(p.y()) * std::cos(p.z()) * std::sin(p.x()),
                -2.0 * std::cos(p.x()) * std::cos(p.z()) * std::sin(p.y()),
                std::cos(p.x()) * std::cos(p.y()) * std::sin(p.z()));
  };
  mc.B = [](const Vec3& p) {
    return Vec3(-3.0 * std::cos(p.x()) * std::sin(p.y()) * std::sin(p.z()), 0.0,
                3.0 * std::cos(p.z()) * std::sin(p.x()) * std::sin(p.y()));
  };
  mc.J = [](const Vec3& p) {
    return Vec3(3.0 * std::cos(p.z()) * std::sin(p.x()) * std::cos(p.y()),
                -6.0 * std::cos(p.x()) * std::sin(p.y()) * std::cos(p.z()),
                3.0 * std::cos(p.x()) * std::cos(p.y()) * std::sin(p.z()));
  };
  return mc;
}

ManufacturedCase ManufacturedCase::zero() {
  ManufacturedCase mc;
  auto z = [](const Vec3&) { return Vec3::Zero().eval(); };
  mc.A = z;
  mc.B = z;
  mc.J = z;
  return mc;
}

int element_edge_to_patch_edge(const PatchTopology& topo, int ex, int ey, int ez, int k) {
  int d, c0, c1;
  ReferenceBasis::edge_info(k, d, c0, c1);
  const int b = (d + 1) % 3, c = (d + 2) % 3;
  int idx[3] = {ex, ey, ez};
  idx[b] += c0;
  idx[c] += c1;
  return topo.edge_index(d, idx[0], idx[1], idx[2]);
}

SpMat assemble_stiffness(const Patch& patch, const std::function<double(const Vec3&)>& nu) {
  const int s = patch.subdivisions;
  const PatchTopology topo(s);
  const Gauss g = gauss_rule(3);

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(size_t(s) * s * s * 144);

  for (int ez = 0; ez < s; ++ez)
    for (int ey = 0; ey < s; ++ey)
      for (int ex = 0; ex < s; ++ex) {
        const auto corners = element_corners(patch, ex, ey, ez);
        Eigen::Matrix<double, 12, 12> Ke = Eigen::Matrix<double, 12, 12>::Zero();
        for (size_t qz = 0; qz < g.x.size(); ++qz)
          for (size_t qy = 0; qy < g.x.size(); ++qy)
            for (size_t qx = 0; qx < g.x.size(); ++qx) {
              const Vec3 xi(g.x[qx], g.x[qy], g.x[qz]);
              const Eigen::Matrix3d J = element_jacobian(corners, xi);
              const double det = J.determinant();
              if (det <= 0.0) throw GeometryError("nonpositive Jacobian at quadrature point");
              const double nuv = nu ? nu(element_map(corners, xi)) : 1.0;
              const double wq = g.w[qx] * g.w[qy] * g.w[qz] * nuv / det;
              const Eigen::Matrix<double, 3, 12> C = J * ReferenceBasis::curls(xi);
              Ke.noalias() += wq * (C.transpose() * C);
            }
        int pe[12];
        for (int k = 0; k < 12; ++k) pe[k] = element_edge_to_patch_edge(topo, ex, ey, ez, k);
        for (int r = 0; r < 12; ++r)
          for (int c = 0; c < 12; ++c) trips.emplace_back(pe[r], pe[c], Ke(r, c));
      }

  SpMat K(topo.num_edges(), topo.num_edges());
  K.setFromTriplets(trips.begin(), trips.end());
  return K;
}

Eigen::VectorXd assemble_rhs(const Patch& patch, const std::array<PatchFace, 6>& faces,
                             const ManufacturedCase& mc) {
  const int s = patch.subdivisions;
  const PatchTopology topo(s);
  const Gauss g = gauss_rule(3);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(topo.num_edges());

  for (int ez = 0; ez < s; ++ez)
    for (int ey = 0; ey < s; ++ey)
      for (int ex = 0; ex < s; ++ex) {
        const auto corners = element_corners(patch, ex, ey, ez);
        int pe[12];
        for (int k = 0; k < 12; ++k) pe[k] = element_edge_to_patch_edge(topo, ex, ey, ez, k);

        // volume term
        Eigen::Matrix<double, 12, 1> je = Eigen::Matrix<double, 12, 1>::Zero();
        for (size_t qz = 0; qz < g.x.size(); ++qz)
          for (size_t qy = 0; qy < g.x.size(); ++qy)
            for (size_t qx = 0; qx < g.x.size(); ++qx) {
              const Vec3 xi(g.x[qx], g.x[qy], g.x[qz]);
              const Eigen::Matrix3d J = element_jacobian(corners, xi);
              const double det = J.determinant();
              if (det <= 0.0) throw GeometryError("nonpositive Jacobian at quadrature point");
              const Vec3 x = element_map(corners, xi);
              const Eigen::Matrix<double, 3, 12> W =
                  J.inverse().transpose() * ReferenceBasis::values(xi);
              const double wq = g.w[qx] * g.w[qy] * g.w[qz] * det;
              je.noalias() += wq * (W.transpose() * mc.J(x));
            }

        // Neumann surface term on boundary-layer element faces
        const int elo[3] = {ex, ey, ez};
        for (int f = 0; f < 6; ++f) {
          if (faces[f].kind != FaceKind::Neumann) continue;
          const int a = face_normal_axis(f);
          const int layer = f % 2 == 0 ? 0 : s - 1;
          if (elo[a] != layer) continue;
          const int b = (a + 1) % 3, c = (a + 2) % 3;
          const double sf = face_normal_sign(f);
          for (size_t q1 = 0; q1 < g.x.size(); ++q1)
            for (size_t q0 = 0; q0 < g.x.size(); ++q0) {
              Vec3 xi;
              xi[a] = f % 2 == 0 ? 0.0 : 1.0;
              xi[b] = g.x[q0];
              xi[c] = g.x[q1];
              const Eigen::Matrix3d J = element_jacobian(corners, xi);
              const Vec3 x = element_map(corners, xi);
              const Vec3 nvec = J.col(b).cross(J.col(c));  // = det J^{-T} e_a
              const Vec3 gN_scaled = sf * mc.nu * mc.B(x).cross(nvec);
              const Eigen::Matrix<double, 3, 12> W =
                  J.inverse().transpose() * ReferenceBasis::values(xi);
              je.noalias() += (g.w[q0] * g.w[q1]) * (W.transpose() * gN_scaled);
            }
        }

        for (int k = 0; k < 12; ++k) rhs[pe[k]] += je[k];
      }
  return rhs;
}

Eigen::VectorXd dirichlet_values(const Patch& patch, const ControlGraph& graph, int patch_idx,
                                 const ManufacturedCase& mc) {
  const int s = patch.subdivisions;
  const PatchTopology topo(s);
  const Gauss g = gauss_rule(4);
  Eigen::VectorXd vals = Eigen::VectorXd::Zero(topo.num_edges());

  for (int le = 0; le < topo.num_edges(); ++le) {
    if (!graph.edge_has(graph.patch_edge_global[patch_idx][le], flags::dirichlet)) continue;
    int d, i, j, k;
    topo.edge_decode(le, d, i, j, k);
    double acc = 0.0;
    for (size_t q = 0; q < g.x.size(); ++q) {
      double uvw[3] = {double(i) / s, double(j) / s, double(k) / s};
      uvw[d] += g.x[q] / s;
      const Vec3 x = patch.map(uvw[0], uvw[1], uvw[2]);
      const Vec3 tangent = patch.jacobian(uvw[0], uvw[1], uvw[2]).col(d) / s;
      acc += g.w[q] * mc.A(x).dot(tangent);
    }
    vals[le] = acc;
  }
  return vals;
}

std::vector<DofTag> build_dof_tags(const ControlGraph& graph, const GaugeTree& tree,
                                   int patch_idx) {
  const auto& emap = graph.patch_edge_global[patch_idx];
  std::vector<char> primal(graph.num_edges(), 0);
  for (int e : tree.primal_edges) primal[e] = 1;

  std::vector<DofTag> tags(emap.size());
  for (size_t le = 0; le < emap.size(); ++le) {
    const int ge = emap[le];
    if (graph.edge_has(ge, flags::dirichlet))
      tags[le] = DofTag::Dirichlet;
    else if (tree.eliminated(ge))
      tags[le] = DofTag::Tree;
    else if (primal[ge])
      tags[le] = DofTag::Primal;
    else if (graph.edge_owners[ge].size() >= 2)
      tags[le] = DofTag::RemainingInterface;
    else
      tags[le] = DofTag::RemainingInterior;
  }
  return tags;
}

LocalSystem build_local_system(const PatchDecomposition& dec, const ControlGraph& graph,
                               const GaugeTree& tree, const ManufacturedCase& mc,
                               int patch_idx) {
  LocalSystem sys;
  const Patch& patch = dec.patches[patch_idx];
  const double nu = mc.nu;
  sys.K = assemble_stiffness(patch, [nu](const Vec3&) { return nu; });
  sys.rhs = assemble_rhs(patch, dec.faces[patch_idx], mc);
  sys.tag = build_dof_tags(graph, tree, patch_idx);
  sys.dirichlet_values = dirichlet_values(patch, graph, patch_idx, mc);
  return sys;
}

LocalSystem eliminate_dirichlet(const LocalSystem& sys, std::vector<int>* retained_index) {
  const int n = static_cast<int>(sys.tag.size());
  std::vector<int> idx(n, -1);
  int m = 0;
  for (int i = 0; i < n; ++i)
    if (sys.tag[i] != DofTag::Dirichlet) idx[i] = m++;

  LocalSystem out;
  out.tag.reserve(m);
  out.rhs = Eigen::VectorXd::Zero(m);
  out.dirichlet_values = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < n; ++i)
    if (idx[i] >= 0) {
      out.tag.push_back(sys.tag[i]);
      out.rhs[idx[i]] = sys.rhs[i];
    }

  std::vector<Eigen::Triplet<double>> trips;
  for (int c = 0; c < sys.K.outerSize(); ++c)
    for (SpMat::InnerIterator it(sys.K, c); it; ++it) {
      const int r = static_cast<int>(it.row());
      if (idx[r] >= 0 && idx[c] >= 0)
        trips.emplace_back(idx[r], idx[c], it.value());
      else if (idx[r] >= 0 && sys.tag[c] == DofTag::Dirichlet)
        out.rhs[idx[r]] -= it.value() * sys.dirichlet_values[c];
    }
  out.K.resize(m, m);
  out.K.setFromTriplets(trips.begin(), trips.end());
  if (retained_index) *retained_index = idx;
  return out;
}

namespace {

double curl_error_sq(const Patch& patch, const Eigen::VectorXd& coeffs,
                     const std::function<Vec3(const Vec3&)>& Bref) {
  const int s = patch.subdivisions;
  const PatchTopology topo(s);
  const Gauss g = gauss_rule(4);
  double acc = 0.0;
  for (int ez = 0; ez < s; ++ez)
    for (int ey = 0; ey < s; ++ey)
      for (int ex = 0; ex < s; ++ex) {
        const auto corners = element_corners(patch, ex, ey, ez);
        int pe[12];
        for (int k = 0; k < 12; ++k) pe[k] = element_edge_to_patch_edge(topo, ex, ey, ez, k);
        Eigen::Matrix<double, 12, 1> a;
        for (int k = 0; k < 12; ++k) a[k] = coeffs[pe[k]];
        for (size_t qz = 0; qz < g.x.size(); ++qz)
          for (size_t qy = 0; qy < g.x.size(); ++qy)
            for (size_t qx = 0; qx < g.x.size(); ++qx) {
              const Vec3 xi(g.x[qx], g.x[qy], g.x[qz]);
              const Eigen::Matrix3d J = element_jacobian(corners, xi);
              const double det = J.determinant();
              const Vec3 Bh = (J * (ReferenceBasis::curls(xi) * a)) / det;
              const Vec3 diff = Bref(element_map(corners, xi)) - Bh;
              acc += g.w[qx] * g.w[qy] * g.w[qz] * det * diff.squaredNorm();
            }
      }
  return acc;
}

}  // namespace

double error_B(const PatchDecomposition& dec, const std::vector<Eigen::VectorXd>& coeffs,
               const ManufacturedCase& mc) {
  double acc = 0.0;
  for (size_t p = 0; p < dec.patches.size(); ++p)
    acc += curl_error_sq(dec.patches[p], coeffs[p], mc.B);
  return std::sqrt(acc);
}

std::pair<double, double> curl_field_difference(const PatchDecomposition& dec,
                                                const std::vector<Eigen::VectorXd>& a,
                                                const std::vector<Eigen::VectorXd>& b) {
  // reuse the error quadrature with the second field as reference
  double diff_sq = 0.0, ref_sq = 0.0;
  for (size_t p = 0; p < dec.patches.size(); ++p) {
    const Patch& patch = dec.patches[p];
    const Eigen::VectorXd delta = a[p] - b[p];
    diff_sq += curl_error_sq(patch, delta, [](const Vec3&) { return Vec3::Zero().eval(); });
    ref_sq += curl_error_sq(patch, b[p], [](const Vec3&) { return Vec3::Zero().eval(); });
  }
  return {std::sqrt(diff_sq), std::sqrt(ref_sq)};
}

}  // namespace ieti
