// SPDX-License-Identifier: Apache-2.0
//
// Edge-element assembly oracles: finite-difference curls, analytic
// integrals, manufactured-solution identities, interpolation convergence.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "ieti/assembly.hpp"

using namespace ieti;

namespace {

// 4-point Gauss-Legendre on [0,1]
constexpr double gx[4] = {0.069431844202973714, 0.33000947820757187,
                          0.66999052179242813, 0.93056815579702623};
constexpr double gw[4] = {0.17392742256872692, 0.32607257743127305,
                          0.32607257743127305, 0.17392742256872692};

Patch unit_patch(int s_h = 1) {
  Patch p;
  p.corners = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0),
               Vec3(0, 0, 1), Vec3(1, 0, 1), Vec3(0, 1, 1), Vec3(1, 1, 1)};
  p.subdivisions = s_h;
  return p;
}

// central-difference curl of a vector field
Vec3 fd_curl(const std::function<Vec3(const Vec3&)>& f, const Vec3& x, double h = 1e-5) {
  auto d = [&](int comp, int axis) {
    Vec3 xp = x, xm = x;
    xp[axis] += h;
    xm[axis] -= h;
    return (f(xp)[comp] - f(xm)[comp]) / (2 * h);
  };
  return Vec3(d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1));
}

double fd_div(const std::function<Vec3(const Vec3&)>& f, const Vec3& x, double h = 1e-5) {
  double s = 0;
  for (int a = 0; a < 3; ++a) {
    Vec3 xp = x, xm = x;
    xp[a] += h;
    xm[a] -= h;
    s += (f(xp)[a] - f(xm)[a]) / (2 * h);
  }
  return s;
}

// reference-element coefficient vector of the discrete gradient of the hat
// function at corner c (bits: x + 2y + 4z)
Eigen::Matrix<double, 12, 1> gradient_coeffs(int corner) {
  Eigen::Matrix<double, 12, 1> g = Eigen::Matrix<double, 12, 1>::Zero();
  for (int k = 0; k < 12; ++k) {
    int d, c0, c1;
    ReferenceBasis::edge_info(k, d, c0, c1);
    const int b = (d + 1) % 3, c = (d + 2) % 3;
    int coord[3];
    coord[b] = c0;
    coord[c] = c1;
    coord[d] = 0;
    const int tail = coord[0] + 2 * coord[1] + 4 * coord[2];
    coord[d] = 1;
    const int head = coord[0] + 2 * coord[1] + 4 * coord[2];
    if (head == corner) g[k] += 1.0;
    if (tail == corner) g[k] -= 1.0;
  }
  return g;
}

// line integral of A . t along patch-local edge e (4-point Gauss)
double edge_line_integral(const Patch& patch, const PatchTopology& topo, int e,
                          const std::function<Vec3(const Vec3&)>& A) {
  int d, i, j, k;
  topo.edge_decode(e, d, i, j, k);
  const double s = double(topo.s);
  double acc = 0.0;
  for (int q = 0; q < 4; ++q) {
    Vec3 uvw(i / s, j / s, k / s);
    uvw[d] += gx[q] / s;
    const Vec3 x = patch.map(uvw[0], uvw[1], uvw[2]);
    const Vec3 tangent = patch.jacobian(uvw[0], uvw[1], uvw[2]).col(d) / s;
    acc += gw[q] * A(x).dot(tangent);
  }
  return acc;
}

}  // namespace

TEST_CASE("tangential edge moments of the reference basis are Kronecker deltas") {
  for (int m = 0; m < 12; ++m) {
    int dm, c0, c1;
    ReferenceBasis::edge_info(m, dm, c0, c1);
    const int b = (dm + 1) % 3, c = (dm + 2) % 3;
    for (int k = 0; k < 12; ++k) {
      double moment = 0.0;
      for (int q = 0; q < 4; ++q) {
        Vec3 xhat;
        xhat[dm] = gx[q];
        xhat[b] = c0;
        xhat[c] = c1;
        moment += gw[q] * ReferenceBasis::values(xhat)(dm, k);
      }
      CHECK(moment == doctest::Approx(k == m ? 1.0 : 0.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("reference curls match finite differences of the shape functions") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int trial = 0; trial < 5; ++trial) {
    const Vec3 x(u(rng), u(rng), u(rng));
    const auto curls = ReferenceBasis::curls(x);
    for (int k = 0; k < 12; ++k) {
      auto wk = [k](const Vec3& p) { return Vec3(ReferenceBasis::values(p).col(k)); };
      CHECK((curls.col(k) - fd_curl(wk, x)).norm() < 1e-8);
    }
  }
  // the documented example: edge along x at (y,z)=(0,0)
  const Vec3 x(0.3, 0.2, 0.6);
  const Vec3 expect(0.0, -(1 - x.y()), (1 - x.z()));
  CHECK((ReferenceBasis::curls(x).col(0) - expect).norm() < 1e-14);
  CHECK((ReferenceBasis::values(x).col(0) -
         Vec3((1 - x.y()) * (1 - x.z()), 0, 0)).norm() < 1e-14);
}

TEST_CASE("discrete gradients lie in the kernel of the curl and of K") {
  for (int corner = 0; corner < 8; ++corner) {
    const auto g = gradient_coeffs(corner);
    const Vec3 x(0.31, 0.77, 0.12);
    CHECK((ReferenceBasis::curls(x) * g).norm() < 1e-14);
  }
  // assembled single-element stiffness annihilates patch-level gradients
  const Patch p = unit_patch(1);
  const SpMat K = assemble_stiffness(p);
  const PatchTopology topo(1);
  for (int node = 0; node < topo.num_nodes(); ++node) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(topo.num_edges());
    for (int e = 0; e < topo.num_edges(); ++e) {
      const auto nodes = topo.edge_nodes(e);
      if (nodes[1] == node) g[e] += 1.0;
      if (nodes[0] == node) g[e] -= 1.0;
    }
    CHECK((K * g).norm() < 1e-12 * K.norm());
  }
}

TEST_CASE("stiffness is symmetric, deterministic, and scales like 1/2 under dilation by 2") {
  const Patch p = unit_patch(1);
  const SpMat K = assemble_stiffness(p);
  CHECK((Eigen::MatrixXd(K) - Eigen::MatrixXd(K).transpose()).cwiseAbs().maxCoeff() == 0.0);

  const SpMat K2 = assemble_stiffness(p);
  CHECK((Eigen::MatrixXd(K) - Eigen::MatrixXd(K2)).cwiseAbs().maxCoeff() == 0.0);

  Patch big = p;
  for (auto& c : big.corners) c *= 2.0;
  const SpMat Kb = assemble_stiffness(big);
  CHECK((Eigen::MatrixXd(Kb) - 0.5 * Eigen::MatrixXd(K)).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("inverted element geometry is rejected") {
  Patch p = unit_patch(1);
  std::swap(p.corners[0], p.corners[1]);
  std::swap(p.corners[2], p.corners[3]);
  std::swap(p.corners[4], p.corners[5]);
  std::swap(p.corners[6], p.corners[7]);
  CHECK_THROWS_AS(assemble_stiffness(p), GeometryError);
}

TEST_CASE("manufactured trigonometric case is internally consistent") {
  const ManufacturedCase mc = ManufacturedCase::trig();
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  for (int trial = 0; trial < 8; ++trial) {
    const Vec3 x(u(rng), u(rng), u(rng));
    CHECK((mc.B(x) - fd_curl(mc.A, x)).norm() < 1e-8);
    CHECK((mc.J(x) - fd_curl(mc.B, x)).norm() < 1e-8);
    CHECK(std::abs(fd_div(mc.J, x)) < 1e-8);  // compatible source
  }
  CHECK(mc.B(Vec3(0, 0, 0)).norm() == doctest::Approx(0.0));
  const Vec3 b = mc.B(Vec3(0, M_PI / 2, M_PI / 2));
  CHECK(b.x() == doctest::Approx(-3.0));
  CHECK(b.y() == doctest::Approx(0.0));
  CHECK(b.z() == doctest::Approx(0.0));
}

TEST_CASE("right-hand side") {
  std::array<PatchFace, 6> neumann_faces;
  for (auto& f : neumann_faces) f.kind = FaceKind::Neumann;

  SUBCASE("zero data gives the zero vector") {
    const Eigen::VectorXd j = assemble_rhs(unit_patch(2), neumann_faces, ManufacturedCase::zero());
    CHECK(j.norm() == 0.0);
  }
  SUBCASE("constant source (0,0,1): edge-wise moments 1/4 on the z-edges") {
    ManufacturedCase mc = ManufacturedCase::zero();
    mc.J = [](const Vec3&) { return Vec3(0, 0, 1); };
    const Eigen::VectorXd j = assemble_rhs(unit_patch(1), neumann_faces, mc);
    const PatchTopology topo(1);
    for (int e = 0; e < topo.num_edges(); ++e) {
      int d, i, jj, k;
      topo.edge_decode(e, d, i, jj, k);
      CHECK(j[e] == doctest::Approx(d == 2 ? 0.25 : 0.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("Dirichlet coefficients are edge line integrals of A . t") {
  auto [dec, graph] = build_cube_decomposition(1, 2, BoundaryConfig::all_dirichlet());
  const ManufacturedCase mc = ManufacturedCase::trig();
  const Eigen::VectorXd dv = dirichlet_values(dec.patches[0], graph, 0, mc);
  const PatchTopology topo(2);
  // edge along x out of the origin, length h = 1/2: integral of sin(x)
  const int e0 = topo.edge_index(0, 0, 0, 0);
  CHECK(dv[e0] == doctest::Approx(1.0 - std::cos(0.5)).epsilon(1e-10));
  // every boundary edge matches an independent quadrature of A . t
  for (int e = 0; e < topo.num_edges(); ++e) {
    if (dv[e] == 0.0) continue;
    CHECK(dv[e] == doctest::Approx(edge_line_integral(dec.patches[0], topo, e, mc.A))
                       .epsilon(1e-12));
  }
}

TEST_CASE("Dirichlet elimination") {
  SUBCASE("homogeneous boundary values leave the retained right-hand side unchanged") {
    auto [dec, graph] = build_cube_decomposition(1, 2, BoundaryConfig::all_dirichlet());
    const GaugeTree tree = build_gauge_tree(graph, dec);
    ManufacturedCase mc = ManufacturedCase::zero();
    mc.J = ManufacturedCase::trig().J;  // source only, g_D = 0
    const LocalSystem sys = build_local_system(dec, graph, tree, mc, 0);
    std::vector<int> retained;
    const LocalSystem red = eliminate_dirichlet(sys, &retained);
    for (int e = 0; e < sys.K.rows(); ++e)
      if (retained[e] >= 0) CHECK(red.rhs[retained[e]] == sys.rhs[e]);
  }
  SUBCASE("all DOFs Dirichlet: empty retained system") {
    auto [dec, graph] = build_cube_decomposition(1, 1, BoundaryConfig::all_dirichlet());
    const GaugeTree tree = build_gauge_tree(graph, dec);
    const LocalSystem sys = build_local_system(dec, graph, tree, ManufacturedCase::trig(), 0);
    const LocalSystem red = eliminate_dirichlet(sys);
    CHECK(red.K.rows() == 0);
    CHECK(red.rhs.size() == 0);
  }
}

TEST_CASE("B-field error functional") {
  SUBCASE("zero coefficients: the norm of the manufactured field itself") {
    auto [dec, graph] = build_cube_decomposition(1, 2, BoundaryConfig::all_neumann());
    std::vector<Eigen::VectorXd> zero(1, Eigen::VectorXd::Zero(PatchTopology(2).num_edges()));
    const double eps = error_B(dec, zero, ManufacturedCase::trig());
    // analytic L2 norm of B over the unit cube
    const double cc = 0.5 + std::sin(2.0) / 4.0;
    const double ss = 0.5 - std::sin(2.0) / 4.0;
    CHECK(eps == doctest::Approx(std::sqrt(18.0 * cc * ss * ss)).epsilon(1e-8));
    (void)graph;
  }
  SUBCASE("edge interpolant of the analytic potential converges at order 1") {
    const ManufacturedCase mc = ManufacturedCase::trig();
    std::vector<double> errs;
    for (int s_h : {2, 4, 8}) {
      auto [dec, graph] = build_cube_decomposition(1, s_h, BoundaryConfig::all_neumann());
      const PatchTopology topo(s_h);
      Eigen::VectorXd a(topo.num_edges());
      for (int e = 0; e < topo.num_edges(); ++e)
        a[e] = edge_line_integral(dec.patches[0], topo, e, mc.A);
      errs.push_back(error_B(dec, {a}, mc));
      (void)graph;
    }
    const double r1 = std::log2(errs[0] / errs[1]);
    const double r2 = std::log2(errs[1] / errs[2]);
    CHECK(r1 > 0.8);
    CHECK(r1 < 1.2);
    CHECK(r2 > 0.8);
    CHECK(r2 < 1.2);
  }
}
