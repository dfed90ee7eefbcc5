// SPDX-License-Identifier: Apache-2.0

#include "ieti/solver.hpp"

#include <chrono>
#include <cmath>
#include <random>

namespace ieti {

namespace {

constexpr double kPivotRel = 1e-12;   // singularity threshold relative to max pivot
constexpr double kShiftRel = 1e-10;   // regularizing shift relative to max diagonal
constexpr double kSpectrumRel = 1e-13;  // "failed" threshold for min/max eigenvalue

double max_abs_diagonal(const SpMat& K) {
  double m = 0.0;
  for (int c = 0; c < K.outerSize(); ++c)
    for (SpMat::InnerIterator it(K, c); it; ++it)
      if (it.row() == c) m = std::max(m, std::abs(it.value()));
  return m;
}

CondEstimate spectrum_condition(const Eigen::VectorXd& eigs) {
  CondEstimate ce;
  if (eigs.size() == 0) return ce;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int i = 0; i < eigs.size(); ++i) {
    const double a = std::abs(eigs[i]);
    if (!std::isfinite(a)) return ce;
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  if (lo < kSpectrumRel * hi) return ce;
  ce.value = hi / lo;
  ce.failed = false;
  return ce;
}

Eigen::VectorXd tridiagonal_eigs(const std::vector<double>& diag,
                                 const std::vector<double>& offdiag) {
  const int m = static_cast<int>(diag.size());
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    T(i, i) = diag[i];
    if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = offdiag[i];
  }
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(T).eigenvalues();
}

}  // namespace

void LdltCheck::compute(const SpMat& K) {
  singular_ = false;
  bad_pivot_ = -1;
  fac_ = std::make_unique<Eigen::SimplicialLDLT<SpMat>>();
  if (K.rows() == 0) return;
  fac_->compute(K);

  bool bad = fac_->info() != Eigen::Success;
  int arg = -1;
  // scan the pivots even when Eigen already flagged a numerical issue, so
  // the offending index can be reported
  const auto& D = fac_->vectorD();
  if (D.size() == K.rows()) {
    double dmax = 0.0;
    for (int i = 0; i < D.size(); ++i) {
      if (!std::isfinite(D[i])) bad = true;
      dmax = std::max(dmax, std::abs(D[i]));
    }
    double dmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < D.size(); ++i)
      if (std::abs(D[i]) < dmin) {
        dmin = std::abs(D[i]);
        arg = i;
      }
    if (dmin < kPivotRel * dmax) bad = true;
  }
  if (!bad) return;

  singular_ = true;
  if (arg >= 0) {
    const auto& perm = fac_->permutationP().indices();
    for (int j = 0; j < perm.size(); ++j)
      if (perm[j] == arg) {
        bad_pivot_ = j;
        break;
      }
  }
  double shift = kShiftRel * max_abs_diagonal(K);
  if (shift <= 0.0) shift = kShiftRel;
  fac_->setShift(shift);
  fac_->compute(K);
}

PcgResult pcg(const ApplyFn& A, const Eigen::VectorXd& rhs, const ApplyFn& Minv,
              double tol, int max_iter) {
  PcgResult out;
  const Eigen::Index n = rhs.size();
  out.x = Eigen::VectorXd::Zero(n);
  if (n == 0 || rhs.norm() == 0.0) {
    out.converged = true;
    return out;
  }

  Eigen::VectorXd r = rhs;
  Eigen::VectorXd z = Minv ? Minv(r) : r;
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  const double res0 = std::sqrt(std::abs(rz));
  out.residuals.push_back(1.0);
  if (!(res0 > 0.0) || !std::isfinite(res0)) return out;

  for (int k = 0; k < max_iter; ++k) {
    const Eigen::VectorXd q = A(p);
    const double pq = p.dot(q);
    const double alpha = rz / pq;
    if (!std::isfinite(alpha)) return out;
    out.alpha.push_back(alpha);
    out.x += alpha * p;
    r -= alpha * q;
    z = Minv ? Minv(r) : r;
    const double rz_new = r.dot(z);
    const double rel = std::sqrt(std::abs(rz_new)) / res0;
    out.residuals.push_back(rel);
    out.iterations = k + 1;
    if (!std::isfinite(rel)) return out;
    if (rel <= tol) {
      out.converged = true;
      return out;
    }
    const double beta = rz_new / rz;
    out.beta.push_back(beta);
    p = z + beta * p;
    rz = rz_new;
  }
  return out;
}

CondEstimate pcg_condition(const PcgResult& r) {
  const int m = static_cast<int>(r.alpha.size());
  if (m == 0) return {};
  std::vector<double> diag(m), off(m > 1 ? m - 1 : 0);
  for (int k = 0; k < m; ++k) {
    diag[k] = 1.0 / r.alpha[k];
    if (k > 0) diag[k] += r.beta[k - 1] / r.alpha[k - 1];
    if (k + 1 < m) {
      if (r.beta[k] < 0.0) return {};
      off[k] = std::sqrt(r.beta[k]) / r.alpha[k];
    }
  }
  for (double v : diag)
    if (!std::isfinite(v)) return {};
  return spectrum_condition(tridiagonal_eigs(diag, off));
}

CondEstimate dense_condition(const Eigen::MatrixXd& A) {
  if (A.rows() == 0) return {};
  if (!A.allFinite()) return {};
  return spectrum_condition(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(A).eigenvalues());
}

CondEstimate lanczos_condition(const ApplyFn& apply, int n, int max_iter, uint64_t seed) {
  if (n <= 0) return {};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = dist(rng);
  v.normalize();

  const int m = std::min(n, max_iter);
  Eigen::MatrixXd V(n, m);
  std::vector<double> diag, off;
  Eigen::VectorXd v_prev = Eigen::VectorXd::Zero(n);
  double beta_prev = 0.0;
  double scale = 0.0;

  for (int j = 0; j < m; ++j) {
    V.col(j) = v;
    Eigen::VectorXd w = apply(v);
    const double alpha = v.dot(w);
    if (!std::isfinite(alpha)) return {};
    diag.push_back(alpha);
    scale = std::max(scale, std::abs(alpha));
    w -= alpha * v + beta_prev * v_prev;
    // full reorthogonalization, twice
    for (int pass = 0; pass < 2; ++pass)
      w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
    const double beta = w.norm();
    if (!std::isfinite(beta)) return {};
    if (j + 1 == m || beta < 1e-12 * std::max(scale, 1.0)) break;
    off.push_back(beta);
    v_prev = v;
    v = w / beta;
    beta_prev = beta;
  }
  return spectrum_condition(tridiagonal_eigs(diag, off));
}

DualPrimal::DualPrimal(const PatchDecomposition& dec, const ControlGraph& graph,
                       const GaugeTree& tree, const ManufacturedCase& mc)
    : dec_(dec), graph_(graph), tree_(tree) {
  const int N = graph.num_patches();
  subs_.resize(N);
  basis_ = build_primal_basis(graph, tree);
  n_gp_ = basis_.n_gp;

  std::vector<std::vector<DofTag>> all_tags(N);
  std::vector<std::vector<int>> r_maps(N);
  std::vector<int> r_dims(N);

  for (int p = 0; p < N; ++p) {
    Sub& s = subs_[p];
    const LocalSystem sys = build_local_system(dec, graph, tree, mc, p);
    const int nloc = static_cast<int>(sys.tag.size());
    s.tag = sys.tag;
    s.dirichlet_values = sys.dirichlet_values;
    n_total_ += nloc;

    s.r_index.assign(nloc, -1);
    s.p_index.assign(nloc, -1);
    for (int le = 0; le < nloc; ++le)
      if (s.tag[le] == DofTag::RemainingInterface || s.tag[le] == DofTag::RemainingInterior) {
        s.r_index[le] = static_cast<int>(s.r_edges.size());
        s.r_edges.push_back(le);
      }
    const auto& ploc = tree.primal_local[p];
    for (size_t t = 0; t < ploc.size(); ++t) s.p_index[ploc[t]] = static_cast<int>(t);
    const int nr = static_cast<int>(s.r_edges.size());
    const int np = static_cast<int>(ploc.size());

    // block split with Dirichlet values folded into the right-hand side
    Eigen::VectorXd rhs = sys.rhs;
    std::vector<Eigen::Triplet<double>> trr;
    s.Krp = Eigen::MatrixXd::Zero(nr, np);
    s.Kpp = Eigen::MatrixXd::Zero(np, np);
    for (int c = 0; c < sys.K.outerSize(); ++c)
      for (SpMat::InnerIterator it(sys.K, c); it; ++it) {
        const int r = static_cast<int>(it.row());
        const int rr = s.r_index[r], rc = s.r_index[c];
        const int pr = s.p_index[r], pc = s.p_index[c];
        if (rr >= 0 && rc >= 0) trr.emplace_back(rr, rc, it.value());
        else if (rr >= 0 && pc >= 0) s.Krp(rr, pc) += it.value();
        else if (pr >= 0 && pc >= 0) s.Kpp(pr, pc) += it.value();
        if ((rr >= 0 || pr >= 0) && s.tag[c] == DofTag::Dirichlet)
          rhs[r] -= it.value() * s.dirichlet_values[c];
      }
    s.Krr.resize(nr, nr);
    s.Krr.setFromTriplets(trr.begin(), trr.end());
    s.jr.resize(nr);
    for (int i = 0; i < nr; ++i) s.jr[i] = rhs[s.r_edges[i]];
    s.jp.resize(np);
    for (int le = 0; le < nloc; ++le)
      if (s.p_index[le] >= 0) s.jp[s.p_index[le]] = rhs[le];

    s.Krr_fac.compute(s.Krr);
    if (s.Krr_fac.singular()) singular_subdomains_.push_back(p);
    s.zr = s.Krr_fac.solve(s.jr);

    // interface/interior split of the r-DOFs for the preconditioners
    std::vector<int> to_I(nr, -1), to_V(nr, -1);
    for (int i = 0; i < nr; ++i) {
      if (s.tag[s.r_edges[i]] == DofTag::RemainingInterface) {
        to_I[i] = static_cast<int>(s.rI.size());
        s.rI.push_back(i);
      } else {
        to_V[i] = static_cast<int>(s.rV.size());
        s.rV.push_back(i);
      }
    }
    std::vector<Eigen::Triplet<double>> tII, tIV, tVV;
    for (int c = 0; c < s.Krr.outerSize(); ++c)
      for (SpMat::InnerIterator it(s.Krr, c); it; ++it) {
        const int r = static_cast<int>(it.row());
        if (to_I[r] >= 0 && to_I[c] >= 0) tII.emplace_back(to_I[r], to_I[c], it.value());
        else if (to_I[r] >= 0 && to_V[c] >= 0) tIV.emplace_back(to_I[r], to_V[c], it.value());
        else if (to_V[r] >= 0 && to_V[c] >= 0) tVV.emplace_back(to_V[r], to_V[c], it.value());
      }
    const int nI = static_cast<int>(s.rI.size()), nV = static_cast<int>(s.rV.size());
    s.K_II.resize(nI, nI);
    s.K_II.setFromTriplets(tII.begin(), tII.end());
    s.K_IV.resize(nI, nV);
    s.K_IV.setFromTriplets(tIV.begin(), tIV.end());
    s.K_VV.resize(nV, nV);
    s.K_VV.setFromTriplets(tVV.begin(), tVV.end());
    if (nV > 0) s.KVV_fac.compute(s.K_VV);

    // local block of the primal basis as a dense matrix
    s.Cs = Eigen::MatrixXd::Zero(np, n_gp_);
    for (size_t t = 0; t < ploc.size(); ++t) {
      const int ge = graph.patch_edge_global[p][ploc[t]];
      const auto it = std::lower_bound(tree.primal_edges.begin(), tree.primal_edges.end(), ge);
      s.Cs(static_cast<int>(t), static_cast<int>(it - tree.primal_edges.begin())) =
          double(graph.patch_edge_sign[p][ploc[t]]);
    }

    all_tags[p] = s.tag;
    r_maps[p] = s.r_index;
    r_dims[p] = nr;
  }

  const CouplingSplit split = split_coupling(build_coupling(graph), all_tags);
  dual_rows_ = split.dual;
  m_r_ = static_cast<int>(dual_rows_.size());
  B_ = jump_matrices(dual_rows_, N, r_maps, r_dims);

  Fpos_ = Eigen::MatrixXd::Zero(n_gp_, n_gp_);
  G_ = Eigen::MatrixXd::Zero(m_r_, n_gp_);
  d_ = Eigen::VectorXd::Zero(n_gp_);
  e_ = Eigen::VectorXd::Zero(m_r_);
  for (int p = 0; p < N; ++p) {
    Sub& s = subs_[p];
    e_ += B_[p] * s.zr;
    if (s.Cs.rows() == 0) continue;
    const Eigen::MatrixXd KrpC = s.Krp * s.Cs;             // n_r x n_gp
    const Eigen::MatrixXd Y = s.Krr_fac.solve(KrpC);       // Krr^-1 Krp C
    Fpos_ += s.Cs.transpose() * s.Kpp * s.Cs - KrpC.transpose() * Y;
    d_ += KrpC.transpose() * s.zr - s.Cs.transpose() * s.jp;
    G_ += B_[p] * Y;
  }
  Fpos_ = 0.5 * (Fpos_ + Fpos_.transpose()).eval();

  if (n_gp_ > 0) {
    Fpos_fac_.compute(Fpos_);
    const auto D = Fpos_fac_.vectorD();
    double dmax = 0.0;
    bool bad = Fpos_fac_.info() != Eigen::Success;
    for (int i = 0; i < D.size(); ++i) {
      if (!std::isfinite(D[i])) bad = true;
      dmax = std::max(dmax, std::abs(D[i]));
    }
    for (int i = 0; i < D.size(); ++i)
      if (std::abs(D[i]) < kPivotRel * dmax) bad = true;
    if (bad) {
      coarse_singular_ = true;
      double shift = kShiftRel * std::max(Fpos_.diagonal().cwiseAbs().maxCoeff(), 1.0);
      Fpos_fac_.compute(Fpos_ + shift * Eigen::MatrixXd::Identity(n_gp_, n_gp_));
    }
  }
}

Eigen::VectorXd DualPrimal::solve_F(const Eigen::VectorXd& b) const {
  return -Fpos_fac_.solve(b);
}

Eigen::VectorXd DualPrimal::apply_neg_S(const Eigen::VectorXd& x) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m_r_);
  if (n_gp_ > 0) out += G_ * Fpos_fac_.solve(G_.transpose() * x);
  for (size_t p = 0; p < subs_.size(); ++p)
    out += B_[p] * subs_[p].Krr_fac.solve(B_[p].transpose() * x);
  return out;
}

Eigen::VectorXd DualPrimal::interface_rhs() const {
  Eigen::VectorXd rhs = e_;
  if (n_gp_ > 0) rhs += G_ * Fpos_fac_.solve(d_);
  return rhs;
}

Eigen::VectorXd DualPrimal::apply_lumped(const Eigen::VectorXd& r) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m_r_);
  for (size_t p = 0; p < subs_.size(); ++p) {
    const Sub& s = subs_[p];
    const Eigen::VectorXd w = B_[p].transpose() * r;
    Eigen::VectorXd wI(s.rI.size());
    for (size_t i = 0; i < s.rI.size(); ++i) wI[i] = w[s.rI[i]];
    const Eigen::VectorXd uI = s.K_II * wI;
    Eigen::VectorXd u = Eigen::VectorXd::Zero(w.size());
    for (size_t i = 0; i < s.rI.size(); ++i) u[s.rI[i]] = uI[i];
    out += B_[p] * u;
  }
  return out;
}

Eigen::VectorXd DualPrimal::apply_dirichlet(const Eigen::VectorXd& r) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m_r_);
  for (size_t p = 0; p < subs_.size(); ++p) {
    const Sub& s = subs_[p];
    const Eigen::VectorXd w = B_[p].transpose() * r;
    Eigen::VectorXd wI(s.rI.size());
    for (size_t i = 0; i < s.rI.size(); ++i) wI[i] = w[s.rI[i]];
    Eigen::VectorXd uI = s.K_II * wI;
    if (!s.rV.empty())
      uI -= s.K_IV * s.KVV_fac.solve(s.K_IV.transpose() * wI);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(w.size());
    for (size_t i = 0; i < s.rI.size(); ++i) u[s.rI[i]] = uI[i];
    out += B_[p] * u;
  }
  return out;
}

ApplyFn DualPrimal::preconditioner(Precond p) const {
  switch (p) {
    case Precond::Lumped:
      return [this](const Eigen::VectorXd& r) { return apply_lumped(r); };
    case Precond::Dirichlet:
      return [this](const Eigen::VectorXd& r) { return apply_dirichlet(r); };
    case Precond::None:
    default:
      return {};
  }
}

std::vector<Eigen::VectorXd> DualPrimal::recover(const Eigen::VectorXd& lambda) const {
  Eigen::VectorXd p_glob(n_gp_);
  if (n_gp_ > 0) p_glob = solve_F(d_ - G_.transpose() * lambda);

  std::vector<Eigen::VectorXd> coeffs(subs_.size());
  for (size_t p = 0; p < subs_.size(); ++p) {
    const Sub& s = subs_[p];
    const Eigen::VectorXd ap = s.Cs.rows() > 0
                                   ? Eigen::VectorXd(s.Cs * p_glob)
                                   : Eigen::VectorXd::Zero(0);
    const Eigen::VectorXd ar =
        s.Krr_fac.solve(s.jr - s.Krp * ap - B_[p].transpose() * lambda);

    Eigen::VectorXd a = Eigen::VectorXd::Zero(s.tag.size());
    for (size_t le = 0; le < s.tag.size(); ++le) {
      switch (s.tag[le]) {
        case DofTag::Dirichlet: a[le] = s.dirichlet_values[le]; break;
        case DofTag::Tree: a[le] = 0.0; break;
        case DofTag::Primal: a[le] = ap[s.p_index[le]]; break;
        default: a[le] = ar[s.r_index[le]];
      }
    }
    coeffs[p] = std::move(a);
  }
  return coeffs;
}

std::vector<char> DualPrimal::connectivity() const {
  std::vector<char> ok(subs_.size(), 0);
  for (size_t p = 0; p < subs_.size(); ++p)
    ok[p] = eliminated_graph_connected(static_cast<int>(p), tree_, graph_) ? 1 : 0;
  return ok;
}

CondEstimate DualPrimal::cond_coarse() const {
  if (n_gp_ == 0) return {};
  return dense_condition(Fpos_);
}

CondEstimate DualPrimal::cond_Krr_worst() const {
  CondEstimate worst;
  worst.failed = false;
  worst.value = 1.0;
  for (const Sub& s : subs_) {
    if (s.Krr.rows() == 0) continue;
    if (s.Krr_fac.singular()) return {};
    const CondEstimate ce = lanczos_condition(
        [&s](const Eigen::VectorXd& v) { return Eigen::VectorXd(s.Krr * v); },
        static_cast<int>(s.Krr.rows()));
    if (ce.failed) return {};
    worst.value = std::max(worst.value, ce.value);
  }
  return worst;
}

SolveResult solve_ieti(const PatchDecomposition& dec, const ControlGraph& graph,
                       const GaugeTree& tree, const ManufacturedCase& mc,
                       const SolveOptions& opt) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();

  SolveResult out;
  SolveReport& rep = out.report;

  DualPrimal dp(dec, graph, tree, mc);
  rep.n = dp.n_total();
  rep.m_r = dp.m_r();
  rep.n_gp = dp.n_gp();
  rep.n_p = dp.n_p();
  rep.singular_subdomains = dp.singular_subdomains();
  rep.coarse_singular = dp.coarse_singular();
  rep.connected = dp.connectivity();

  const auto t1 = clock::now();
  rep.time_setup = std::chrono::duration<double>(t1 - t0).count();

  const int max_iter = opt.max_iter > 0 ? opt.max_iter : std::max(10 * dp.m_r(), 10);
  const PcgResult pr = pcg([&dp](const Eigen::VectorXd& v) { return dp.apply_neg_S(v); },
                           dp.interface_rhs(), dp.preconditioner(opt.precond), opt.tol,
                           max_iter);
  rep.iterations = pr.iterations;
  rep.converged = pr.converged;
  rep.residuals = pr.residuals;
  if (opt.precond == Precond::None)
    rep.cond_S = pcg_condition(pr);
  else
    rep.cond_precond_S = pcg_condition(pr);

  const auto t2 = clock::now();
  rep.time_pcg = std::chrono::duration<double>(t2 - t1).count();

  if (opt.estimate_conditions) {
    rep.cond_F = dp.cond_coarse();
    rep.cond_Krr = dp.cond_Krr_worst();
    if (opt.precond != Precond::None) {
      // unpreconditioned spectrum from a plain CG run on the same system
      const PcgResult plain =
          pcg([&dp](const Eigen::VectorXd& v) { return dp.apply_neg_S(v); },
              dp.interface_rhs(), {}, opt.tol, max_iter);
      rep.cond_S = pcg_condition(plain);
    }
  }

  out.coeffs = dp.recover(pr.x);
  rep.eps_B = error_B(dec, out.coeffs, mc);

  double a_norm_sq = 0.0;
  for (const auto& a : out.coeffs) a_norm_sq += a.squaredNorm();
  const double a_norm = std::sqrt(a_norm_sq);
  const double jump = max_interface_jump(build_coupling(graph), out.coeffs);
  rep.max_jump_rel = a_norm > 0.0 ? jump / a_norm : jump;

  rep.time_total = std::chrono::duration<double>(clock::now() - t0).count();
  return out;
}

std::vector<Eigen::VectorXd> solve_monolithic(const PatchDecomposition& dec,
                                              const ControlGraph& graph, const GaugeTree& tree,
                                              const ManufacturedCase& mc) {
  const int nE = graph.num_edges();
  const int N = graph.num_patches();

  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd jg = Eigen::VectorXd::Zero(nE);
  Eigen::VectorXd dir = Eigen::VectorXd::Zero(nE);
  std::vector<char> has_dir(nE, 0);

  const double nu = mc.nu;
  for (int p = 0; p < N; ++p) {
    const Patch& patch = dec.patches[p];
    const SpMat K = assemble_stiffness(patch, [nu](const Vec3&) { return nu; });
    const Eigen::VectorXd rhs = assemble_rhs(patch, dec.faces[p], mc);
    const Eigen::VectorXd dv = dirichlet_values(patch, graph, p, mc);
    const auto& emap = graph.patch_edge_global[p];
    const auto& sign = graph.patch_edge_sign[p];

    for (int c = 0; c < K.outerSize(); ++c)
      for (SpMat::InnerIterator it(K, c); it; ++it) {
        const int r = static_cast<int>(it.row());
        trips.emplace_back(emap[r], emap[c], double(sign[r]) * double(sign[c]) * it.value());
      }
    for (int le = 0; le < rhs.size(); ++le) jg[emap[le]] += double(sign[le]) * rhs[le];
    for (int le = 0; le < dv.size(); ++le)
      if (graph.edge_has(emap[le], flags::dirichlet) && !has_dir[emap[le]]) {
        dir[emap[le]] = double(sign[le]) * dv[le];
        has_dir[emap[le]] = 1;
      }
  }
  SpMat Kg(nE, nE);
  Kg.setFromTriplets(trips.begin(), trips.end());

  // eliminate Dirichlet edges (data values) and gauged edges (zero)
  std::vector<int> keep(nE, -1);
  int nk = 0;
  for (int e = 0; e < nE; ++e)
    if (!graph.edge_has(e, flags::dirichlet) && !tree.eliminated(e)) keep[e] = nk++;

  Eigen::VectorXd rhs_k(nk);
  for (int e = 0; e < nE; ++e)
    if (keep[e] >= 0) rhs_k[keep[e]] = jg[e];
  std::vector<Eigen::Triplet<double>> tk;
  for (int c = 0; c < Kg.outerSize(); ++c)
    for (SpMat::InnerIterator it(Kg, c); it; ++it) {
      const int r = static_cast<int>(it.row());
      if (keep[r] < 0) continue;
      if (keep[c] >= 0)
        tk.emplace_back(keep[r], keep[c], it.value());
      else if (graph.edge_has(c, flags::dirichlet))
        rhs_k[keep[r]] -= it.value() * dir[c];
    }
  SpMat Kk(nk, nk);
  Kk.setFromTriplets(tk.begin(), tk.end());

  LdltCheck fac;
  fac.compute(Kk);
  if (fac.singular()) throw InvariantViolation("monolithic gauged system is singular");
  const Eigen::VectorXd ak = fac.solve(rhs_k);

  Eigen::VectorXd ag = Eigen::VectorXd::Zero(nE);
  for (int e = 0; e < nE; ++e) {
    if (keep[e] >= 0) ag[e] = ak[keep[e]];
    else if (graph.edge_has(e, flags::dirichlet)) ag[e] = dir[e];
  }

  std::vector<Eigen::VectorXd> coeffs(N);
  for (int p = 0; p < N; ++p) {
    const auto& emap = graph.patch_edge_global[p];
    const auto& sign = graph.patch_edge_sign[p];
    Eigen::VectorXd a(emap.size());
    for (size_t le = 0; le < emap.size(); ++le) a[le] = double(sign[le]) * ag[emap[le]];
    coeffs[p] = std::move(a);
  }
  return coeffs;
}

}  // namespace ieti
