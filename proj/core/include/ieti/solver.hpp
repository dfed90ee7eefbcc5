// SPDX-License-Identifier: Apache-2.0

#ifndef IETI_SOLVER_HPP
#define IETI_SOLVER_HPP

#include <limits>
#include <memory>

#include "ieti/coupling.hpp"

namespace ieti {

enum class Precond : uint8_t { None, Lumped, Dirichlet };

/// Condition number estimate; failure (breakdown, NaN, vanishing smallest
/// eigenvalue) is a value, not an error.
struct CondEstimate {
  double value = std::numeric_limits<double>::quiet_NaN();
  bool failed = true;
};

/// Sparse LDLT with explicit singularity detection: a pivot is singular when
/// |d| < 1e-12 * max |d| or not finite. A singular matrix is refactorized
/// with a small diagonal shift so downstream solves stay finite.
class LdltCheck {
 public:
  LdltCheck() = default;
  LdltCheck(LdltCheck&&) = default;
  LdltCheck& operator=(LdltCheck&&) = default;

  void compute(const SpMat& K);
  template <typename Rhs>
  auto solve(const Rhs& b) const {
    return fac_->solve(b.eval()).eval();
  }
  bool singular() const { return singular_; }
  int bad_pivot() const { return bad_pivot_; }  // original row index, -1 if regular

 private:
  std::unique_ptr<Eigen::SimplicialLDLT<SpMat>> fac_;
  bool singular_ = false;
  int bad_pivot_ = -1;
};

struct PcgResult {
  Eigen::VectorXd x;
  int iterations = 0;
  bool converged = false;
  std::vector<double> residuals;  // relative preconditioned residual per iteration
  std::vector<double> alpha, beta;  // CG coefficients, for the Lanczos tridiagonal
};

using ApplyFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// PCG with zero initial guess; stops at relative preconditioned residual
/// sqrt(r.z)/sqrt(r0.z0) <= tol or after max_iter iterations.
PcgResult pcg(const ApplyFn& A, const Eigen::VectorXd& rhs, const ApplyFn& Minv,
              double tol, int max_iter);

/// Largest/smallest absolute Ritz values of a symmetric operator by the
/// Lanczos iteration with full reorthogonalization.
CondEstimate lanczos_condition(const ApplyFn& apply, int n, int max_iter = 150,
                               uint64_t seed = 0x5eed);

/// Condition of the preconditioned operator from the CG coefficients.
CondEstimate pcg_condition(const PcgResult& r);

/// Condition from an explicitly known symmetric matrix (used for the coarse
/// matrix, which is small and dense).
CondEstimate dense_condition(const Eigen::MatrixXd& A);

struct SolveOptions {
  Precond precond = Precond::Dirichlet;
  double tol = 1e-6;
  int max_iter = 0;  // 0: 10 * m_r
  bool estimate_conditions = false;  // local block and coarse matrix spectra
};

struct SolveReport {
  int n = 0;      // total local DOFs over all subdomains
  int m_r = 0;    // remaining multipliers
  int n_gp = 0;   // global primal unknowns
  int n_p = 0;    // stacked local primal DOFs
  int iterations = 0;
  bool converged = false;
  std::vector<double> residuals;

  std::vector<int> singular_subdomains;  // K_rr blocks flagged singular
  std::vector<char> connected;           // eliminated local graph per subdomain
  bool coarse_singular = false;

  CondEstimate cond_Krr;        // worst subdomain; failed if any block failed
  CondEstimate cond_F;
  CondEstimate cond_S;          // from CG coefficients of the actual run
  CondEstimate cond_precond_S;  // same when a preconditioner is active

  double eps_B = std::numeric_limits<double>::quiet_NaN();
  double max_jump_rel = std::numeric_limits<double>::quiet_NaN();

  double time_setup = 0.0, time_pcg = 0.0, time_total = 0.0;  // seconds
};

struct SolveResult {
  SolveReport report;
  std::vector<Eigen::VectorXd> coeffs;  // per patch, full local edge vectors
};

/// All dual-primal operators of one decomposed problem. The interface
/// operator S = G F^-1 G^T - W is negative definite; the PCG runs on -S,
/// which leaves the multipliers unchanged.
class DualPrimal {
 public:
  DualPrimal(const PatchDecomposition& dec, const ControlGraph& graph, const GaugeTree& tree,
             const ManufacturedCase& mc);

  int m_r() const { return m_r_; }
  int n_gp() const { return n_gp_; }
  int n_total() const { return n_total_; }
  int n_p() const { return basis_.n_p; }

  const std::vector<int>& singular_subdomains() const { return singular_subdomains_; }
  bool coarse_singular() const { return coarse_singular_; }
  std::vector<char> connectivity() const;  // eliminated_graph_connected per subdomain

  /// y = -S x (positive semidefinite side).
  Eigen::VectorXd apply_neg_S(const Eigen::VectorXd& x) const;
  /// Right-hand side of -S lambda = rhs.
  Eigen::VectorXd interface_rhs() const;

  Eigen::VectorXd apply_lumped(const Eigen::VectorXd& r) const;
  Eigen::VectorXd apply_dirichlet(const Eigen::VectorXd& r) const;
  ApplyFn preconditioner(Precond p) const;

  /// Full per-patch coefficient vectors from the interface multipliers:
  /// coarse recovery, local back-substitution, reinsertion of gauged zeros
  /// and Dirichlet values.
  std::vector<Eigen::VectorXd> recover(const Eigen::VectorXd& lambda) const;

  /// Spectrum-based condition estimates.
  CondEstimate cond_coarse() const;   // of -F before any regularizing shift
  CondEstimate cond_Krr_worst() const;

  const ControlGraph& graph() const { return graph_; }
  const GaugeTree& tree() const { return tree_; }

 private:
  struct Sub {
    std::vector<int> r_index;   // local edge -> r position or -1
    std::vector<int> p_index;   // local edge -> local primal position or -1
    std::vector<int> r_edges;   // r position -> local edge
    std::vector<int> rI, rV;    // positions within r
    SpMat Krr, K_II, K_IV, K_VV;
    Eigen::MatrixXd Krp;        // n_r x np_loc
    Eigen::MatrixXd Kpp;        // np_loc x np_loc
    Eigen::VectorXd jr, jp;
    Eigen::MatrixXd Cs;         // np_loc x n_gp
    LdltCheck Krr_fac, KVV_fac;
    std::vector<DofTag> tag;
    Eigen::VectorXd dirichlet_values;  // full local size
    Eigen::VectorXd zr;                // Krr^-1 jr
  };

  const PatchDecomposition& dec_;
  const ControlGraph& graph_;
  const GaugeTree& tree_;

  std::vector<Sub> subs_;
  std::vector<SpMat> B_;  // per patch, m_r x n_r
  PrimalBasis basis_;
  std::vector<CouplingRow> dual_rows_;

  Eigen::MatrixXd G_;     // m_r x n_gp
  Eigen::MatrixXd Fpos_;  // -F, positive definite when the gauge is complete
  Eigen::LDLT<Eigen::MatrixXd> Fpos_fac_;
  Eigen::VectorXd d_, e_;
  bool coarse_singular_ = false;
  std::vector<int> singular_subdomains_;
  int m_r_ = 0, n_gp_ = 0, n_total_ = 0;

  Eigen::VectorXd solve_F(const Eigen::VectorXd& b) const;  // F^-1 b = -Fpos^-1 b
};

/// Full pipeline: operators, PCG, recovery, error and jump checks.
SolveResult solve_ieti(const PatchDecomposition& dec, const ControlGraph& graph,
                       const GaugeTree& tree, const ManufacturedCase& mc,
                       const SolveOptions& opt = {});

/// Monolithic oracle: one globally assembled system with the same tree
/// gauge and Dirichlet data, direct-solved; returns per-patch coefficients.
std::vector<Eigen::VectorXd> solve_monolithic(const PatchDecomposition& dec,
                                              const ControlGraph& graph, const GaugeTree& tree,
                                              const ManufacturedCase& mc);

}  // namespace ieti

#endif  // IETI_SOLVER_HPP
