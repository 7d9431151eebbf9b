#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "msv/panel.hpp"
#include "msv/penalty.hpp"

namespace msv {

struct SolverOpts {
  double tol = 1e-8;     // max absolute coefficient change per sweep
  int max_sweeps = 1000;
};

/// Penalized VAR(m) fit: equation i of psi holds [Ψ₁ … Ψ_m] row i, so
/// column block k-1 multiplies x_{t-k}. residuals row aligned with response
/// time t satisfies residuals[t] = x_t - Ψ Z_{t-1} exactly.
struct VarFit {
  Eigen::MatrixXd psi;                            // p x (p*m)
  Eigen::MatrixXd residuals;                      // (T-m) x p
  std::vector<std::pair<int, int>> support;       // (row, col) of nonzero psi entries
  double lambda_used = 0.0;
  std::vector<double> objective_trace;            // total objective after each sweep
  int m = 0;
  int sweeps = 0;
  bool converged = true;
};

/// Solves (1/2n)Σ_t ‖x_t - Ψ Z_{m,t-1}‖² + Σ_ij p(λ, |Ψ_ij|) by cyclic
/// coordinate descent on a precomputed Gram matrix; rows of Ψ separate and are
/// solved independently. SCAD/MCP runs start from the LASSO solution at the
/// same λ. λ = 0 solves the normal equations directly. Hitting max_sweeps
/// returns the best iterate with converged=false rather than throwing.
VarFit fit_penalized_var(const LogSqPanel& x, int m, const PenaltySpec& spec,
                         const SolverOpts& opts = {});
VarFit fit_penalized_var(const RegressorMatrix& reg, const PenaltySpec& spec,
                         const SolverOpts& opts = {},
                         const Eigen::MatrixXd* warm_start = nullptr);

/// Descending log-spaced grid from λ_max (the smallest λ with an all-zero
/// LASSO solution) down to min_ratio·λ_max.
std::vector<double> default_lambda_grid(const RegressorMatrix& reg, int count = 50,
                                        double min_ratio = 1e-4);

struct CvPlan {
  int n_folds = 5;
  int gap = -1;                      // observations dropped on each side of a test block; -1 → m
  std::vector<double> lambda_grid;   // strictly descending; empty → default grid
};

struct CvResult {
  double lambda_star = 0.0;
  std::vector<double> lambda_grid;
  std::vector<double> cv_curve;      // mean squared one-step-ahead error per λ
  int n_folds = 0;
  int gap = 0;
};

/// hv-block cross-validation: contiguous equal test blocks, a gap excluded
/// from training on both sides of each block, one-step-ahead squared error
/// scored on the test rows. Ties in the curve resolve to the larger λ.
/// The λ inside `shape` is ignored; family and a/b are used.
CvResult hv_cross_validate(const LogSqPanel& x, int m, const PenaltySpec& shape,
                           const CvPlan& plan = {}, int jobs = 1);
CvResult hv_cross_validate(const RegressorMatrix& reg, const PenaltySpec& shape,
                           const CvPlan& plan = {}, int jobs = 1);

struct KktViolation {
  int row = 0;
  int col = 0;
  double statistic = 0.0;  // |gradient + p'·sign| (active) or |gradient| (inactive)
  double bound = 0.0;
};

struct KktReport {
  bool pass = true;
  double max_excess = 0.0;  // max over coordinates of statistic - bound
  std::vector<KktViolation> violations;
};

/// First-order stationarity certificate, recomputed from the data (not from
/// solver internals): active coordinates need |∇loss + p'(λ,|ψ|)·sign(ψ)| ≤ tol,
/// inactive ones |∇loss| ≤ p'(λ,0+) + tol.
KktReport kkt_check(const VarFit& fit, const LogSqPanel& x, const PenaltySpec& spec,
                    double tol = 1e-6);
KktReport kkt_check(const VarFit& fit, const RegressorMatrix& reg, const PenaltySpec& spec,
                    double tol = 1e-6);

}  // namespace msv
