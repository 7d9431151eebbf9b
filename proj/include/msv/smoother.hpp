#pragma once

#include <Eigen/Dense>
#include <vector>

#include "msv/model.hpp"
#include "msv/panel.hpp"

namespace msv {

enum class SolveBackend { DenseCholesky, ConjugateGradient };

/// The stacked covariance of the whole log-volatility panel: V_α has block
/// (s,t) equal to Φ^{s−t}Σ_α for s ≥ t and Σ_α(Φ')^{t−s} for s < t, and
/// V_x = V_α + I_T ⊗ Σ_ζ. Never materialized on the CG path.
struct StackedCov {
  Eigen::MatrixXd phi;
  Eigen::MatrixXd sigma_alpha;
  Eigen::MatrixXd sigma_zeta;
  int T = 0;
  SolveBackend backend = SolveBackend::DenseCholesky;
};

/// Builds the stack for a fitted model over T observations; picks dense
/// Cholesky while p·T ≤ dense_limit and conjugate gradient beyond.
StackedCov make_stacked_cov(const MsvModel& model, int T, int dense_limit = 4000);

/// w = V_α v via forward/backward Φ-recursions, O(T·p²).
Eigen::VectorXd valpha_matvec(const StackedCov& stack, const Eigen::VectorXd& v);

/// w = V_x v = V_α v + (I_T ⊗ Σ_ζ) v.
Eigen::VectorXd vx_matvec(const StackedCov& stack, const Eigen::VectorXd& v);

/// Fully assembled V_x, for the dense backend and for small-instance oracles.
Eigen::MatrixXd dense_vx(const StackedCov& stack);

/// Solves V_x s = rhs with the stack's backend. The CG path uses a Jacobi
/// preconditioner built from diag(Σ_α + Σ_ζ) and a 1e-10 relative-residual
/// stop; non-convergence throws SolverFailure.
Eigen::VectorXd vx_solve(const StackedCov& stack, const Eigen::VectorXd& rhs);

enum class CovKind { Smoothed, Forecast, Simulated };

/// A time-labelled sequence of p×p symmetric positive-definite matrices.
struct CovSequence {
  std::vector<int> horizon;  // 1-based times (smoothed) or T+1..T+L (forecast)
  std::vector<Eigen::MatrixXd> matrices;
  CovKind kind = CovKind::Smoothed;
};

/// Smoothed log-volatility paths. xsmooth is the raw linear-projection output
/// V_αV_x⁻¹(y^ℓ − c†), the path the scale construction consumes; alpha adds
/// the level c back on each row.
struct SmoothResult {
  Eigen::MatrixXd xsmooth;  // T×p
  Eigen::MatrixXd alpha;    // T×p, xsmooth + c'
};

SmoothResult mmsle_smooth(const MsvModel& model, const LogSqPanel& ylog,
                          int dense_limit = 4000);

struct SmoothedCovariances {
  Eigen::VectorXd dbar;  // d̄_i = sqrt(T⁻¹ Σ_t y²_it e^{−x̃_it})
  CovSequence covs;      // H̃_t = D̃_t Γ̂ D̃_t with d̃_it = d̄_i e^{x̃_it/2}
};

/// Scale factors and smoothed covariances from the raw returns and the
/// smoothed path; the standardized returns y_it/d̃_it then have unit sample
/// mean square by construction.
SmoothedCovariances build_smoothed_covariances(const MsvModel& model,
                                               const Eigen::MatrixXd& y,
                                               const Eigen::MatrixXd& xsmooth);

/// l-step-ahead covariance forecasts Ĥ_{T+l} for l = 1..horizon, reusing a
/// single V_x solve: x̂_{T+l} = Φ^l Σ_t Φ^{T−t}Σ_α s_t with s = V_x⁻¹(y^ℓ−c†).
CovSequence forecast(const MsvModel& model, const LogSqPanel& ylog, int horizon,
                     int dense_limit = 4000);

}  // namespace msv
