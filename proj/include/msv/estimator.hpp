#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>

#include "msv/model.hpp"
#include "msv/panel.hpp"
#include "msv/penalty.hpp"
#include "msv/var.hpp"

namespace msv {

/// Intercepted AR(1)-plus-lagged-residual regression coefficients:
/// y^ℓ_t ≈ c* + Φ y^ℓ_{t-1} + Ξ û_{t-1}.
struct Step2Fit {
  Eigen::VectorXd c_star;  // p
  Eigen::MatrixXd phi;     // p×p
  Eigen::MatrixXd xi;      // p×p
};

/// Multi-response OLS of y^ℓ_t on [1, y^ℓ_{t-1}, û_{t-1}] over t = m+2..T.
/// Requires T−m−1 ≥ 2(1+2p) rows and a full-rank design.
Step2Fit fit_step2(const LogSqPanel& ylog, const VarFit& varfit);

struct VarianceSplit {
  Eigen::MatrixXd sigma_zeta;   // r·S_x
  Eigen::MatrixXd sigma_alpha;  // (1−r)·S_x
  double r = 0.0;
  bool clamped = false;
};

/// Trace-calibrated split of S_x: r = (π²/2)/(p⁻¹·tr(S_x)), so that
/// tr(sigma_zeta) = p·π²/2, the Gaussian log-χ²₁ variance. r ≥ 1 means the
/// panel's log-variance is too small for that calibration; by default that
/// throws SplitInfeasible, with clamp=true it pins r = 0.99 and flags it.
VarianceSplit split_variance(const LogSqPanel& x, bool clamp = false);

struct GammaEstimate {
  Eigen::MatrixXd gamma;
  bool ridged = false;
};

/// Sample correlation of the raw returns, eigenvalue-floored at 1e-8 via the
/// smallest diagonal ridge that preserves the unit diagonal: (Γ + δI)/(1+δ).
GammaEstimate estimate_gamma(const Eigen::MatrixXd& y);

/// Moment-matching diagnostic: S_ζ = −½[Φ̂⁻¹Ξ̂S_û + S_ûΞ̂'Φ̂'⁻¹] and the
/// implied measurement split of Var(w_t) = S_û + Ξ̂S_ûΞ̂', namely
/// Σ̂_η = Var(w_t) − S_ζ − Φ̂S_ζΦ̂'. Nothing guarantees either matrix is
/// positive definite, so both are reported with eigenvalue flags and never
/// fed back into the fit.
struct MomentMatchReport {
  Eigen::MatrixXd s_zeta;
  Eigen::MatrixXd sigma_eta;
  bool is_szeta_pd = false;
  bool is_sx_minus_szeta_pd = false;
};

MomentMatchReport moment_match_report(const LogSqPanel& x, const Step2Fit& step2,
                                      const VarFit& varfit);

struct MsvFitOptions {
  PenaltySpec penalty = PenaltySpec::scad(0.0);  // λ ignored unless fixed_lambda set
  std::optional<double> fixed_lambda;            // skips cross-validation when set
  CvPlan cv_plan;
  SolverOpts solver;
  StabilityPolicy stability = StabilityPolicy::Rescale;
  ZeroPolicy zero_policy = ZeroPolicy::HalfMinNonzero;
  bool clamp_split = false;
  int jobs = 1;
  int dense_limit = 4000;  // largest pT solved by dense Cholesky when smoothing
  std::uint64_t seed = 0;  // recorded in the model meta, not consumed here
};

/// Full four-step fit: log-square transform, penalized VAR(m) with λ fixed or
/// cross-validated, the Step-2 regression, the trace-calibrated variance
/// split, the return correlation, and the smoothed scale factors d̄.
MsvModel fit_msv(const Eigen::MatrixXd& y, int m, const MsvFitOptions& opts = {});

/// The Step-1 fit alongside the model, for callers that need the residual
/// panel or the solver diagnostics.
struct MsvFitResult {
  MsvModel model;
  VarFit step1;
  LogSqPanel panel;
};

MsvFitResult fit_msv_detailed(const Eigen::MatrixXd& y, int m,
                              const MsvFitOptions& opts = {});

}  // namespace msv
