#pragma once

#include <Eigen/Dense>
#include <vector>

#include "msv/smoother.hpp"

namespace msv {

/// Gaussian-QML GARCH(1,1) margin: h_t = ω + αy²_{t−1} + βh_{t−1} with
/// h₁ = the sample mean square of the series.
struct GarchFit {
  double omega = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double loglik = 0.0;
  Eigen::VectorXd h_path;  // T conditional variances
  double last_obs = 0.0;   // y_T, the state the forecast recursion starts from
  bool boundary = false;   // a coefficient pinned at zero or α+β at the cap
  bool converged = false;
};

struct GarchPath {
  Eigen::VectorXd h;
  double loglik = 0.0;
};

/// Conditional-variance path and Gaussian quasi-log-likelihood of a GARCH(1,1)
/// at fixed parameters, with the same initialization as fit_garch11.
GarchPath garch11_path(const Eigen::VectorXd& series, double omega, double alpha,
                       double beta);

GarchFit fit_garch11(const Eigen::VectorXd& series);

/// Constant conditional correlation: GARCH(1,1) margins plus the sample
/// correlation of the standardized residuals. Estimated in two steps; the
/// joint one-step QML variant is out of scope.
struct CccFit {
  std::vector<GarchFit> margins;
  Eigen::MatrixXd rbar;
  bool rbar_ridged = false;
};

CccFit fit_ccc(const Eigen::MatrixXd& panel, int jobs = 1);

/// Scalar dynamic conditional correlation with correlation targeting:
/// Q_t = (1−a−b)Q̄ + a·u_{t−1}u'_{t−1} + b·Q_{t−1}, R_t = Q*_t^{−1/2}Q_tQ*_t^{−1/2}.
struct DccFit {
  double a = 0.0;
  double b = 0.0;
  Eigen::MatrixXd qbar;
  std::vector<GarchFit> margins;
  Eigen::VectorXd u_scale;  // per-margin root mean squares of y/√h
  Eigen::MatrixXd q_last;   // Q_T, the forecast recursion's state
  Eigen::VectorXd u_last;   // u_T
  double loglik_corr = 0.0;
  bool boundary = false;
  bool qbar_ridged = false;
};

DccFit fit_dcc_scalar(const Eigen::MatrixXd& panel, int jobs = 1);

/// Orthogonal GARCH: H_t = PΛ_tP' with P the principal-component loadings of
/// the sample covariance and a GARCH(1,1) variance per each of the k leading
/// components; truncated components keep their constant sample variance so
/// the reconstruction stays full-rank.
struct OgarchFit {
  Eigen::MatrixXd loadings;  // p×p, orthonormal columns, descending variance
  Eigen::VectorXd mean;      // column means removed before the rotation
  std::vector<GarchFit> margins;        // k leading components
  Eigen::VectorXd residual_variances;   // sample variances of the p−k rest
};

/// k = 0 keeps every component (k = p).
OgarchFit fit_ogarch(const Eigen::MatrixXd& panel, int k = 0, int jobs = 1);

/// In-sample fitted covariance paths Ĥ_t, labels 1..T. The DCC path needs the
/// return panel to rebuild the standardized residuals; the others carry
/// everything in the fit.
CovSequence covariance_path(const CccFit& fit);
CovSequence covariance_path(const DccFit& fit, const Eigen::MatrixXd& panel);
CovSequence covariance_path(const OgarchFit& fit);

/// Ĥ_{T+l} for l = 1..horizon: one-step-exact recursions, multi-step with
/// squared innovations replaced by their conditional expectations
/// (ε² → h, uu' → Q for the correlation recursion).
CovSequence forecast_baseline(const CccFit& fit, int horizon);
CovSequence forecast_baseline(const DccFit& fit, int horizon);
CovSequence forecast_baseline(const OgarchFit& fit, int horizon);

}  // namespace msv
