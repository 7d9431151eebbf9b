#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "msv/var.hpp"

namespace msv {

/// What to do when the Step-2 autoregressive matrix has spectral radius ≥ 1:
/// Rescale shrinks it to radius 0.995 and flags the model, Error throws.
enum class StabilityPolicy { Rescale, Error };

/// Provenance of a fitted model, carried for reproducibility: penalty
/// configuration, the λ actually used and where it came from, the root seed
/// of the run, and repair flags set by the fit.
struct ModelMeta {
  PenaltyFamily penalty_family = PenaltyFamily::lasso;
  double penalty_a = 3.5;
  double penalty_b = 3.0;
  double lambda = 0.0;
  bool lambda_from_cv = false;
  CvResult cv;  // empty grid when λ was fixed
  std::uint64_t seed = 0;
  bool phi_rescaled = false;
  bool gamma_ridged = false;
  bool step1_converged = true;
};

/// Fitted multivariate stochastic-volatility model. The latent log-volatility
/// follows α_t = c + Φ(α_{t-1} − c) + η_t on top of measurement noise ζ with
/// Var(ζ) = sigma_zeta, unconditional Var(α) = sigma_alpha, and a constant
/// return-correlation matrix gamma. dbar holds the per-series scale factors
/// that map the smoothed log-volatility path to return units.
struct MsvModel {
  Eigen::VectorXd c_star;       // Step-2 intercept ĉ*
  Eigen::VectorXd c;            // ĉ = (I − Φ̂)⁻¹ ĉ*
  Eigen::MatrixXd phi;          // p×p autoregressive matrix Φ̂
  Eigen::MatrixXd xi;           // p×p lagged-residual loading Ξ̂
  Eigen::MatrixXd sigma_zeta;   // r·S_x
  Eigen::MatrixXd sigma_alpha;  // (1−r)·S_x
  Eigen::MatrixXd gamma;        // return correlation, unit diagonal, PD-floored
  Eigen::VectorXd dbar;         // scale factors d̄_i
  double r_split = 0.0;
  double spectral_radius_phi = 0.0;
  int p = 0;
  int m = 0;
  ModelMeta meta;
};

/// Largest absolute eigenvalue.
double spectral_radius(const Eigen::MatrixXd& a);

}  // namespace msv
