#include <Eigen/LU>
#include <string>

#include "msv/errors.hpp"
#include "msv/estimator.hpp"
#include "msv/smoother.hpp"

namespace msv {

MsvFitResult fit_msv_detailed(const Eigen::MatrixXd& y, int m, const MsvFitOptions& opts) {
  validate_return_panel(y);
  MsvFitResult out;
  out.panel = log_square_transform(y, opts.zero_policy);
  const RegressorMatrix reg = lag_stack(out.panel, m);

  double lambda = 0.0;
  CvResult cv;
  bool from_cv = false;
  if (opts.fixed_lambda) {
    lambda = *opts.fixed_lambda;
    if (!(lambda >= 0.0)) {
      throw ConfigError("fixed lambda must be nonnegative, got " + std::to_string(lambda));
    }
  } else {
    cv = hv_cross_validate(reg, opts.penalty, opts.cv_plan, opts.jobs);
    lambda = cv.lambda_star;
    from_cv = true;
  }

  out.step1 = fit_penalized_var(reg, opts.penalty.with_lambda(lambda), opts.solver);
  Step2Fit step2 = fit_step2(out.panel, out.step1);

  MsvModel& model = out.model;
  model.p = static_cast<int>(y.cols());
  model.m = m;

  double rho = spectral_radius(step2.phi);
  if (rho >= 1.0) {
    if (opts.stability == StabilityPolicy::Error) {
      throw UnstablePhiError("estimated autoregressive matrix has spectral radius " +
                             std::to_string(rho));
    }
    step2.phi *= 0.995 / rho;
    rho = spectral_radius(step2.phi);
    model.meta.phi_rescaled = true;
  }
  model.phi = step2.phi;
  model.xi = step2.xi;
  model.c_star = step2.c_star;
  model.spectral_radius_phi = rho;

  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(model.p, model.p);
  model.c = (eye - model.phi).partialPivLu().solve(model.c_star);

  const VarianceSplit split = split_variance(out.panel, opts.clamp_split);
  model.sigma_zeta = split.sigma_zeta;
  model.sigma_alpha = split.sigma_alpha;
  model.r_split = split.r;

  const GammaEstimate gamma = estimate_gamma(y);
  model.gamma = gamma.gamma;
  model.meta.gamma_ridged = gamma.ridged;

  const SmoothResult smooth = mmsle_smooth(model, out.panel, opts.dense_limit);
  model.dbar = build_smoothed_covariances(model, y, smooth.xsmooth).dbar;

  model.meta.penalty_family = opts.penalty.family();
  model.meta.penalty_a = opts.penalty.a();
  model.meta.penalty_b = opts.penalty.b();
  model.meta.lambda = lambda;
  model.meta.lambda_from_cv = from_cv;
  model.meta.cv = cv;
  model.meta.seed = opts.seed;
  model.meta.step1_converged = out.step1.converged;
  return out;
}

MsvModel fit_msv(const Eigen::MatrixXd& y, int m, const MsvFitOptions& opts) {
  return fit_msv_detailed(y, m, opts).model;
}

}  // namespace msv
