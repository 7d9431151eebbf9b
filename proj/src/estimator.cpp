#include "msv/estimator.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <string>

#include "msv/errors.hpp"

namespace msv {

namespace {

// Variance of log(χ²₁): the measurement-noise trace budget per series under
// the Gaussian-return calibration.
const double kLogChiSqVar = M_PI * M_PI / 2.0;

double min_eigenvalue(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

}  // namespace

Step2Fit fit_step2(const LogSqPanel& ylog, const VarFit& varfit) {
  const Eigen::Index T = ylog.rows();
  const Eigen::Index p = ylog.cols();
  const int m = varfit.m;
  if (varfit.residuals.rows() != T - m || varfit.residuals.cols() != p) {
    throw LengthMismatchError(
        "residual panel is " + std::to_string(varfit.residuals.rows()) + "x" +
        std::to_string(varfit.residuals.cols()) + "; the panel implies " +
        std::to_string(T - m) + "x" + std::to_string(p));
  }

  const Eigen::Index t_eff = T - m - 1;
  const Eigen::Index k = 1 + 2 * p;
  if (t_eff < 2 * k) {
    throw InsufficientSampleError("step-2 regression has " + std::to_string(t_eff) +
                                  " usable rows; needs at least " + std::to_string(2 * k));
  }

  // Row aligned with time t holds [1, y^ℓ_{t-1}, û_{t-1}] for t = m+2..T;
  // residual row 0 is time m+1, so its first t_eff rows are exactly û_{t-1}.
  Eigen::MatrixXd w(t_eff, k);
  w.col(0).setOnes();
  w.middleCols(1, p) = ylog.ylog.middleRows(m, t_eff);
  w.middleCols(1 + p, p) = varfit.residuals.topRows(t_eff);
  const Eigen::MatrixXd y = ylog.ylog.middleRows(m + 1, t_eff);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(w);
  if (qr.rank() < k) {
    throw SingularDesignError("step-2 design matrix has rank " +
                              std::to_string(qr.rank()) + "; needs full column rank " +
                              std::to_string(k));
  }
  const Eigen::MatrixXd b = qr.solve(y);  // k x p, responses in columns

  Step2Fit fit;
  fit.c_star = b.row(0).transpose();
  fit.phi = b.middleRows(1, p).transpose();
  fit.xi = b.middleRows(1 + p, p).transpose();
  return fit;
}

VarianceSplit split_variance(const LogSqPanel& x, bool clamp) {
  const Eigen::Index p = x.cols();
  const Eigen::MatrixXd s_x = sample_cov(x.xcentered);
  const double trace = s_x.trace();
  const double budget = static_cast<double>(p) * kLogChiSqVar;

  VarianceSplit out;
  out.r = budget / trace;
  if (out.r >= 1.0) {
    if (!clamp) {
      throw SplitInfeasibleError("variance split needs tr(S_x) > p·π²/2 = " +
                                 std::to_string(budget) + "; got tr(S_x) = " +
                                 std::to_string(trace));
    }
    out.r = 0.99;
    out.clamped = true;
  }
  out.sigma_zeta = out.r * s_x;
  // The complement rather than (1−r)·S_x, so the two parts add back to S_x
  // bit-for-bit.
  out.sigma_alpha = s_x - out.sigma_zeta;
  return out;
}

GammaEstimate estimate_gamma(const Eigen::MatrixXd& y) {
  const double kFloor = 1e-8;
  const Eigen::MatrixXd corr = sample_corr(y);

  GammaEstimate out;
  out.gamma = corr;
  const double min_eig = min_eigenvalue(corr);
  if (min_eig >= kFloor) return out;

  out.ridged = true;
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(corr.rows(), corr.cols());
  // (Γ + δI)/(1+δ) keeps the unit diagonal and lifts every eigenvalue to
  // (λ+δ)/(1+δ); δ is the smallest value reaching the floor, doubled while
  // rounding leaves the recomputed minimum short (terminates: large δ → I).
  double delta = (kFloor - min_eig) / (1.0 - kFloor);
  for (;;) {
    const Eigen::MatrixXd candidate = (corr + delta * eye) / (1.0 + delta);
    if (min_eigenvalue(candidate) >= kFloor) {
      out.gamma = candidate;
      return out;
    }
    delta *= 2.0;
  }
}

MomentMatchReport moment_match_report(const LogSqPanel& x, const Step2Fit& step2,
                                      const VarFit& varfit) {
  const Eigen::Index p = x.cols();
  if (step2.phi.rows() != p || step2.phi.cols() != p || step2.xi.rows() != p ||
      step2.xi.cols() != p) {
    throw LengthMismatchError("step-2 coefficient matrices must be " + std::to_string(p) +
                              "x" + std::to_string(p));
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(step2.phi);
  const double s_max = svd.singularValues()(0);
  const double s_min = svd.singularValues()(p - 1);
  if (!(s_min > 0.0) || s_max / s_min >= 1e10) {
    throw PhiSingularError(
        "autoregressive matrix is numerically singular (condition number " +
        (s_min > 0.0 ? std::to_string(s_max / s_min) : std::string("inf")) + ")");
  }

  const Eigen::MatrixXd s_u = sample_cov(varfit.residuals);
  const Eigen::MatrixXd solved = step2.phi.partialPivLu().solve(step2.xi * s_u);

  MomentMatchReport report;
  report.s_zeta = -0.5 * (solved + solved.transpose());
  const Eigen::MatrixXd var_w = s_u + step2.xi * s_u * step2.xi.transpose();
  const Eigen::MatrixXd eta =
      var_w - report.s_zeta - step2.phi * report.s_zeta * step2.phi.transpose();
  report.sigma_eta = 0.5 * (eta + eta.transpose());

  const Eigen::MatrixXd s_x = sample_cov(x.xcentered);
  report.is_szeta_pd = min_eigenvalue(report.s_zeta) > 0.0;
  report.is_sx_minus_szeta_pd = min_eigenvalue(s_x - report.s_zeta) > 0.0;
  return report;
}

}  // namespace msv
