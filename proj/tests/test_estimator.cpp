#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "msv/errors.hpp"
#include "msv/estimator.hpp"
#include "msv/panel.hpp"
#include "msv/rng.hpp"
#include "msv/var.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_matrix(msv::rng::Philox& gen, int rows, int cols) {
  MatrixXd out(rows, cols);
  for (int t = 0; t < rows; ++t) {
    for (int i = 0; i < cols; ++i) out(t, i) = gen.normal();
  }
  return out;
}

msv::LogSqPanel panel_from_values(const MatrixXd& v) {
  msv::LogSqPanel panel;
  panel.ylog = v;
  panel.colmeans = v.colwise().mean();
  panel.xcentered = v.rowwise() - panel.colmeans;
  return panel;
}

// Four sign-balanced rows whose columns are exactly orthogonal with unit
// sample variance; scaling gives any isotropic sample covariance exactly.
MatrixXd orthogonal_design3(double scale) {
  MatrixXd x(4, 3);
  x << 1, 1, 1, 1, -1, -1, -1, 1, -1, -1, -1, 1;
  return scale * x;
}

}  // namespace

TEST_SUITE("estimator") {

TEST_CASE("step-2 coefficients match the normal equations") {
  msv::rng::Philox gen(601);
  const int T = 160;
  const int p = 3;
  const int m = 2;
  const auto panel = panel_from_values(random_matrix(gen, T, p));
  const auto fit = msv::fit_penalized_var(msv::lag_stack(panel, m), msv::PenaltySpec::lasso(0.0));
  const auto s2 = msv::fit_step2(panel, fit);

  const int t_eff = T - m - 1;
  MatrixXd w(t_eff, 1 + 2 * p);
  w.col(0).setOnes();
  w.middleCols(1, p) = panel.ylog.middleRows(m, t_eff);
  w.middleCols(1 + p, p) = fit.residuals.topRows(t_eff);
  const MatrixXd y = panel.ylog.middleRows(m + 1, t_eff);
  const MatrixXd b = (w.transpose() * w).fullPivLu().solve(w.transpose() * y);

  CHECK((s2.c_star - b.row(0).transpose()).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK((s2.phi - b.middleRows(1, p).transpose()).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK((s2.xi - b.middleRows(1 + p, p).transpose()).cwiseAbs().maxCoeff() <= 1e-9);

  // With an intercept in the design the regression residuals average to zero.
  const MatrixXd resid = y - w * b;
  CHECK(resid.colwise().mean().cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("an all-zero residual block makes the step-2 design singular") {
  msv::rng::Philox gen(602);
  const int T = 80;
  const auto panel = panel_from_values(random_matrix(gen, T, 2));
  msv::VarFit fit;
  fit.m = 1;
  fit.residuals = MatrixXd::Zero(T - 1, 2);
  CHECK_THROWS_AS(msv::fit_step2(panel, fit), msv::SingularDesignError);
}

TEST_CASE("too few usable rows are rejected") {
  msv::rng::Philox gen(603);
  const auto panel = panel_from_values(random_matrix(gen, 12, 2));
  msv::VarFit fit;
  fit.m = 2;
  fit.residuals = random_matrix(gen, 10, 2);
  CHECK_THROWS_AS(msv::fit_step2(panel, fit), msv::InsufficientSampleError);
}

TEST_CASE("misaligned residual panels are rejected") {
  msv::rng::Philox gen(604);
  const auto panel = panel_from_values(random_matrix(gen, 60, 2));
  msv::VarFit fit;
  fit.m = 1;
  fit.residuals = random_matrix(gen, 30, 2);
  CHECK_THROWS_AS(msv::fit_step2(panel, fit), msv::LengthMismatchError);
}

TEST_CASE("the regression recovers an ARMA(1,1) in level, slope, and loading") {
  // y_t = 0.3 + 0.5 y_{t-1} + u_t + 0.2 u_{t-1}; the lag-stack residuals stand
  // in for u, so all three coefficient groups should land near the truth.
  msv::rng::Philox root(605);
  const int reps = 50;
  int hits = 0;
  for (int r = 0; r < reps; ++r) {
    auto gen = root.substream(static_cast<std::uint64_t>(r));
    const int T = 5000;
    MatrixXd series(T, 1);
    double prev = 0.6;
    double u_prev = gen.normal();
    for (int t = -100; t < T; ++t) {
      const double u = gen.normal();
      const double value = 0.3 + 0.5 * prev + u + 0.2 * u_prev;
      if (t >= 0) series(t, 0) = value;
      prev = value;
      u_prev = u;
    }
    const auto panel = panel_from_values(series);
    const auto var =
        msv::fit_penalized_var(msv::lag_stack(panel, 20), msv::PenaltySpec::lasso(0.0));
    const auto s2 = msv::fit_step2(panel, var);
    if (std::abs(s2.c_star(0) - 0.3) <= 0.05 && std::abs(s2.phi(0, 0) - 0.5) <= 0.05 &&
        std::abs(s2.xi(0, 0) - 0.2) <= 0.05) {
      ++hits;
    }
  }
  CHECK(hits >= 45);
}

TEST_CASE("an isotropic log-variance panel splits exactly in half") {
  const auto panel = panel_from_values(orthogonal_design3(M_PI));
  const auto split = msv::split_variance(panel);
  CHECK(split.r == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_FALSE(split.clamped);
  const MatrixXd expected = (M_PI * M_PI / 2.0) * MatrixXd::Identity(3, 3);
  CHECK((split.sigma_zeta - expected).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("a trace at the calibration budget is infeasible unless clamped") {
  const auto panel = panel_from_values(orthogonal_design3(M_PI / std::sqrt(2.0)));
  CHECK_THROWS_WITH_AS(msv::split_variance(panel), doctest::Contains("tr(S_x)"),
                       msv::SplitInfeasibleError);
  const auto clamped = msv::split_variance(panel, true);
  CHECK(clamped.r == 0.99);
  CHECK(clamped.clamped);
}

TEST_CASE("the measurement part always carries the calibrated trace") {
  msv::rng::Philox gen(606);
  auto panel = panel_from_values(random_matrix(gen, 40, 2));
  const double trace = msv::sample_cov(panel.xcentered).trace();
  panel.xcentered *= std::sqrt(20.0 / trace);
  panel.ylog = panel.xcentered;
  panel.colmeans.setZero();

  const auto split = msv::split_variance(panel);
  CHECK(split.r == doctest::Approx((M_PI * M_PI / 2.0) / 10.0).epsilon(1e-12));
  CHECK(std::abs(split.sigma_zeta.trace() - M_PI * M_PI) <= 1e-10);

  const MatrixXd s_x = msv::sample_cov(panel.xcentered);
  CHECK((split.sigma_zeta + split.sigma_alpha - s_x).cwiseAbs().maxCoeff() == 0.0);

  // Both parts are scalar multiples of S_x, so they commute with it.
  const MatrixXd commutator = split.sigma_zeta * s_x - s_x * split.sigma_zeta;
  CHECK(commutator.cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("identical columns produce a ridged unit-correlation estimate") {
  msv::rng::Philox gen(607);
  MatrixXd y(50, 2);
  y.col(0) = random_matrix(gen, 50, 1);
  y.col(1) = y.col(0);
  const auto est = msv::estimate_gamma(y);
  CHECK(est.ridged);
  CHECK(est.gamma(0, 0) == 1.0);
  CHECK(est.gamma(1, 1) == 1.0);
  CHECK(est.gamma(0, 1) == doctest::Approx(1.0).epsilon(1e-6));
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(est.gamma);
  CHECK(eig.eigenvalues().minCoeff() >= 1e-8 * (1.0 - 1e-9));
}

TEST_CASE("independent series show near-zero correlation without repair") {
  msv::rng::Philox gen(608);
  const MatrixXd y = random_matrix(gen, 10000, 3);
  const auto est = msv::estimate_gamma(y);
  CHECK_FALSE(est.ridged);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i != j) CHECK(std::abs(est.gamma(i, j)) < 0.05);
    }
  }
}

TEST_CASE("a single series is its own correlation matrix") {
  msv::rng::Philox gen(609);
  const auto est = msv::estimate_gamma(random_matrix(gen, 30, 1));
  CHECK(est.gamma.rows() == 1);
  CHECK(est.gamma(0, 0) == 1.0);
  CHECK_FALSE(est.ridged);
}

TEST_CASE("a flat series cannot be correlated") {
  MatrixXd y = MatrixXd::Ones(20, 2);
  CHECK_THROWS_AS(msv::estimate_gamma(y), msv::ZeroVarianceColumnError);
}

TEST_CASE("zero residual loading zeroes the matched measurement covariance") {
  msv::rng::Philox gen(610);
  const auto panel = panel_from_values(random_matrix(gen, 100, 2));
  msv::Step2Fit s2;
  s2.c_star = VectorXd::Zero(2);
  s2.phi = 0.5 * MatrixXd::Identity(2, 2);
  s2.xi = MatrixXd::Zero(2, 2);
  msv::VarFit var;
  var.m = 1;
  var.residuals = random_matrix(gen, 99, 2);

  const auto report = msv::moment_match_report(panel, s2, var);
  CHECK(report.s_zeta.cwiseAbs().maxCoeff() == 0.0);
  const MatrixXd s_u = msv::sample_cov(var.residuals);
  CHECK((report.sigma_eta - s_u).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("the identity configuration matches by direct substitution") {
  msv::rng::Philox gen(611);
  // Sign-balanced residual rows give a residual covariance of exactly I.
  msv::VarFit var;
  var.m = 1;
  var.residuals.resize(4, 2);
  var.residuals << 1, 1, 1, -1, -1, 1, -1, -1;

  msv::Step2Fit s2;
  s2.c_star = VectorXd::Zero(2);
  s2.phi = MatrixXd::Identity(2, 2);
  s2.xi = -MatrixXd::Identity(2, 2);

  MatrixXd x(4, 2);
  x << 2, 2, 2, -2, -2, 2, -2, -2;  // S_x = 4I, so S_x - S_ζ = 3I stays PD
  const auto panel = panel_from_values(x);

  const auto report = msv::moment_match_report(panel, s2, var);
  CHECK((report.s_zeta - MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(report.sigma_eta.cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(report.is_szeta_pd);
  CHECK(report.is_sx_minus_szeta_pd);
}

TEST_CASE("a seeded fit yields a symmetric diagnostic with consistent flags") {
  msv::rng::Philox gen(612);
  const auto panel = panel_from_values(random_matrix(gen, 300, 2));
  const auto var =
      msv::fit_penalized_var(msv::lag_stack(panel, 1), msv::PenaltySpec::lasso(0.0));
  const auto s2 = msv::fit_step2(panel, var);
  const auto report = msv::moment_match_report(panel, s2, var);

  CHECK((report.s_zeta - report.s_zeta.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((report.sigma_eta - report.sigma_eta.transpose()).cwiseAbs().maxCoeff() <= 1e-12);

  Eigen::SelfAdjointEigenSolver<MatrixXd> zeta_eig(report.s_zeta);
  CHECK(report.is_szeta_pd == (zeta_eig.eigenvalues().minCoeff() > 0.0));
  const MatrixXd s_x = msv::sample_cov(panel.xcentered);
  Eigen::SelfAdjointEigenSolver<MatrixXd> diff_eig(s_x - report.s_zeta);
  CHECK(report.is_sx_minus_szeta_pd == (diff_eig.eigenvalues().minCoeff() > 0.0));
}

TEST_CASE("a singular autoregressive matrix is rejected") {
  msv::rng::Philox gen(613);
  const auto panel = panel_from_values(random_matrix(gen, 100, 2));
  msv::Step2Fit s2;
  s2.c_star = VectorXd::Zero(2);
  s2.phi = MatrixXd::Ones(2, 2);
  s2.xi = MatrixXd::Identity(2, 2);
  msv::VarFit var;
  var.m = 1;
  var.residuals = random_matrix(gen, 99, 2);
  CHECK_THROWS_AS(msv::moment_match_report(panel, s2, var), msv::PhiSingularError);
}

}  // TEST_SUITE
