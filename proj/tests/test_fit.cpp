#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "msv/errors.hpp"
#include "msv/estimator.hpp"
#include "msv/model.hpp"
#include "msv/panel.hpp"
#include "msv/rng.hpp"
#include "msv/smoother.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Log-volatility AR(1) with correlated Gaussian innovations on the return
// side: h_{t+1} = μ + Φ(h_t − μ) + ση z, y_t = exp(h_t/2) ∘ ε_t, ε ~ N(0, Γ).
// Strong persistence and vol-of-vol keep the latent signal visible above the
// log-χ² noise floor, the regime the estimation chain is built for.
MatrixXd simulate_returns(std::uint64_t seed, int T) {
  const int p = 2;
  VectorXd mu(p);
  mu << -0.5, 0.2;
  MatrixXd phi(p, p);
  phi << 0.9, 0.05, 0.0, 0.85;
  MatrixXd gamma(p, p);
  gamma << 1.0, 0.3, 0.3, 1.0;
  const MatrixXd chol = Eigen::LLT<MatrixXd>(gamma).matrixL();

  msv::rng::Philox gen(seed);
  auto normal_vec = [&gen, p] {
    VectorXd z(p);
    for (int i = 0; i < p; ++i) z(i) = gen.normal();
    return z;
  };

  MatrixXd y(T, p);
  VectorXd h = mu;
  for (int t = -200; t < T; ++t) {
    h = mu + phi * (h - mu) + 0.6 * normal_vec();
    if (t >= 0) {
      const VectorXd eps = chol * normal_vec();
      y.row(t) = (h.array() / 2.0).exp() * eps.array();
    }
  }
  return y;
}

}  // namespace

TEST_SUITE("fit") {

TEST_CASE("a fitted model satisfies its construction invariants") {
  const MatrixXd y = simulate_returns(802, 400);
  const int m = 3;
  const auto res = msv::fit_msv_detailed(y, m);
  const auto& model = res.model;

  CHECK(model.p == 2);
  CHECK(model.m == m);

  // The measurement part carries the log-χ² variance budget on its trace and
  // the two parts recompose the sample covariance without rounding.
  CHECK(std::abs(model.sigma_zeta.trace() - 2.0 * M_PI * M_PI / 2.0) <= 1e-10);
  const MatrixXd s_x = msv::sample_cov(res.panel.xcentered);
  CHECK((model.sigma_zeta + model.sigma_alpha - s_x).cwiseAbs().maxCoeff() == 0.0);

  CHECK(model.gamma(0, 0) == 1.0);
  CHECK(model.gamma(1, 1) == 1.0);
  CHECK((model.gamma - model.gamma.transpose()).cwiseAbs().maxCoeff() == 0.0);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(model.gamma);
  CHECK(eig.eigenvalues().minCoeff() > 0.0);

  CHECK(model.spectral_radius_phi < 1.0);
  CHECK(model.spectral_radius_phi ==
        doctest::Approx(msv::spectral_radius(model.phi)).epsilon(1e-12));

  // The level solves (I − Φ)c = c*.
  const MatrixXd eye = MatrixXd::Identity(2, 2);
  CHECK((((eye - model.phi) * model.c) - model.c_star).cwiseAbs().maxCoeff() <= 1e-10);

  CHECK(model.dbar.minCoeff() > 0.0);
  CHECK(model.r_split > 0.0);
  CHECK(model.r_split < 1.0);

  CHECK(model.meta.lambda_from_cv);
  CHECK(model.meta.lambda == model.meta.cv.lambda_star);
  CHECK(model.meta.cv.lambda_grid.size() == 50);
  CHECK(model.meta.penalty_family == msv::PenaltyFamily::scad);
  CHECK(model.meta.step1_converged);
  CHECK(model.meta.lambda == res.step1.lambda_used);

  // Rebuilding the smoothed path reproduces the stored scales, and the
  // standardized returns have unit sample mean square.
  const auto sm = msv::mmsle_smooth(model, res.panel);
  const auto covs = msv::build_smoothed_covariances(model, y, sm.xsmooth);
  CHECK((covs.dbar - model.dbar).cwiseAbs().maxCoeff() == 0.0);
  const int T = static_cast<int>(y.rows());
  for (int i = 0; i < 2; ++i) {
    double acc = 0.0;
    for (int t = 0; t < T; ++t) {
      const double z = y(t, i) / (model.dbar(i) * std::exp(sm.xsmooth(t, i) / 2.0));
      acc += z * z;
    }
    CHECK(std::abs(acc / T - 1.0) <= 1e-10);
  }
}

TEST_CASE("a fixed penalty level bypasses cross-validation") {
  const MatrixXd y = simulate_returns(820, 250);
  msv::MsvFitOptions opts;
  opts.fixed_lambda = 0.0;
  const auto res = msv::fit_msv_detailed(y, 2, opts);

  CHECK(res.model.meta.lambda == 0.0);
  CHECK_FALSE(res.model.meta.lambda_from_cv);
  CHECK(res.model.meta.cv.lambda_grid.empty());
  CHECK(res.step1.lambda_used == 0.0);
}

TEST_CASE("repeated fits of the same panel are identical") {
  const MatrixXd y = simulate_returns(840, 200);
  msv::MsvFitOptions opts;
  opts.fixed_lambda = 0.1;
  const auto first = msv::fit_msv(y, 2, opts);
  const auto second = msv::fit_msv(y, 2, opts);
  CHECK((first.phi - second.phi).cwiseAbs().maxCoeff() == 0.0);
  CHECK((first.gamma - second.gamma).cwiseAbs().maxCoeff() == 0.0);
  CHECK((first.dbar - second.dbar).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("a negative penalty level is rejected") {
  const MatrixXd y = simulate_returns(804, 100);
  msv::MsvFitOptions opts;
  opts.fixed_lambda = -0.5;
  CHECK_THROWS_AS(msv::fit_msv(y, 1, opts), msv::ConfigError);
}

TEST_CASE("too short a panel is rejected") {
  const MatrixXd y = simulate_returns(805, 12);
  msv::MsvFitOptions opts;
  opts.fixed_lambda = 0.0;
  CHECK_THROWS_AS(msv::fit_msv(y, 2, opts), msv::InsufficientSampleError);
}

TEST_CASE("an unstable estimate is stabilized or rejected by policy") {
  // Seed chosen so the estimated transition matrix lands just above the unit
  // circle: the sampling-noise violation the stability policy exists for.
  const MatrixXd y = simulate_returns(843, 200);
  msv::MsvFitOptions opts;
  opts.fixed_lambda = 0.1;

  SUBCASE("the default policy rescales the transition matrix") {
    const auto res = msv::fit_msv_detailed(y, 2, opts);
    CHECK(res.model.meta.phi_rescaled);
    CHECK(res.model.spectral_radius_phi == doctest::Approx(0.995).epsilon(1e-6));
    const auto fc = msv::forecast(res.model, res.panel, 2);
    CHECK(fc.matrices.size() == 2);
  }
  SUBCASE("the strict policy throws instead") {
    opts.stability = msv::StabilityPolicy::Error;
    CHECK_THROWS_AS(msv::fit_msv(y, 2, opts), msv::UnstablePhiError);
  }
}

}  // TEST_SUITE
