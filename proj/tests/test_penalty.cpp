#include <doctest.h>

#include <cmath>
#include <limits>

#include "msv/errors.hpp"
#include "msv/penalty.hpp"
#include "msv/rng.hpp"

using msv::PenaltyFamily;
using msv::PenaltySpec;

namespace {

double objective(const PenaltySpec& spec, double theta, double z, double w) {
  return 0.5 * w * (theta - z) * (theta - z) + msv::penalty_value(spec, theta);
}

// Dense-grid argmin oracle, independent of the closed-form rules.
double scan(const PenaltySpec& spec, double z, double w, double lo, double hi, double step) {
  double best_theta = lo;
  double best_obj = objective(spec, lo, z, w);
  for (double t = lo + step; t <= hi; t += step) {
    const double obj = objective(spec, t, z, w);
    if (obj < best_obj) {
      best_obj = obj;
      best_theta = t;
    }
  }
  return best_theta;
}

// Coarse scan then local refinement; every quadratic piece of the objective
// spans far more than the coarse step, so the global basin cannot be skipped.
double grid_minimizer(const PenaltySpec& spec, double z, double w, double lo, double hi,
                      double step) {
  const double coarse = scan(spec, z, w, lo, hi, 1e-3);
  return scan(spec, z, w, coarse - 2e-3, coarse + 2e-3, step);
}

}  // namespace

TEST_SUITE("penalty") {

TEST_CASE("spec validation enforces the admissible parameter ranges") {
  CHECK_THROWS_AS(PenaltySpec::lasso(-0.1), msv::ConfigError);
  CHECK_THROWS_AS(PenaltySpec::scad(1.0, 2.0), msv::ConfigError);
  CHECK_THROWS_AS(PenaltySpec::scad(1.0, 1.5), msv::ConfigError);
  CHECK_THROWS_AS(PenaltySpec::mcp(1.0, 0.0), msv::ConfigError);
  CHECK_THROWS_AS(PenaltySpec(PenaltyFamily::lasso, std::numeric_limits<double>::infinity()),
                  msv::ConfigError);
  CHECK_NOTHROW(PenaltySpec::scad(0.0));
  CHECK(msv::penalty_family_from_string("scad") == PenaltyFamily::scad);
  CHECK_THROWS_AS(msv::penalty_family_from_string("ridge"), msv::ConfigError);
}

TEST_CASE("penalty values match hand-computed branch points") {
  const auto scad = PenaltySpec::scad(1.0, 3.5);
  CHECK(msv::penalty_value(scad, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(msv::penalty_value(scad, 10.0) == doctest::Approx(2.25).epsilon(1e-15));

  const auto mcp = PenaltySpec::mcp(1.0, 3.0);
  CHECK(msv::penalty_value(mcp, 10.0) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(msv::penalty_value(mcp, 1.5) == doctest::Approx(1.125).epsilon(1e-15));

  const auto lasso = PenaltySpec::lasso(0.7);
  CHECK(msv::penalty_value(lasso, -2.0) == doctest::Approx(1.4).epsilon(1e-15));
}

TEST_CASE("penalty vanishes at zero and is nondecreasing in magnitude") {
  for (const auto& spec :
       {PenaltySpec::lasso(0.8), PenaltySpec::scad(0.8, 3.5), PenaltySpec::mcp(0.8, 3.0)}) {
    CHECK(msv::penalty_value(spec, 0.0) == 0.0);
    double prev = 0.0;
    for (double t = 0.01; t <= 6.0; t += 0.01) {
      const double cur = msv::penalty_value(spec, t);
      CHECK(cur >= prev - 1e-15);
      CHECK(cur == msv::penalty_value(spec, -t));
      prev = cur;
    }
  }
}

TEST_CASE("values are continuous across the branch points") {
  const double eps = 1e-9;
  const auto scad = PenaltySpec::scad(0.9, 3.5);
  for (double knot : {0.9, 3.5 * 0.9}) {
    const double below = msv::penalty_value(scad, knot - eps);
    const double above = msv::penalty_value(scad, knot + eps);
    CHECK(std::abs(above - below) <= 1e-8);
  }
  const auto mcp = PenaltySpec::mcp(0.9, 3.0);
  const double knot = 3.0 * 0.9;
  CHECK(std::abs(msv::penalty_value(mcp, knot + eps) - msv::penalty_value(mcp, knot - eps)) <=
        1e-8);
}

TEST_CASE("derivatives match the published piecewise forms") {
  const auto scad = PenaltySpec::scad(1.0, 3.5);
  CHECK(msv::penalty_derivative(scad, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(msv::penalty_derivative(scad, 2.0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(msv::penalty_derivative(scad, 5.0) == doctest::Approx(0.0).epsilon(1e-15));

  const auto mcp = PenaltySpec::mcp(1.0, 3.0);
  CHECK(msv::penalty_derivative(mcp, 3.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(msv::penalty_derivative(mcp, 1.5) == doctest::Approx(0.5).epsilon(1e-15));

  CHECK(msv::penalty_derivative(PenaltySpec::lasso(0.4), 9.0) ==
        doctest::Approx(0.4).epsilon(1e-15));

  CHECK_THROWS_AS(msv::penalty_derivative(scad, 0.0), msv::NonPositiveThetaError);
  CHECK_THROWS_AS(msv::penalty_derivative(scad, -1.0), msv::NonPositiveThetaError);

  for (const auto& spec :
       {PenaltySpec::lasso(0.6), PenaltySpec::scad(0.6), PenaltySpec::mcp(0.6)}) {
    CHECK(msv::penalty_derivative_at_zero(spec) == doctest::Approx(0.6).epsilon(1e-15));
  }
}

TEST_CASE("derivatives agree with central finite differences away from kinks") {
  const double h = 1e-6;
  for (const auto& spec :
       {PenaltySpec::lasso(0.8), PenaltySpec::scad(0.8, 3.5), PenaltySpec::mcp(0.8, 3.0)}) {
    for (double t : {0.3, 0.5, 1.2, 1.9, 2.4, 3.1, 4.0}) {
      // Skip points within 10h of a kink.
      const double kink1 = 0.8;
      const double kink2 = (spec.family() == PenaltyFamily::scad)  ? 3.5 * 0.8
                           : (spec.family() == PenaltyFamily::mcp) ? 3.0 * 0.8
                                                                   : -1.0;
      if (std::abs(t - kink1) < 10 * h || std::abs(t - kink2) < 10 * h) continue;
      const double fd =
          (msv::penalty_value(spec, t + h) - msv::penalty_value(spec, t - h)) / (2 * h);
      CHECK(std::abs(fd - msv::penalty_derivative(spec, t)) <= 1e-6);
    }
  }
}

TEST_CASE("soft threshold solves the lasso subproblem") {
  const auto lasso = PenaltySpec::lasso(0.5);
  CHECK(msv::univariate_minimizer(lasso, 2.0, 1.0) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(msv::univariate_minimizer(lasso, -2.0, 1.0) == doctest::Approx(-1.5).epsilon(1e-15));
  CHECK(msv::univariate_minimizer(lasso, 0.3, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(msv::univariate_minimizer(lasso, 2.0, 2.0) == doctest::Approx(1.75).epsilon(1e-15));
}

TEST_CASE("every family maps z of zero to zero") {
  for (const auto& spec :
       {PenaltySpec::lasso(0.5), PenaltySpec::scad(0.5), PenaltySpec::mcp(0.5)}) {
    CHECK(msv::univariate_minimizer(spec, 0.0, 1.0) == 0.0);
    CHECK(msv::univariate_minimizer(spec, 0.0, 0.25) == 0.0);
  }
}

TEST_CASE("large signals pass through SCAD and MCP without shrinkage") {
  const auto scad = PenaltySpec::scad(1.0, 3.5);
  CHECK(msv::univariate_minimizer(scad, 4.0, 1.0) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(msv::univariate_minimizer(scad, -7.5, 1.0) == doctest::Approx(-7.5).epsilon(1e-15));
  const auto mcp = PenaltySpec::mcp(1.0, 3.0);
  CHECK(msv::univariate_minimizer(mcp, 4.0, 1.0) == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("closed-form minimizer matches a dense grid oracle") {
  // Acceptance criterion: |closed form - grid argmin| <= 1e-4 at grid step 1e-5.
  msv::rng::Philox gen(314159);
  const int n_draws = 1000;
  for (int i = 0; i < n_draws; ++i) {
    const double z = gen.uniform(-6.0, 6.0);
    const double w = gen.uniform(0.2, 3.0);
    const double lambda = gen.uniform(0.05, 1.5);
    PenaltySpec spec = PenaltySpec::lasso(lambda);
    const int fam = static_cast<int>(gen.below(3));
    if (fam == 1) spec = PenaltySpec::scad(lambda, gen.uniform(2.1, 5.0));
    if (fam == 2) spec = PenaltySpec::mcp(lambda, gen.uniform(0.5, 5.0));

    const double closed = msv::univariate_minimizer(spec, z, w);
    const double grid = grid_minimizer(spec, z, w, -8.0, 8.0, 1e-5);
    CHECK(std::abs(closed - grid) <= 1e-4);
    // And the closed form is never beaten by any grid point.
    CHECK(objective(spec, closed, z, w) <= objective(spec, grid, z, w) + 1e-12);
  }
}

TEST_CASE("SCAD minimizer at the intermediate-signal point matches a full dense grid") {
  const auto scad = PenaltySpec::scad(1.0, 3.5);
  const double closed = msv::univariate_minimizer(scad, 2.0, 1.0);
  const double grid = scan(scad, 2.0, 1.0, -10.0, 10.0, 1e-5);
  CHECK(std::abs(closed - grid) <= 1e-4);
}

}  // TEST_SUITE
