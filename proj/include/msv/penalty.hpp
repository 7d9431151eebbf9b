#pragma once

#include <string>

namespace msv {

enum class PenaltyFamily { lasso, scad, mcp };

const char* to_string(PenaltyFamily family) noexcept;
PenaltyFamily penalty_family_from_string(const std::string& name);

/// A penalty function p(λ, |θ|) with its shape parameters. λ is stored as the
/// per-sample value: the solver objective is (1/2n)Σ‖residual‖² + Σ p(λ,|θ|),
/// so λ is never multiplied by the sample size anywhere downstream.
class PenaltySpec {
 public:
  PenaltySpec(PenaltyFamily family, double lambda, double a = 3.5, double b = 3.0);

  static PenaltySpec lasso(double lambda) { return {PenaltyFamily::lasso, lambda}; }
  static PenaltySpec scad(double lambda, double a = 3.5) {
    return {PenaltyFamily::scad, lambda, a, 3.0};
  }
  static PenaltySpec mcp(double lambda, double b = 3.0) {
    return {PenaltyFamily::mcp, lambda, 3.5, b};
  }

  PenaltyFamily family() const noexcept { return family_; }
  double lambda() const noexcept { return lambda_; }
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }

  PenaltySpec with_lambda(double lambda) const { return {family_, lambda, a_, b_}; }
  PenaltySpec as_lasso() const { return {PenaltyFamily::lasso, lambda_, a_, b_}; }

 private:
  PenaltyFamily family_;
  double lambda_;
  double a_;  // SCAD knee ratio, must exceed 2
  double b_;  // MCP taper, must be positive
};

/// p(λ, |θ|). Total on finite inputs; continuous in θ.
double penalty_value(const PenaltySpec& spec, double theta);

/// dp/dθ at θ > 0 (throws NonPositiveTheta otherwise).
double penalty_derivative(const PenaltySpec& spec, double theta);

/// One-sided derivative p'(λ, 0+), which equals λ for all three families.
double penalty_derivative_at_zero(const PenaltySpec& spec);

/// Global minimizer of f(θ) = w/2·(θ − z)² + p(λ, |θ|) for w > 0, in closed
/// form (soft/firm thresholding plus branch-endpoint comparison). When the
/// nonconvex subproblem has several stationary points the lower objective
/// wins; exact ties resolve to the smaller |θ|.
double univariate_minimizer(const PenaltySpec& spec, double z, double w);

}  // namespace msv
