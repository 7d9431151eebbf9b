#include "msv/penalty.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "msv/errors.hpp"

namespace msv {

const char* to_string(PenaltyFamily family) noexcept {
  switch (family) {
    case PenaltyFamily::lasso: return "lasso";
    case PenaltyFamily::scad: return "scad";
    case PenaltyFamily::mcp: return "mcp";
  }
  return "?";
}

PenaltyFamily penalty_family_from_string(const std::string& name) {
  if (name == "lasso") return PenaltyFamily::lasso;
  if (name == "scad") return PenaltyFamily::scad;
  if (name == "mcp") return PenaltyFamily::mcp;
  throw ConfigError("unknown penalty family '" + name + "' (expected lasso, scad, or mcp)");
}

PenaltySpec::PenaltySpec(PenaltyFamily family, double lambda, double a, double b)
    : family_(family), lambda_(lambda), a_(a), b_(b) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("penalty lambda must be finite and >= 0");
  }
  if (family == PenaltyFamily::scad && !(a > 2.0)) {
    throw ConfigError("SCAD requires a > 2, got a=" + std::to_string(a));
  }
  if (family == PenaltyFamily::mcp && !(b > 0.0)) {
    throw ConfigError("MCP requires b > 0, got b=" + std::to_string(b));
  }
}

double penalty_value(const PenaltySpec& spec, double theta) {
  const double t = std::abs(theta);
  const double lambda = spec.lambda();
  switch (spec.family()) {
    case PenaltyFamily::lasso:
      return lambda * t;
    case PenaltyFamily::scad: {
      const double a = spec.a();
      if (t <= lambda) return lambda * t;
      if (t <= a * lambda) {
        return -(t * t - 2.0 * a * lambda * t + lambda * lambda) / (2.0 * (a - 1.0));
      }
      return (a + 1.0) * lambda * lambda / 2.0;
    }
    case PenaltyFamily::mcp: {
      const double b = spec.b();
      if (t < b * lambda) return lambda * t - t * t / (2.0 * b);
      return b * lambda * lambda / 2.0;
    }
  }
  return 0.0;
}

double penalty_derivative(const PenaltySpec& spec, double theta) {
  if (!(theta > 0.0)) {
    throw NonPositiveThetaError("penalty_derivative requires theta > 0, got " +
                                std::to_string(theta));
  }
  const double lambda = spec.lambda();
  switch (spec.family()) {
    case PenaltyFamily::lasso:
      return lambda;
    case PenaltyFamily::scad: {
      const double a = spec.a();
      if (theta <= lambda) return lambda;
      if (theta <= a * lambda) return (a * lambda - theta) / (a - 1.0);
      return 0.0;
    }
    case PenaltyFamily::mcp:
      return std::max(spec.b() * lambda - theta, 0.0) / spec.b();
  }
  return 0.0;
}

double penalty_derivative_at_zero(const PenaltySpec& spec) { return spec.lambda(); }

namespace {

/// f(t) = w/2·(t - z)² + p(λ, t) for t >= 0 (z >= 0 by symmetry reduction).
inline double half_objective(const PenaltySpec& spec, double w, double z, double t) {
  const double d = t - z;
  return 0.5 * w * d * d + penalty_value(spec, t);
}

}  // namespace

double univariate_minimizer(const PenaltySpec& spec, double z, double w) {
  if (!(w > 0.0)) throw ConfigError("univariate_minimizer requires curvature w > 0");
  if (z == 0.0) return 0.0;
  const double sign = z > 0.0 ? 1.0 : -1.0;
  const double az = std::abs(z);
  const double lambda = spec.lambda();

  if (spec.family() == PenaltyFamily::lasso) {
    return sign * std::max(az - lambda / w, 0.0);
  }

  // Candidates: 0, per-branch stationary points, branch endpoints, and the
  // unpenalized solution. The objective is piecewise quadratic between these
  // points, so the global minimizer is always one of them; evaluating the true
  // objective at each handles concave branches (w below the taper curvature)
  // without case analysis.
  std::array<double, 6> candidates{};
  std::size_t count = 0;
  candidates[count++] = 0.0;
  candidates[count++] = az;
  if (spec.family() == PenaltyFamily::scad) {
    const double a = spec.a();
    candidates[count++] = std::clamp(az - lambda / w, 0.0, lambda);
    const double denom = w * (a - 1.0) - 1.0;
    if (denom > 0.0) {
      const double interior = (w * (a - 1.0) * az - a * lambda) / denom;
      candidates[count++] = std::clamp(interior, lambda, a * lambda);
    }
    candidates[count++] = lambda;
    candidates[count++] = a * lambda;
  } else {  // MCP
    const double b = spec.b();
    const double denom = w * b - 1.0;
    if (denom > 0.0) {
      const double interior = b * (w * az - lambda) / denom;
      candidates[count++] = std::clamp(interior, 0.0, b * lambda);
    }
    candidates[count++] = b * lambda;
  }

  std::sort(candidates.begin(), candidates.begin() + count);
  double best_t = candidates[0];
  double best_f = half_objective(spec, w, az, best_t);
  for (std::size_t k = 1; k < count; ++k) {
    const double f = half_objective(spec, w, az, candidates[k]);
    if (f < best_f) {  // ties keep the earlier (smaller) magnitude
      best_f = f;
      best_t = candidates[k];
    }
  }
  return sign * best_t;
}

}  // namespace msv
