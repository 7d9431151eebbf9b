#include "msv/smoother.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <string>

#include "msv/errors.hpp"

namespace msv {

namespace {

void check_stack(const StackedCov& stack) {
  const Eigen::Index p = stack.phi.rows();
  if (stack.T <= 0) throw ConfigError("stacked covariance needs T >= 1");
  if (stack.phi.cols() != p || stack.sigma_alpha.rows() != p ||
      stack.sigma_alpha.cols() != p || stack.sigma_zeta.rows() != p ||
      stack.sigma_zeta.cols() != p) {
    throw LengthMismatchError("stacked covariance blocks must all be p x p");
  }
}

void require_stable(const MsvModel& model) {
  const double rho = spectral_radius(model.phi);
  if (!(rho < 1.0)) {
    throw UnstableModelError("smoothing needs a stable model; spectral radius is " +
                             std::to_string(rho));
  }
}

Eigen::VectorXd stack_centered(const LogSqPanel& ylog, const Eigen::VectorXd& c) {
  const Eigen::Index T = ylog.rows();
  const Eigen::Index p = ylog.cols();
  if (c.size() != p) {
    throw LengthMismatchError("model level c has length " + std::to_string(c.size()) +
                              "; panel has " + std::to_string(p) + " series");
  }
  Eigen::VectorXd out(T * p);
  for (Eigen::Index t = 0; t < T; ++t) {
    out.segment(t * p, p) = ylog.ylog.row(t).transpose() - c;
  }
  return out;
}

Eigen::VectorXd cg_solve(const StackedCov& stack, const Eigen::VectorXd& rhs) {
  const Eigen::Index n = rhs.size();
  const Eigen::Index p = stack.phi.rows();

  Eigen::VectorXd inv_diag(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const double d = stack.sigma_alpha(i, i) + stack.sigma_zeta(i, i);
    inv_diag(i) = d > 0.0 ? 1.0 / d : 1.0;
  }
  const auto precondition = [&](const Eigen::VectorXd& r) {
    Eigen::VectorXd z(n);
    for (Eigen::Index t = 0; t < stack.T; ++t) {
      z.segment(t * p, p) = inv_diag.cwiseProduct(r.segment(t * p, p));
    }
    return z;
  };

  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) return Eigen::VectorXd::Zero(n);
  const double tol = 1e-10;
  const long max_iters = std::max<long>(1000, 10 * static_cast<long>(n));

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r = rhs;
  Eigen::VectorXd z = precondition(r);
  Eigen::VectorXd d = z;
  double rz = r.dot(z);
  for (long it = 0; it < max_iters; ++it) {
    const Eigen::VectorXd ad = vx_matvec(stack, d);
    const double dad = d.dot(ad);
    if (!(dad > 0.0)) {
      throw SolverFailureError(
          "conjugate gradient hit a non-positive curvature direction; the "
          "stacked covariance is not positive definite");
    }
    const double step = rz / dad;
    x += step * d;
    r -= step * ad;
    if (r.norm() <= tol * rhs_norm) return x;
    const Eigen::VectorXd z_next = precondition(r);
    const double rz_next = r.dot(z_next);
    d = z_next + (rz_next / rz) * d;
    rz = rz_next;
  }
  throw SolverFailureError("conjugate gradient did not reach relative residual 1e-10 in " +
                           std::to_string(max_iters) + " iterations");
}

}  // namespace

StackedCov make_stacked_cov(const MsvModel& model, int T, int dense_limit) {
  StackedCov stack;
  stack.phi = model.phi;
  stack.sigma_alpha = model.sigma_alpha;
  stack.sigma_zeta = model.sigma_zeta;
  stack.T = T;
  const long pt = static_cast<long>(model.phi.rows()) * T;
  stack.backend =
      pt <= dense_limit ? SolveBackend::DenseCholesky : SolveBackend::ConjugateGradient;
  check_stack(stack);
  return stack;
}

Eigen::VectorXd valpha_matvec(const StackedCov& stack, const Eigen::VectorXd& v) {
  check_stack(stack);
  const Eigen::Index p = stack.phi.rows();
  const Eigen::Index T = stack.T;
  if (v.size() != T * p) {
    throw LengthMismatchError("matvec input has length " + std::to_string(v.size()) +
                              "; the stack is " + std::to_string(T * p));
  }

  Eigen::VectorXd w(T * p);
  // Lower triangle plus diagonal: f_t = Φ f_{t-1} + Σ_α v_t.
  Eigen::VectorXd f = Eigen::VectorXd::Zero(p);
  for (Eigen::Index t = 0; t < T; ++t) {
    f = stack.phi * f + stack.sigma_alpha * v.segment(t * p, p);
    w.segment(t * p, p) = f;
  }
  // Strict upper triangle: g_t = Φ'(v_{t+1} + g_{t+1}), contribution Σ_α g_t.
  Eigen::VectorXd g = Eigen::VectorXd::Zero(p);
  for (Eigen::Index t = T - 2; t >= 0; --t) {
    g = stack.phi.transpose() * (v.segment((t + 1) * p, p) + g);
    w.segment(t * p, p) += stack.sigma_alpha * g;
  }
  return w;
}

Eigen::VectorXd vx_matvec(const StackedCov& stack, const Eigen::VectorXd& v) {
  Eigen::VectorXd w = valpha_matvec(stack, v);
  const Eigen::Index p = stack.phi.rows();
  for (Eigen::Index t = 0; t < stack.T; ++t) {
    w.segment(t * p, p) += stack.sigma_zeta * v.segment(t * p, p);
  }
  return w;
}

Eigen::MatrixXd dense_vx(const StackedCov& stack) {
  check_stack(stack);
  const Eigen::Index p = stack.phi.rows();
  const Eigen::Index T = stack.T;
  Eigen::MatrixXd vx = Eigen::MatrixXd::Zero(T * p, T * p);

  // Offset-d block is Φ^d Σ_α below the diagonal and its transpose above;
  // powers come from repeated multiplication, snapped to zero once they
  // underflow (they cannot recover: later powers are products of this one).
  Eigen::MatrixXd block = stack.sigma_alpha;
  for (Eigen::Index d = 0; d < T; ++d) {
    if (d > 0) {
      block = stack.phi * block;
      if (block.cwiseAbs().maxCoeff() < 1e-280) break;
    }
    for (Eigen::Index t = 0; t + d < T; ++t) {
      vx.block((t + d) * p, t * p, p, p) = block;
      if (d > 0) vx.block(t * p, (t + d) * p, p, p) = block.transpose();
    }
  }
  for (Eigen::Index t = 0; t < T; ++t) {
    vx.block(t * p, t * p, p, p) += stack.sigma_zeta;
  }
  return vx;
}

Eigen::VectorXd vx_solve(const StackedCov& stack, const Eigen::VectorXd& rhs) {
  check_stack(stack);
  if (rhs.size() != static_cast<Eigen::Index>(stack.T) * stack.phi.rows()) {
    throw LengthMismatchError("solve right-hand side has length " +
                              std::to_string(rhs.size()) + "; the stack is " +
                              std::to_string(stack.T * stack.phi.rows()));
  }
  if (stack.backend == SolveBackend::ConjugateGradient) return cg_solve(stack, rhs);

  const Eigen::MatrixXd vx = dense_vx(stack);
  Eigen::LLT<Eigen::MatrixXd> llt(vx);
  if (llt.info() != Eigen::Success) {
    throw SolverFailureError(
        "Cholesky factorization of the stacked covariance failed; it is not "
        "positive definite");
  }
  return llt.solve(rhs);
}

SmoothResult mmsle_smooth(const MsvModel& model, const LogSqPanel& ylog, int dense_limit) {
  require_stable(model);
  const Eigen::Index T = ylog.rows();
  const Eigen::Index p = ylog.cols();
  const StackedCov stack = make_stacked_cov(model, static_cast<int>(T), dense_limit);

  const Eigen::VectorXd rhs = stack_centered(ylog, model.c);
  const Eigen::VectorXd s = vx_solve(stack, rhs);
  const Eigen::VectorXd x = valpha_matvec(stack, s);

  SmoothResult result;
  result.xsmooth.resize(T, p);
  for (Eigen::Index t = 0; t < T; ++t) {
    result.xsmooth.row(t) = x.segment(t * p, p).transpose();
  }
  result.alpha = result.xsmooth.rowwise() + model.c.transpose();
  return result;
}

SmoothedCovariances build_smoothed_covariances(const MsvModel& model,
                                               const Eigen::MatrixXd& y,
                                               const Eigen::MatrixXd& xsmooth) {
  const Eigen::Index T = y.rows();
  const Eigen::Index p = y.cols();
  if (xsmooth.rows() != T || xsmooth.cols() != p) {
    throw LengthMismatchError("smoothed path is " + std::to_string(xsmooth.rows()) + "x" +
                              std::to_string(xsmooth.cols()) + "; returns are " +
                              std::to_string(T) + "x" + std::to_string(p));
  }
  if (model.gamma.rows() != p || model.gamma.cols() != p) {
    throw LengthMismatchError("correlation matrix must be " + std::to_string(p) + "x" +
                              std::to_string(p));
  }

  SmoothedCovariances out;
  out.dbar.resize(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    double acc = 0.0;
    for (Eigen::Index t = 0; t < T; ++t) {
      acc += y(t, i) * y(t, i) * std::exp(-xsmooth(t, i));
    }
    out.dbar(i) = std::sqrt(acc / static_cast<double>(T));
  }

  out.covs.kind = CovKind::Smoothed;
  out.covs.horizon.reserve(static_cast<std::size_t>(T));
  out.covs.matrices.reserve(static_cast<std::size_t>(T));
  for (Eigen::Index t = 0; t < T; ++t) {
    const Eigen::VectorXd d =
        out.dbar.array() * (xsmooth.row(t).transpose().array() / 2.0).exp();
    out.covs.horizon.push_back(static_cast<int>(t) + 1);
    out.covs.matrices.push_back(d.asDiagonal() * model.gamma * d.asDiagonal());
  }
  return out;
}

CovSequence forecast(const MsvModel& model, const LogSqPanel& ylog, int horizon,
                     int dense_limit) {
  if (horizon < 1) throw ConfigError("forecast horizon must be at least 1");
  require_stable(model);
  const Eigen::Index T = ylog.rows();
  const Eigen::Index p = ylog.cols();
  if (model.dbar.size() != p) {
    throw LengthMismatchError("model carries " + std::to_string(model.dbar.size()) +
                              " scale factors; the panel has " + std::to_string(p) +
                              " series");
  }

  const StackedCov stack = make_stacked_cov(model, static_cast<int>(T), dense_limit);
  const Eigen::VectorXd rhs = stack_centered(ylog, model.c);
  const Eigen::VectorXd s = vx_solve(stack, rhs);

  // R_l s = Φ^l q with q = Σ_t Φ^{T−t} Σ_α s_t, one forward recursion.
  Eigen::VectorXd q = Eigen::VectorXd::Zero(p);
  for (Eigen::Index t = 0; t < T; ++t) {
    q = stack.phi * q + stack.sigma_alpha * s.segment(t * p, p);
  }

  CovSequence out;
  out.kind = CovKind::Forecast;
  out.horizon.reserve(static_cast<std::size_t>(horizon));
  out.matrices.reserve(static_cast<std::size_t>(horizon));
  for (int l = 1; l <= horizon; ++l) {
    q = stack.phi * q;
    const Eigen::VectorXd d = model.dbar.array() * (q.array() / 2.0).exp();
    out.horizon.push_back(static_cast<int>(T) + l);
    out.matrices.push_back(d.asDiagonal() * model.gamma * d.asDiagonal());
  }
  return out;
}

}  // namespace msv
