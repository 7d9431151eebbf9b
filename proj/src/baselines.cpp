#include "msv/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "msv/errors.hpp"
#include "msv/estimator.hpp"
#include "msv/optim.hpp"
#include "msv/panel.hpp"
#include "msv/parallel.hpp"

namespace msv {
namespace {

constexpr double kLogTwoPi = 1.8378770664093453;
constexpr double kCoefCap = 0.999;

void require_series(const Eigen::VectorXd& series) {
  if (!series.allFinite()) {
    throw NonFiniteError("the series contains non-finite values");
  }
}

double mean_square(const Eigen::VectorXd& series) {
  return series.squaredNorm() / static_cast<double>(series.size());
}

/// (ω, α, β) ↔ unconstrained coordinates: ω = eˣ⁰ and (α, β) a capped
/// softmax pair, so ω > 0, α ≥ 0, β ≥ 0, α + β ≤ 0.999 hold for every x.
Eigen::Vector3d decode_garch(const Eigen::VectorXd& x) {
  const double ea = std::exp(std::clamp(x(1), -40.0, 40.0));
  const double eb = std::exp(std::clamp(x(2), -40.0, 40.0));
  const double den = 1.0 + ea + eb;
  Eigen::Vector3d theta;
  theta(0) = std::exp(std::clamp(x(0), -60.0, 60.0));
  theta(1) = kCoefCap * ea / den;
  theta(2) = kCoefCap * eb / den;
  return theta;
}

Eigen::Vector3d encode_garch(double omega, double alpha, double beta) {
  const double fa = std::max(alpha / kCoefCap, 1e-8);
  const double fb = std::max(beta / kCoefCap, 1e-8);
  const double f0 = std::max(1.0 - fa - fb, 1e-8);
  return {std::log(omega), std::log(fa / f0), std::log(fb / f0)};
}

double garch_negloglik(const Eigen::VectorXd& y, double v, double omega,
                       double alpha, double beta) {
  const Eigen::Index T = y.size();
  double h = v;
  double nll = 0.5 * (kLogTwoPi + std::log(h) + y(0) * y(0) / h);
  for (Eigen::Index t = 1; t < T; ++t) {
    h = omega + alpha * y(t - 1) * y(t - 1) + beta * h;
    nll += 0.5 * (kLogTwoPi + std::log(h) + y(t) * y(t) / h);
  }
  return nll;
}

struct PairDecode {
  double a = 0.0;
  double b = 0.0;
};

PairDecode decode_pair(const Eigen::VectorXd& x) {
  const double ea = std::exp(std::clamp(x(0), -40.0, 40.0));
  const double eb = std::exp(std::clamp(x(1), -40.0, 40.0));
  const double den = 1.0 + ea + eb;
  return {kCoefCap * ea / den, kCoefCap * eb / den};
}

Eigen::Vector2d encode_pair(double a, double b) {
  const double fa = std::max(a / kCoefCap, 1e-8);
  const double fb = std::max(b / kCoefCap, 1e-8);
  const double f0 = std::max(1.0 - fa - fb, 1e-8);
  return {std::log(fa / f0), std::log(fb / f0)};
}

/// Best-of-starts driver with a parsimony window. On data with no real
/// dynamics the quasi-likelihood has a near-flat ridge: a spurious
/// high-persistence optimum beats the constant-variance one by only O(1)
/// points, while a genuine persistent optimum wins by thousands. Candidates
/// within select_window (the Schwarz cost of the effectively unidentified
/// coefficients, log T) of the best value are treated as ties and resolved
/// toward the smallest persistence.
OptimResult multistart(const std::function<double(const Eigen::VectorXd&)>& f,
                       const std::vector<Eigen::VectorXd>& starts,
                       const std::function<double(const Eigen::VectorXd&)>& persistence,
                       double select_window) {
  std::vector<OptimResult> candidates;
  candidates.reserve(starts.size());
  for (const Eigen::VectorXd& x0 : starts) {
    candidates.push_back(minimize_bfgs(f, x0));
  }
  double best_value = std::numeric_limits<double>::infinity();
  for (const OptimResult& r : candidates) best_value = std::min(best_value, r.value);
  if (!std::isfinite(best_value)) {
    throw OptimFailureError("no start produced a finite objective");
  }
  const OptimResult* pick = nullptr;
  for (const OptimResult& r : candidates) {
    if (r.value > best_value + select_window) continue;
    if (pick == nullptr || persistence(r.x) < persistence(pick->x)) pick = &r;
  }
  return *pick;
}

std::vector<GarchFit> fit_margins(const Eigen::MatrixXd& panel, int jobs) {
  std::vector<GarchFit> margins(panel.cols());
  parallel_for(static_cast<int>(panel.cols()), jobs,
               [&](int i) { margins[i] = fit_garch11(panel.col(i)); });
  return margins;
}

Eigen::MatrixXd standardized_residuals(const Eigen::MatrixXd& panel,
                                       const std::vector<GarchFit>& margins) {
  Eigen::MatrixXd u(panel.rows(), panel.cols());
  for (Eigen::Index i = 0; i < panel.cols(); ++i) {
    u.col(i) = panel.col(i).cwiseQuotient(margins[i].h_path.cwiseSqrt());
  }
  return u;
}

/// R = Q*⁻¹/²QQ*⁻¹/² with the unit diagonal set exactly.
Eigen::MatrixXd scale_correlation(const Eigen::MatrixXd& q) {
  const Eigen::VectorXd inv_root = q.diagonal().cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd r = inv_root.asDiagonal() * q * inv_root.asDiagonal();
  r.diagonal().setOnes();
  return r;
}

double correlation_negloglik(const Eigen::MatrixXd& u, const Eigen::MatrixXd& qbar,
                             double a, double b) {
  const Eigen::Index T = u.rows();
  Eigen::MatrixXd q = qbar;
  double nll = 0.0;
  for (Eigen::Index t = 0; t < T; ++t) {
    if (t > 0) {
      q = (1.0 - a - b) * qbar +
          a * (u.row(t - 1).transpose() * u.row(t - 1)) + b * q;
    }
    const Eigen::MatrixXd r = scale_correlation(q);
    Eigen::LLT<Eigen::MatrixXd> llt(r);
    if (llt.info() != Eigen::Success) {
      return std::numeric_limits<double>::infinity();
    }
    const double logdet =
        2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
    const Eigen::VectorXd ut = u.row(t).transpose();
    nll += 0.5 * (logdet + ut.dot(llt.solve(ut)) - ut.squaredNorm());
  }
  return nll;
}

Eigen::MatrixXd scaled_outer(const Eigen::VectorXd& d, const Eigen::MatrixXd& corr) {
  const Eigen::Index p = d.size();
  Eigen::MatrixXd h(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i; j < p; ++j) {
      const double v = d(i) * d(j) * corr(i, j);
      h(i, j) = v;
      h(j, i) = v;
    }
  }
  return h;
}

void require_horizon(int horizon) {
  if (horizon < 1) throw ConfigError("the forecast horizon must be positive");
}

/// Margin variance forecasts: one step from the last observation, then the
/// squared innovation is replaced by its conditional expectation.
Eigen::MatrixXd margin_forecasts(const std::vector<GarchFit>& margins, int horizon) {
  const Eigen::Index p = static_cast<Eigen::Index>(margins.size());
  Eigen::MatrixXd h(horizon, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const GarchFit& m = margins[i];
    double cur = m.omega + m.alpha * m.last_obs * m.last_obs +
                 m.beta * m.h_path(m.h_path.size() - 1);
    h(0, i) = cur;
    for (int l = 1; l < horizon; ++l) {
      cur = m.omega + (m.alpha + m.beta) * cur;
      h(l, i) = cur;
    }
  }
  return h;
}

}  // namespace

GarchPath garch11_path(const Eigen::VectorXd& series, double omega, double alpha,
                       double beta) {
  if (series.size() < 1) throw InsufficientSampleError("the series is empty");
  require_series(series);
  if (!(omega > 0.0) || alpha < 0.0 || beta < 0.0) {
    throw ConfigError("garch parameters need omega > 0, alpha >= 0, beta >= 0");
  }
  const Eigen::Index T = series.size();
  const double v = mean_square(series);
  if (!(v > 0.0)) {
    throw ZeroVarianceColumnError("the series has zero mean square");
  }
  GarchPath out;
  out.h.resize(T);
  out.h(0) = v;
  for (Eigen::Index t = 1; t < T; ++t) {
    out.h(t) = omega + alpha * series(t - 1) * series(t - 1) + beta * out.h(t - 1);
  }
  out.loglik = 0.0;
  for (Eigen::Index t = 0; t < T; ++t) {
    out.loglik -=
        0.5 * (kLogTwoPi + std::log(out.h(t)) + series(t) * series(t) / out.h(t));
  }
  return out;
}

GarchFit fit_garch11(const Eigen::VectorXd& series) {
  const Eigen::Index T = series.size();
  if (T < 50) {
    throw InsufficientSampleError("garch estimation needs at least 50 observations, got " +
                                  std::to_string(T));
  }
  require_series(series);
  const double v = mean_square(series);
  if (!(v > 0.0)) {
    throw ZeroVarianceColumnError("the series has zero mean square");
  }

  const auto objective = [&](const Eigen::VectorXd& x) {
    const Eigen::Vector3d theta = decode_garch(x);
    return garch_negloglik(series, v, theta(0), theta(1), theta(2));
  };

  std::vector<Eigen::VectorXd> starts;
  for (const auto& [alpha, beta] :
       {std::pair{0.05, 0.10}, std::pair{0.05, 0.90}, std::pair{0.10, 0.80}}) {
    starts.push_back(encode_garch(v * (1.0 - alpha - beta), alpha, beta));
  }
  const auto persistence = [](const Eigen::VectorXd& x) {
    const Eigen::Vector3d theta = decode_garch(x);
    return theta(1) + theta(2);
  };
  const OptimResult best =
      multistart(objective, starts, persistence, std::log(static_cast<double>(T)));
  const Eigen::Vector3d theta = decode_garch(best.x);

  GarchFit fit;
  fit.omega = theta(0);
  fit.alpha = theta(1);
  fit.beta = theta(2);
  GarchPath path = garch11_path(series, fit.omega, fit.alpha, fit.beta);
  fit.loglik = path.loglik;
  fit.h_path = std::move(path.h);
  fit.last_obs = series(T - 1);
  fit.boundary = fit.alpha + fit.beta > 0.995 || fit.alpha < 1e-6 || fit.beta < 1e-6;
  fit.converged = best.converged;
  return fit;
}

CccFit fit_ccc(const Eigen::MatrixXd& panel, int jobs) {
  validate_return_panel(panel);
  CccFit fit;
  fit.margins = fit_margins(panel, jobs);
  const GammaEstimate corr =
      estimate_gamma(standardized_residuals(panel, fit.margins));
  fit.rbar = corr.gamma;
  fit.rbar_ridged = corr.ridged;
  return fit;
}

DccFit fit_dcc_scalar(const Eigen::MatrixXd& panel, int jobs) {
  validate_return_panel(panel);
  const Eigen::Index T = panel.rows();
  const Eigen::Index p = panel.cols();

  DccFit fit;
  fit.margins = fit_margins(panel, jobs);
  const Eigen::MatrixXd u_raw = standardized_residuals(panel, fit.margins);

  const GammaEstimate corr = estimate_gamma(u_raw);
  fit.qbar = corr.gamma;
  fit.qbar_ridged = corr.ridged;

  fit.u_scale.resize(p);
  Eigen::MatrixXd u(T, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const double scale = std::sqrt(u_raw.col(i).squaredNorm() / static_cast<double>(T));
    if (!(scale > 0.0)) {
      throw ZeroVarianceColumnError("a standardized residual column is identically zero");
    }
    fit.u_scale(i) = scale;
    u.col(i) = u_raw.col(i) / scale;
  }

  const auto objective = [&](const Eigen::VectorXd& x) {
    const PairDecode ab = decode_pair(x);
    return correlation_negloglik(u, fit.qbar, ab.a, ab.b);
  };
  std::vector<Eigen::VectorXd> starts;
  for (const auto& [a, b] :
       {std::pair{0.02, 0.90}, std::pair{0.05, 0.70}, std::pair{0.01, 0.30}}) {
    starts.push_back(encode_pair(a, b));
  }
  const auto persistence = [](const Eigen::VectorXd& x) {
    const PairDecode ab = decode_pair(x);
    return ab.a + ab.b;
  };
  const OptimResult best =
      multistart(objective, starts, persistence, std::log(static_cast<double>(T)));
  const PairDecode ab = decode_pair(best.x);
  fit.a = ab.a;
  fit.b = ab.b;
  fit.loglik_corr = -best.value;
  fit.boundary = fit.a + fit.b > 0.995 || fit.a < 1e-6 || fit.b < 1e-6;

  Eigen::MatrixXd q = fit.qbar;
  for (Eigen::Index t = 1; t < T; ++t) {
    q = (1.0 - fit.a - fit.b) * fit.qbar +
        fit.a * (u.row(t - 1).transpose() * u.row(t - 1)) + fit.b * q;
  }
  fit.q_last = std::move(q);
  fit.u_last = u.row(T - 1).transpose();
  return fit;
}

OgarchFit fit_ogarch(const Eigen::MatrixXd& panel, int k, int jobs) {
  validate_return_panel(panel);
  const Eigen::Index T = panel.rows();
  const Eigen::Index p = panel.cols();
  if (k == 0) k = static_cast<int>(p);
  if (k < 1 || k > p) {
    throw ConfigError("the component count must lie in [1, p]");
  }

  OgarchFit fit;
  fit.mean = panel.colwise().mean();
  const Eigen::MatrixXd centered = panel.rowwise() - fit.mean.transpose();
  const Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(T);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) {
    throw NonPdError("eigendecomposition of the sample covariance failed");
  }
  fit.loadings = es.eigenvectors().rowwise().reverse();
  const Eigen::MatrixXd components = centered * fit.loadings;
  fit.margins = fit_margins(components.leftCols(k), jobs);
  fit.residual_variances.resize(p - k);
  for (Eigen::Index i = k; i < p; ++i) {
    fit.residual_variances(i - k) =
        components.col(i).squaredNorm() / static_cast<double>(T);
  }
  return fit;
}

CovSequence covariance_path(const CccFit& fit) {
  const Eigen::Index T = fit.margins.front().h_path.size();
  const Eigen::Index p = static_cast<Eigen::Index>(fit.margins.size());
  CovSequence out;
  out.kind = CovKind::Smoothed;
  Eigen::VectorXd d(p);
  for (Eigen::Index t = 0; t < T; ++t) {
    for (Eigen::Index i = 0; i < p; ++i) d(i) = std::sqrt(fit.margins[i].h_path(t));
    out.horizon.push_back(static_cast<int>(t) + 1);
    out.matrices.push_back(scaled_outer(d, fit.rbar));
  }
  return out;
}

CovSequence covariance_path(const DccFit& fit, const Eigen::MatrixXd& panel) {
  const Eigen::Index T = fit.margins.front().h_path.size();
  const Eigen::Index p = static_cast<Eigen::Index>(fit.margins.size());
  if (panel.rows() != T || panel.cols() != p) {
    throw LengthMismatchError("the panel does not match the fitted margins");
  }
  Eigen::MatrixXd u(T, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    u.col(i) = panel.col(i).cwiseQuotient(fit.margins[i].h_path.cwiseSqrt()) /
               fit.u_scale(i);
  }
  CovSequence out;
  out.kind = CovKind::Smoothed;
  Eigen::MatrixXd q = fit.qbar;
  Eigen::VectorXd d(p);
  for (Eigen::Index t = 0; t < T; ++t) {
    if (t > 0) {
      q = (1.0 - fit.a - fit.b) * fit.qbar +
          fit.a * (u.row(t - 1).transpose() * u.row(t - 1)) + fit.b * q;
    }
    const Eigen::MatrixXd r = scale_correlation(q);
    for (Eigen::Index i = 0; i < p; ++i) d(i) = std::sqrt(fit.margins[i].h_path(t));
    out.horizon.push_back(static_cast<int>(t) + 1);
    out.matrices.push_back(scaled_outer(d, r));
  }
  return out;
}

/// H = P diag(λ) P' with both triangles assigned from one accumulation, so
/// the result is exactly symmetric.
Eigen::MatrixXd weighted_loadings_outer(const Eigen::MatrixXd& loadings,
                                        const Eigen::VectorXd& variances) {
  const Eigen::Index p = loadings.rows();
  Eigen::MatrixXd h(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i; j < p; ++j) {
      double v = 0.0;
      for (Eigen::Index m = 0; m < variances.size(); ++m) {
        v += variances(m) * loadings(i, m) * loadings(j, m);
      }
      h(i, j) = v;
      h(j, i) = v;
    }
  }
  return h;
}

/// Per-component variances at one time point: dynamic for the k fitted
/// components, the constant sample variance for the rest.
Eigen::VectorXd component_variances(const OgarchFit& fit,
                                    const std::function<double(Eigen::Index)>& dynamic) {
  const Eigen::Index p = fit.loadings.rows();
  const Eigen::Index k = static_cast<Eigen::Index>(fit.margins.size());
  Eigen::VectorXd variances(p);
  for (Eigen::Index i = 0; i < k; ++i) variances(i) = dynamic(i);
  for (Eigen::Index i = k; i < p; ++i) variances(i) = fit.residual_variances(i - k);
  return variances;
}

CovSequence covariance_path(const OgarchFit& fit) {
  const Eigen::Index T = fit.margins.front().h_path.size();
  CovSequence out;
  out.kind = CovKind::Smoothed;
  for (Eigen::Index t = 0; t < T; ++t) {
    const Eigen::VectorXd variances = component_variances(
        fit, [&](Eigen::Index i) { return fit.margins[i].h_path(t); });
    out.horizon.push_back(static_cast<int>(t) + 1);
    out.matrices.push_back(weighted_loadings_outer(fit.loadings, variances));
  }
  return out;
}

CovSequence forecast_baseline(const CccFit& fit, int horizon) {
  require_horizon(horizon);
  const Eigen::Index T = fit.margins.front().h_path.size();
  const Eigen::MatrixXd h = margin_forecasts(fit.margins, horizon);
  CovSequence out;
  out.kind = CovKind::Forecast;
  for (int l = 0; l < horizon; ++l) {
    const Eigen::VectorXd d = h.row(l).cwiseSqrt();
    out.horizon.push_back(static_cast<int>(T) + l + 1);
    out.matrices.push_back(scaled_outer(d, fit.rbar));
  }
  return out;
}

CovSequence forecast_baseline(const DccFit& fit, int horizon) {
  require_horizon(horizon);
  const Eigen::Index T = fit.margins.front().h_path.size();
  const Eigen::MatrixXd h = margin_forecasts(fit.margins, horizon);
  CovSequence out;
  out.kind = CovKind::Forecast;
  Eigen::MatrixXd q = (1.0 - fit.a - fit.b) * fit.qbar +
                      fit.a * (fit.u_last * fit.u_last.transpose()) +
                      fit.b * fit.q_last;
  for (int l = 0; l < horizon; ++l) {
    if (l > 0) q = (1.0 - fit.a - fit.b) * fit.qbar + (fit.a + fit.b) * q;
    const Eigen::MatrixXd r = scale_correlation(q);
    const Eigen::VectorXd d = h.row(l).cwiseSqrt();
    out.horizon.push_back(static_cast<int>(T) + l + 1);
    out.matrices.push_back(scaled_outer(d, r));
  }
  return out;
}

CovSequence forecast_baseline(const OgarchFit& fit, int horizon) {
  require_horizon(horizon);
  const Eigen::Index T = fit.margins.front().h_path.size();
  const Eigen::MatrixXd h = margin_forecasts(fit.margins, horizon);
  CovSequence out;
  out.kind = CovKind::Forecast;
  for (int l = 0; l < horizon; ++l) {
    const Eigen::VectorXd variances =
        component_variances(fit, [&](Eigen::Index i) { return h(l, i); });
    out.horizon.push_back(static_cast<int>(T) + l + 1);
    out.matrices.push_back(weighted_loadings_outer(fit.loadings, variances));
  }
  return out;
}

}  // namespace msv
