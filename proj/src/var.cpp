#include "msv/var.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "msv/errors.hpp"
#include "msv/parallel.hpp"
#include "msv/simd.hpp"

namespace msv {

namespace {

// Sufficient statistics of the least-squares part, all on the 1/n scale the
// per-sample λ expects.
struct GramData {
  Eigen::MatrixXd gram;   // q x q, Z'Z/n
  Eigen::MatrixXd cross;  // q x p, Z'X/n
  Eigen::VectorXd xsq;    // p, column sums of squares of X over n
  double n = 0.0;
};

GramData build_gram(const Eigen::MatrixXd& z, const Eigen::MatrixXd& x) {
  GramData g;
  g.n = static_cast<double>(z.rows());
  g.gram.noalias() = z.transpose() * z / g.n;
  g.cross.noalias() = z.transpose() * x / g.n;
  g.xsq = x.colwise().squaredNorm() / g.n;
  return g;
}

GramData build_gram_rows(const Eigen::MatrixXd& z, const Eigen::MatrixXd& x,
                         const std::vector<int>& rows) {
  Eigen::MatrixXd zs(static_cast<Eigen::Index>(rows.size()), z.cols());
  Eigen::MatrixXd xs(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    zs.row(static_cast<Eigen::Index>(k)) = z.row(rows[k]);
    xs.row(static_cast<Eigen::Index>(k)) = x.row(rows[k]);
  }
  return build_gram(zs, xs);
}

double total_objective(const GramData& g, const PenaltySpec& spec, const Eigen::MatrixXd& psi_t,
                       const Eigen::MatrixXd& s) {
  const Eigen::Index p = psi_t.cols();
  const Eigen::Index q = psi_t.rows();
  double obj = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) {
    const double quad = simd::dot(psi_t.col(i).data(), s.col(i).data(), static_cast<std::size_t>(q));
    const double lin = simd::dot(g.cross.col(i).data(), psi_t.col(i).data(),
                                 static_cast<std::size_t>(q));
    obj += 0.5 * (g.xsq(i) - 2.0 * lin + quad);
    for (Eigen::Index j = 0; j < q; ++j) obj += penalty_value(spec, psi_t(j, i));
  }
  return obj;
}

struct CdOutcome {
  int sweeps = 0;
  bool converged = true;
  std::vector<double> trace;
};

// Cyclic coordinate descent over all equations with synchronized sweeps.
// psi_t is q x p (equation i in column i) and doubles as the warm start.
// Once a row's largest coefficient move drops to tol, its Gram product is
// refreshed from scratch and the row must survive one more clean pass —
// this keeps accumulated axpy drift out of the convergence decision.
CdOutcome cd_solve(const GramData& g, const PenaltySpec& spec, const SolverOpts& opts,
                   Eigen::MatrixXd& psi_t) {
  const Eigen::Index q = g.gram.rows();
  const Eigen::Index p = g.cross.cols();
  const std::size_t qn = static_cast<std::size_t>(q);

  Eigen::MatrixXd s(q, p);
  s.noalias() = g.gram * psi_t;
  std::vector<char> done(static_cast<std::size_t>(p), 0);
  std::vector<char> verified(static_cast<std::size_t>(p), 0);

  CdOutcome out;
  out.trace.reserve(16);
  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    bool all_done = true;
    for (Eigen::Index i = 0; i < p; ++i) {
      if (done[static_cast<std::size_t>(i)]) continue;
      double row_delta = 0.0;
      double* s_i = s.col(i).data();
      for (Eigen::Index j = 0; j < q; ++j) {
        const double w = g.gram(j, j);
        const double old = psi_t(j, i);
        if (w <= 0.0) {
          // Degenerate (empty) regressor column: coefficient not identified.
          if (old != 0.0) psi_t(j, i) = 0.0;
          continue;
        }
        const double zj = g.cross(j, i) - s_i[j] + w * old;
        const double updated = univariate_minimizer(spec, zj / w, w);
        const double delta = updated - old;
        if (delta != 0.0) {
          psi_t(j, i) = updated;
          simd::axpy(delta, g.gram.col(j).data(), s_i, qn);
          row_delta = std::max(row_delta, std::abs(delta));
        }
      }
      if (row_delta <= opts.tol) {
        if (verified[static_cast<std::size_t>(i)]) {
          done[static_cast<std::size_t>(i)] = 1;
        } else {
          s.col(i).noalias() = g.gram * psi_t.col(i);
          verified[static_cast<std::size_t>(i)] = 1;
          all_done = false;
        }
      } else {
        verified[static_cast<std::size_t>(i)] = 0;
        all_done = false;
      }
    }
    out.sweeps = sweep;
    out.trace.push_back(total_objective(g, spec, psi_t, s));
    if (all_done) return out;
  }
  out.converged = false;
  return out;
}

// λ = 0: the stationary point is the multi-response least-squares solution,
// solved directly (with refinement) instead of iterated to tolerance.
CdOutcome direct_ols(const GramData& g, Eigen::MatrixXd& psi_t) {
  Eigen::LLT<Eigen::MatrixXd> llt(g.gram);
  if (llt.info() == Eigen::Success) {
    psi_t = llt.solve(g.cross);
    for (int round = 0; round < 2; ++round) {
      psi_t += llt.solve(g.cross - g.gram * psi_t);
    }
  } else {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(g.gram);
    psi_t = qr.solve(g.cross);
    psi_t += qr.solve(g.cross - g.gram * psi_t);
  }
  CdOutcome out;
  out.sweeps = 0;
  Eigen::MatrixXd s = g.gram * psi_t;
  out.trace.push_back(total_objective(g, PenaltySpec::lasso(0.0), psi_t, s));
  return out;
}

Eigen::MatrixXd solve_path_stage(const GramData& g, const PenaltySpec& spec,
                                 const SolverOpts& opts, Eigen::MatrixXd psi_t,
                                 CdOutcome* outcome = nullptr) {
  CdOutcome out;
  if (spec.lambda() == 0.0) {
    out = direct_ols(g, psi_t);
  } else {
    out = cd_solve(g, spec, opts, psi_t);
  }
  if (outcome) *outcome = std::move(out);
  return psi_t;
}

// Full single-λ recipe: nonconvex families start from the LASSO solution at
// the same λ; `warm` seeds the LASSO stage (or the only stage for LASSO).
Eigen::MatrixXd fit_psi(const GramData& g, const PenaltySpec& spec, const SolverOpts& opts,
                        const Eigen::MatrixXd* warm, CdOutcome* outcome,
                        Eigen::MatrixXd* lasso_out = nullptr) {
  const Eigen::Index q = g.gram.rows();
  const Eigen::Index p = g.cross.cols();
  Eigen::MatrixXd init = warm ? *warm : Eigen::MatrixXd::Zero(q, p);

  if (spec.family() == PenaltyFamily::lasso || spec.lambda() == 0.0) {
    Eigen::MatrixXd psi = solve_path_stage(g, spec, opts, std::move(init), outcome);
    if (lasso_out) *lasso_out = psi;
    return psi;
  }
  Eigen::MatrixXd lasso_psi = solve_path_stage(g, spec.as_lasso(), opts, std::move(init));
  if (lasso_out) *lasso_out = lasso_psi;
  return solve_path_stage(g, spec, opts, std::move(lasso_psi), outcome);
}

std::vector<std::pair<int, int>> collect_support(const Eigen::MatrixXd& psi) {
  std::vector<std::pair<int, int>> support;
  for (Eigen::Index i = 0; i < psi.rows(); ++i) {
    for (Eigen::Index j = 0; j < psi.cols(); ++j) {
      if (psi(i, j) != 0.0) support.emplace_back(static_cast<int>(i), static_cast<int>(j));
    }
  }
  return support;
}

std::vector<std::pair<int, int>> fold_bounds(int n, int n_folds) {
  std::vector<std::pair<int, int>> bounds;
  const int base = n / n_folds;
  const int extra = n % n_folds;
  int lo = 0;
  for (int f = 0; f < n_folds; ++f) {
    const int size = base + (f < extra ? 1 : 0);
    bounds.emplace_back(lo, lo + size);
    lo += size;
  }
  return bounds;
}

}  // namespace

VarFit fit_penalized_var(const RegressorMatrix& reg, const PenaltySpec& spec,
                         const SolverOpts& opts, const Eigen::MatrixXd* warm_start) {
  const Eigen::Index n = reg.z.rows();
  const Eigen::Index p = reg.response.cols();
  if (n <= p) {
    throw InsufficientSampleError("penalized VAR needs more regression rows than series: " +
                                  std::to_string(n) + " rows for p=" + std::to_string(p));
  }
  const GramData g = build_gram(reg.z, reg.response);

  Eigen::MatrixXd warm_t;
  const Eigen::MatrixXd* warm = nullptr;
  if (warm_start) {
    warm_t = warm_start->transpose();
    warm = &warm_t;
  }
  CdOutcome outcome;
  const Eigen::MatrixXd psi_t = fit_psi(g, spec, opts, warm, &outcome);

  VarFit fit;
  fit.psi = psi_t.transpose();
  fit.residuals = reg.response - reg.z * psi_t;
  fit.support = collect_support(fit.psi);
  fit.lambda_used = spec.lambda();
  fit.objective_trace = std::move(outcome.trace);
  fit.m = reg.m;
  fit.sweeps = outcome.sweeps;
  fit.converged = outcome.converged;
  return fit;
}

VarFit fit_penalized_var(const LogSqPanel& x, int m, const PenaltySpec& spec,
                         const SolverOpts& opts) {
  return fit_penalized_var(lag_stack(x, m), spec, opts);
}

std::vector<double> default_lambda_grid(const RegressorMatrix& reg, int count, double min_ratio) {
  if (count < 1) throw ConfigError("lambda grid needs at least one point");
  if (!(min_ratio > 0.0 && min_ratio <= 1.0)) {
    throw ConfigError("lambda grid min_ratio must be in (0, 1]");
  }
  const double n = static_cast<double>(reg.z.rows());
  const double lambda_max = (reg.z.transpose() * reg.response / n).array().abs().maxCoeff();
  std::vector<double> grid(static_cast<std::size_t>(count));
  if (lambda_max <= 0.0) {
    std::fill(grid.begin(), grid.end(), 0.0);
    return grid;
  }
  if (count == 1) {
    grid[0] = lambda_max;
    return grid;
  }
  for (int k = 0; k < count; ++k) {
    grid[static_cast<std::size_t>(k)] =
        lambda_max * std::pow(min_ratio, static_cast<double>(k) / (count - 1));
  }
  return grid;
}

CvResult hv_cross_validate(const RegressorMatrix& reg, const PenaltySpec& shape,
                           const CvPlan& plan, int jobs) {
  const int n = static_cast<int>(reg.z.rows());
  const Eigen::Index q = reg.z.cols();
  const Eigen::Index p = reg.response.cols();
  if (plan.n_folds < 2) {
    throw DegenerateFoldsError("cross-validation needs at least 2 folds, got " +
                               std::to_string(plan.n_folds));
  }
  const int gap = plan.gap < 0 ? reg.m : plan.gap;

  std::vector<double> grid =
      plan.lambda_grid.empty() ? default_lambda_grid(reg) : plan.lambda_grid;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    if (!(grid[k] > grid[k + 1])) {
      throw ConfigError("lambda grid must be strictly descending");
    }
  }
  if (!grid.empty() && grid.back() < 0.0) throw ConfigError("lambda grid must be nonnegative");

  const auto bounds = fold_bounds(n, plan.n_folds);
  for (const auto& [lo, hi] : bounds) {
    if (hi <= lo) {
      throw DegenerateFoldsError("empty test block: fewer rows than folds (n=" +
                                 std::to_string(n) + ")");
    }
  }

  const SolverOpts opts;
  std::vector<std::vector<double>> fold_sse(bounds.size(),
                                            std::vector<double>(grid.size(), 0.0));
  std::vector<int> fold_rows(bounds.size(), 0);

  parallel_for(static_cast<int>(bounds.size()), jobs, [&](int f) {
    const auto [lo, hi] = bounds[static_cast<std::size_t>(f)];
    std::vector<int> train;
    train.reserve(static_cast<std::size_t>(n));
    for (int r = 0; r < n; ++r) {
      if (r < lo - gap || r >= hi + gap) train.push_back(r);
    }
    if (static_cast<Eigen::Index>(train.size()) <= q + 1) {
      throw DegenerateFoldsError(
          "training segment of fold " + std::to_string(f + 1) + " has " +
          std::to_string(train.size()) + " rows; needs more than " + std::to_string(q + 1));
    }
    const GramData g = build_gram_rows(reg.z, reg.response, train);
    const auto test_z = reg.z.middleRows(lo, hi - lo);
    const auto test_x = reg.response.middleRows(lo, hi - lo);

    // Pathwise warm start: the LASSO solution chains down the grid; nonconvex
    // fits restart from it at each λ.
    Eigen::MatrixXd lasso_warm = Eigen::MatrixXd::Zero(q, p);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const PenaltySpec at_lambda = shape.with_lambda(grid[k]);
      Eigen::MatrixXd psi_t = fit_psi(g, at_lambda, opts, &lasso_warm, nullptr, &lasso_warm);
      fold_sse[static_cast<std::size_t>(f)][k] =
          (test_x - test_z * psi_t).squaredNorm();
    }
    fold_rows[static_cast<std::size_t>(f)] = hi - lo;
  });

  CvResult result;
  result.lambda_grid = grid;
  result.n_folds = plan.n_folds;
  result.gap = gap;
  result.cv_curve.assign(grid.size(), 0.0);
  double total_rows = 0.0;
  for (std::size_t f = 0; f < bounds.size(); ++f) {
    total_rows += fold_rows[f];
    for (std::size_t k = 0; k < grid.size(); ++k) result.cv_curve[k] += fold_sse[f][k];
  }
  for (double& v : result.cv_curve) v /= total_rows * static_cast<double>(p);

  // Descending scan with strict improvement: exact ties keep the larger λ.
  std::size_t best = 0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (result.cv_curve[k] < result.cv_curve[best]) best = k;
  }
  result.lambda_star = grid[best];
  return result;
}

CvResult hv_cross_validate(const LogSqPanel& x, int m, const PenaltySpec& shape,
                           const CvPlan& plan, int jobs) {
  return hv_cross_validate(lag_stack(x, m), shape, plan, jobs);
}

KktReport kkt_check(const VarFit& fit, const RegressorMatrix& reg, const PenaltySpec& spec,
                    double tol) {
  const PenaltySpec at_fit_lambda = spec.with_lambda(fit.lambda_used);
  const GramData g = build_gram(reg.z, reg.response);
  const Eigen::MatrixXd psi_t = fit.psi.transpose();
  const Eigen::MatrixXd grad_t = g.gram * psi_t - g.cross;  // q x p

  KktReport report;
  report.max_excess = -std::numeric_limits<double>::infinity();
  const double zero_bound = penalty_derivative_at_zero(at_fit_lambda) + tol;
  for (Eigen::Index i = 0; i < psi_t.cols(); ++i) {
    for (Eigen::Index j = 0; j < psi_t.rows(); ++j) {
      const double value = psi_t(j, i);
      const double grad = grad_t(j, i);
      double statistic, bound;
      if (value != 0.0) {
        const double sign = value > 0.0 ? 1.0 : -1.0;
        statistic = std::abs(grad + penalty_derivative(at_fit_lambda, std::abs(value)) * sign);
        bound = tol;
      } else {
        statistic = std::abs(grad);
        bound = zero_bound;
      }
      const double excess = statistic - bound;
      report.max_excess = std::max(report.max_excess, excess);
      if (excess > 0.0) {
        report.violations.push_back(
            {static_cast<int>(i), static_cast<int>(j), statistic, bound});
      }
    }
  }
  report.pass = report.violations.empty();
  return report;
}

KktReport kkt_check(const VarFit& fit, const LogSqPanel& x, const PenaltySpec& spec, double tol) {
  return kkt_check(fit, lag_stack(x, fit.m), spec, tol);
}

}  // namespace msv
