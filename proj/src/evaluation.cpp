#include "msv/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "msv/errors.hpp"
#include "msv/parallel.hpp"
#include "msv/rng.hpp"

namespace msv {
namespace {

constexpr double kSqrtTwo = 1.4142135623730951;
constexpr double kInvSqrtTwoPi = 0.3989422804014327;

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrtTwo); }

/// Acklam's rational approximation, polished to machine precision with two
/// Newton steps on the exact CDF.
double normal_quantile_impl(double q) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double plow = 0.02425;

  double x;
  if (q < plow) {
    const double u = std::sqrt(-2.0 * std::log(q));
    x = (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
        ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  } else if (q <= 1.0 - plow) {
    const double u = q - 0.5;
    const double r = u * u;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * u /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double u = std::sqrt(-2.0 * std::log(1.0 - q));
    x = -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
        ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  }
  for (int step = 0; step < 2; ++step) {
    const double density = kInvSqrtTwoPi * std::exp(-0.5 * x * x);
    if (!(density > 0.0)) break;
    x -= (standard_normal_cdf(x) - q) / density;
  }
  return x;
}

void require_weight_rows(const Eigen::MatrixXd& weights, const char* label) {
  for (Eigen::Index t = 0; t < weights.rows(); ++t) {
    if (std::abs(weights.row(t).sum() - 1.0) > 1e-8) {
      throw ConfigError(std::string(label) + " row " + std::to_string(t + 1) +
                        " does not sum to one");
    }
  }
}

int default_hac_lag(Eigen::Index h) {
  return static_cast<int>(std::floor(1.5 * std::cbrt(static_cast<double>(h))));
}

/// Bartlett-kernel estimate of Var(√h·ū).
double newey_west_variance(const Eigen::VectorXd& u, int lag) {
  const Eigen::Index h = u.size();
  const double mean = u.mean();
  const Eigen::VectorXd e = u.array() - mean;
  double variance = e.squaredNorm() / static_cast<double>(h);
  for (int k = 1; k <= lag; ++k) {
    double gamma = 0.0;
    for (Eigen::Index t = k; t < h; ++t) gamma += e(t) * e(t - k);
    gamma /= static_cast<double>(h);
    variance += 2.0 * (1.0 - static_cast<double>(k) / (lag + 1.0)) * gamma;
  }
  return variance;
}

struct BootstrapMeans {
  Eigen::VectorXd full;    // column means of the loss panel
  Eigen::MatrixXd resampled;  // B×M resampled column means
};

BootstrapMeans bootstrap_column_means(const Eigen::MatrixXd& losses, int bootstrap,
                                      int block_len, std::uint64_t seed, int jobs) {
  const Eigen::Index h = losses.rows();
  const Eigen::Index m = losses.cols();
  BootstrapMeans out;
  out.full = losses.colwise().mean();
  out.resampled.resize(bootstrap, m);
  parallel_for(bootstrap, jobs, [&](int b) {
    rng::Philox gen(seed, static_cast<std::uint64_t>(b));
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(m);
    Eigen::Index filled = 0;
    while (filled < h) {
      const Eigen::Index start =
          static_cast<Eigen::Index>(gen.below(static_cast<std::uint64_t>(h)));
      const Eigen::Index take = std::min<Eigen::Index>(block_len, h - filled);
      for (Eigen::Index s = 0; s < take; ++s) {
        acc += losses.row((start + s) % h).transpose();
      }
      filled += take;
    }
    out.resampled.row(b) = (acc / static_cast<double>(h)).transpose();
  });
  return out;
}

}  // namespace

double normal_quantile(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw ConfigError("the quantile level must lie in (0, 1)");
  }
  return normal_quantile_impl(q);
}

double frobenius_distance(const CovSequence& estimated, const CovSequence& truth) {
  if (estimated.matrices.size() != truth.matrices.size() ||
      estimated.matrices.empty()) {
    throw LengthMismatchError("the sequences cover different numbers of periods");
  }
  if (estimated.horizon != truth.horizon) {
    throw LengthMismatchError("the sequences cover different period labels");
  }
  double total = 0.0;
  for (std::size_t t = 0; t < estimated.matrices.size(); ++t) {
    const Eigen::MatrixXd& a = estimated.matrices[t];
    const Eigen::MatrixXd& b = truth.matrices[t];
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
      throw LengthMismatchError("the sequences have mismatched dimensions at period " +
                                std::to_string(estimated.horizon[t]));
    }
    total += (a - b).norm();
  }
  return total / static_cast<double>(estimated.matrices.size());
}

Eigen::VectorXd min_variance_weights(const Eigen::MatrixXd& h) {
  if (h.rows() != h.cols() || h.rows() < 1) {
    throw ConfigError("the covariance matrix must be square");
  }
  if (!h.allFinite()) {
    throw NonFiniteError("the covariance matrix contains non-finite values");
  }
  const double scale = h.cwiseAbs().maxCoeff();
  if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + scale)) {
    throw ConfigError("the covariance matrix must be symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(h);
  if (llt.info() != Eigen::Success) {
    throw SingularHError("the covariance matrix is not positive definite");
  }
  const Eigen::VectorXd solved = llt.solve(Eigen::VectorXd::Ones(h.rows()));
  const double denom = solved.sum();
  if (!std::isfinite(denom) || denom <= 0.0) {
    throw SingularHError("the covariance matrix is numerically singular");
  }
  return solved / denom;
}

Eigen::MatrixXd min_variance_paths(const CovSequence& seq) {
  if (seq.matrices.empty()) {
    throw LengthMismatchError("the covariance sequence is empty");
  }
  const Eigen::Index p = seq.matrices.front().rows();
  Eigen::MatrixXd weights(static_cast<Eigen::Index>(seq.matrices.size()), p);
  for (std::size_t t = 0; t < seq.matrices.size(); ++t) {
    weights.row(static_cast<Eigen::Index>(t)) =
        min_variance_weights(seq.matrices[t]).transpose();
  }
  return weights;
}

DmResult dm_statistic(const Eigen::VectorXd& u, int hac_lag) {
  const Eigen::Index h = u.size();
  if (h < 2) throw InsufficientSampleError("the loss-difference series is too short");
  if (!u.allFinite()) {
    throw NonFiniteError("the loss-difference series contains non-finite values");
  }
  if ((u.array() == u(0)).all()) {
    throw DegenerateVarianceError("the loss-difference series is constant");
  }
  if (hac_lag == -1) hac_lag = default_hac_lag(h);
  if (hac_lag < 0 || hac_lag >= h) {
    throw ConfigError("the HAC lag must lie in [0, h)");
  }
  const double variance = newey_west_variance(u, hac_lag);
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw DegenerateVarianceError("the long-run variance estimate is not positive");
  }
  DmResult result;
  result.mean_u = u.mean();
  result.statistic =
      std::sqrt(static_cast<double>(h)) * result.mean_u / std::sqrt(variance);
  result.p_value = std::erfc(std::abs(result.statistic) / kSqrtTwo);
  return result;
}

DmResult dm_test(const Eigen::MatrixXd& returns, const Eigen::MatrixXd& weights_i,
                 const Eigen::MatrixXd& weights_j, int hac_lag) {
  if (weights_i.rows() != returns.rows() || weights_j.rows() != returns.rows() ||
      weights_i.cols() != returns.cols() || weights_j.cols() != returns.cols()) {
    throw LengthMismatchError("returns and weight paths must share their shape");
  }
  const Eigen::Index h = returns.rows();
  if (h < 10) {
    throw InsufficientSampleError("the evaluation window has " + std::to_string(h) +
                                  " periods; need at least 10");
  }
  if (!returns.allFinite()) {
    throw NonFiniteError("the return panel contains non-finite values");
  }
  require_weight_rows(weights_i, "first weight path");
  require_weight_rows(weights_j, "second weight path");

  Eigen::VectorXd u(h);
  for (Eigen::Index t = 0; t < h; ++t) {
    const double ri = weights_i.row(t).dot(returns.row(t));
    const double rj = weights_j.row(t).dot(returns.row(t));
    u(t) = ri * ri - rj * rj;
  }
  return dm_statistic(u, hac_lag);
}

Eigen::MatrixXd forecast_losses(const ForecastSet& set) {
  const std::size_t m = set.forecasts.size();
  if (m < 1 || set.names.size() != m) {
    throw ConfigError("the forecast set needs one name per model");
  }
  if (std::set<std::string>(set.names.begin(), set.names.end()).size() != m) {
    throw ConfigError("model names must be unique");
  }
  const Eigen::Index h = set.returns.rows();
  const Eigen::Index p = set.returns.cols();
  if (h < 1) throw LengthMismatchError("the evaluation window is empty");
  if (!set.returns.allFinite()) {
    throw NonFiniteError("the return panel contains non-finite values");
  }
  Eigen::MatrixXd losses(h, static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < m; ++k) {
    const CovSequence& seq = set.forecasts[k];
    if (static_cast<Eigen::Index>(seq.matrices.size()) != h ||
        seq.horizon != set.forecasts.front().horizon) {
      throw LengthMismatchError("model \"" + set.names[k] +
                                "\" does not cover the evaluation window");
    }
    for (Eigen::Index t = 0; t < h; ++t) {
      if (seq.matrices[t].rows() != p || seq.matrices[t].cols() != p) {
        throw LengthMismatchError("model \"" + set.names[k] +
                                  "\" has a forecast of the wrong dimension");
      }
      const double r =
          min_variance_weights(seq.matrices[t]).dot(set.returns.row(t));
      losses(t, static_cast<Eigen::Index>(k)) = r * r;
    }
  }
  return losses;
}

McsResult mcs(const Eigen::MatrixXd& losses, const McsOptions& opts) {
  const Eigen::Index h = losses.rows();
  const Eigen::Index m = losses.cols();
  if (m < 2) {
    throw InsufficientSampleError("the confidence set needs at least two models");
  }
  if (h < 20) {
    throw InsufficientSampleError("the loss panel has " + std::to_string(h) +
                                  " periods; need at least 20");
  }
  if (!losses.allFinite()) {
    throw NonFiniteError("the loss panel contains non-finite values");
  }
  if (opts.bootstrap < 1) throw ConfigError("the bootstrap count must be positive");
  const int block_len = opts.block_len == -1
                            ? std::max(1, static_cast<int>(std::floor(
                                              std::cbrt(static_cast<double>(h)))))
                            : opts.block_len;
  if (block_len < 1 || block_len > h) {
    throw ConfigError("the block length must lie in [1, h]");
  }
  for (double level : opts.levels) {
    if (!(level > 0.0 && level < 1.0)) {
      throw ConfigError("confidence levels must lie in (0, 1)");
    }
  }

  const BootstrapMeans means =
      bootstrap_column_means(losses, opts.bootstrap, block_len, opts.seed, opts.jobs);
  const int B = opts.bootstrap;

  // Pairwise bootstrap variances of ū_ij; fixed across elimination rounds
  // because each depends only on its own two columns.
  Eigen::MatrixXd pair_var = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const double dbar = means.full(i) - means.full(j);
      double v = 0.0;
      for (int b = 0; b < B; ++b) {
        const double dev = (means.resampled(b, i) - means.resampled(b, j)) - dbar;
        v += dev * dev;
      }
      v /= static_cast<double>(B);
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw DegenerateVarianceError("loss columns " + std::to_string(i + 1) +
                                      " and " + std::to_string(j + 1) +
                                      " are indistinguishable");
      }
      pair_var(i, j) = pair_var(j, i) = v;
    }
  }

  McsResult result;
  result.p_values = Eigen::VectorXd::Zero(m);
  result.levels = opts.levels;
  std::vector<int> alive(static_cast<std::size_t>(m));
  for (std::size_t i = 0; i < alive.size(); ++i) alive[i] = static_cast<int>(i);

  double running_p = 0.0;
  while (alive.size() > 1) {
    const auto aggregate = [&](const auto& pair_stat) {
      double total = 0.0;
      for (std::size_t x = 0; x < alive.size(); ++x) {
        for (std::size_t y = x + 1; y < alive.size(); ++y) {
          const double t = pair_stat(alive[x], alive[y]);
          if (opts.statistic == McsStatistic::SumSquared) {
            total += t * t;
          } else {
            total = std::max(total, std::abs(t));
          }
        }
      }
      return total;
    };

    const double observed = aggregate([&](int i, int j) {
      return (means.full(i) - means.full(j)) / std::sqrt(pair_var(i, j));
    });
    int exceed = 0;
    for (int b = 0; b < B; ++b) {
      const double null_stat = aggregate([&](int i, int j) {
        return ((means.resampled(b, i) - means.resampled(b, j)) -
                (means.full(i) - means.full(j))) /
               std::sqrt(pair_var(i, j));
      });
      if (null_stat >= observed) ++exceed;
    }
    const double round_p = static_cast<double>(exceed) / B;

    // Worst model: largest studentized average loss excess over the rest.
    const double count = static_cast<double>(alive.size());
    int worst = alive.front();
    double worst_stat = -std::numeric_limits<double>::infinity();
    for (int j : alive) {
      double full_sum = 0.0;
      for (int i : alive) full_sum += means.full(i);
      const double excess = count * means.full(j) - full_sum;
      double v = 0.0;
      for (int b = 0; b < B; ++b) {
        double boot_sum = 0.0;
        for (int i : alive) boot_sum += means.resampled(b, i);
        const double dev = (count * means.resampled(b, j) - boot_sum) - excess;
        v += dev * dev;
      }
      v /= static_cast<double>(B);
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw DegenerateVarianceError("the elimination statistic for column " +
                                      std::to_string(j + 1) + " is degenerate");
      }
      const double stat = excess / std::sqrt(v);
      if (stat > worst_stat) {
        worst_stat = stat;
        worst = j;
      }
    }

    running_p = std::max(running_p, round_p);
    result.p_values(worst) = running_p;
    result.elimination_order.push_back(worst);
    alive.erase(std::find(alive.begin(), alive.end(), worst));
  }
  result.p_values(alive.front()) = 1.0;
  result.elimination_order.push_back(alive.front());

  result.included.reserve(opts.levels.size());
  for (double level : opts.levels) {
    std::vector<int> set;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (result.p_values(i) > level) set.push_back(static_cast<int>(i));
    }
    result.included.push_back(std::move(set));
  }
  return result;
}

double var_threshold(double h_p, double q, QuantileSource source,
                     const Eigen::VectorXd& standardized_returns) {
  if (!(h_p > 0.0) || !std::isfinite(h_p)) {
    throw ConfigError("the portfolio variance forecast must be positive");
  }
  if (!(q > 0.0 && q <= 0.5)) {
    throw ConfigError("the tail probability must lie in (0, 0.5]");
  }
  double tau;
  if (source == QuantileSource::Normal) {
    tau = normal_quantile_impl(q);
  } else {
    const Eigen::Index n = standardized_returns.size();
    if (n < 2) {
      throw ConfigError("the historical source needs a standardized-return sample");
    }
    if (!standardized_returns.allFinite()) {
      throw NonFiniteError("the standardized-return sample contains non-finite values");
    }
    std::vector<double> sorted(standardized_returns.data(),
                               standardized_returns.data() + n);
    std::sort(sorted.begin(), sorted.end());
    const double pos = q * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - std::floor(pos);
    tau = sorted[lo] +
          (lo + 1 < sorted.size() ? frac * (sorted[lo + 1] - sorted[lo]) : 0.0);
  }
  return -tau * std::sqrt(h_p);
}

}  // namespace msv
