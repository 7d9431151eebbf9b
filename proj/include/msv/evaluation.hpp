#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "msv/smoother.hpp"

namespace msv {

/// Mean over periods of ‖Â_t − B_t‖_F. The sequences must agree in length,
/// dimension, and period labels.
double frobenius_distance(const CovSequence& estimated, const CovSequence& truth);

/// Global minimum-variance portfolio w = H⁻¹ι / (ι'H⁻¹ι); weights sum to one.
Eigen::VectorXd min_variance_weights(const Eigen::MatrixXd& h);

/// Minimum-variance weights for every matrix in the sequence, one row per
/// period.
Eigen::MatrixXd min_variance_paths(const CovSequence& seq);

struct DmResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double mean_u = 0.0;
};

/// Diebold-Mariano test on a precomputed loss-difference series:
/// DM = √h·ū / √(NW variance of √h·ū), Bartlett kernel with the given lag
/// (-1 → floor(1.5·h^{1/3})), two-sided normal p-value.
DmResult dm_statistic(const Eigen::VectorXd& u, int hac_lag = -1);

/// The portfolio form: u_t = (w'_{i,t}ε_t)² − (w'_{j,t}ε_t)² from aligned
/// h×p return and weight panels (one weight row per period); needs h ≥ 10.
DmResult dm_test(const Eigen::MatrixXd& returns, const Eigen::MatrixXd& weights_i,
                 const Eigen::MatrixXd& weights_j, int hac_lag = -1);

/// Forecast comparison bundle: per-model covariance sequences over a common
/// evaluation window plus the realized returns of that window.
struct ForecastSet {
  std::vector<std::string> names;
  std::vector<CovSequence> forecasts;
  Eigen::MatrixXd returns;  // h×p
};

/// Squared minimum-variance portfolio returns, one h-row per period and one
/// column per model; the u_{ij,t} losses are column differences.
Eigen::MatrixXd forecast_losses(const ForecastSet& set);

enum class McsStatistic { SumSquared, Range };

struct McsOptions {
  McsStatistic statistic = McsStatistic::SumSquared;
  int bootstrap = 1000;
  int block_len = -1;  // -1 → floor(h^{1/3})
  std::vector<double> levels = {0.05, 0.10, 0.20};
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct McsResult {
  Eigen::VectorXd p_values;            // per loss column, monotonized
  std::vector<int> elimination_order;  // worst first; the survivor closes it
  std::vector<double> levels;
  std::vector<std::vector<int>> included;  // per level: columns with p > level
};

/// Model confidence set over an h×M loss panel: studentized pairwise
/// statistics with circular-block-bootstrap variances, iterative elimination
/// of the worst model, monotonized p-values. The survivor's p-value is 1.
McsResult mcs(const Eigen::MatrixXd& losses, const McsOptions& opts = {});

enum class QuantileSource { Normal, Historical };

/// Value-at-risk threshold −τ_q·√h_p with τ_q the q-quantile of the standard
/// normal or of the supplied standardized-return sample.
double var_threshold(double h_p, double q,
                     QuantileSource source = QuantileSource::Normal,
                     const Eigen::VectorXd& standardized_returns = Eigen::VectorXd());

/// Standard-normal quantile, accurate to full double precision.
double normal_quantile(double q);

}  // namespace msv
