#pragma once

#include <Eigen/Dense>

#include "msv/errors.hpp"

namespace msv {

/// How log_square_transform treats exact-zero returns, for which log(y²) is
/// undefined. HalfMinNonzero substitutes half the smallest nonzero |y| in the
/// same column before squaring; Error rejects the panel.
enum class ZeroPolicy { Error, HalfMinNonzero };

/// Log-squared returns with their column-mean decomposition:
/// ylog[t,i] = log(y[t,i]²), xcentered = ylog - colmeans.
struct LogSqPanel {
  Eigen::MatrixXd ylog;
  Eigen::MatrixXd xcentered;
  Eigen::RowVectorXd colmeans;

  Eigen::Index rows() const { return ylog.rows(); }
  Eigen::Index cols() const { return ylog.cols(); }
};

/// Lagged regressor stack for a VAR(m): the row aligned with time t holds
/// [x_{t-1}, x_{t-2}, ..., x_{t-m}], and response row t holds x_t, for
/// t = m+1..T. Both blocks therefore have T-m rows.
struct RegressorMatrix {
  Eigen::MatrixXd z;         // (T-m) x (p*m)
  Eigen::MatrixXd response;  // (T-m) x p
  int m = 0;
};

/// Validates a raw return panel: at least two rows, one column, all finite.
void validate_return_panel(const Eigen::MatrixXd& y);

LogSqPanel log_square_transform(const Eigen::MatrixXd& y,
                                ZeroPolicy policy = ZeroPolicy::HalfMinNonzero);

RegressorMatrix lag_stack(const Eigen::MatrixXd& x, int m);
RegressorMatrix lag_stack(const LogSqPanel& panel, int m);

/// Sample covariance (1/T normalization) after removing column means.
Eigen::MatrixXd sample_cov(const Eigen::MatrixXd& x);

/// Sample correlation matrix; throws ZeroVarianceColumn if a column is flat.
Eigen::MatrixXd sample_corr(const Eigen::MatrixXd& y);

/// Suggested VAR approximation order m = floor(T^(1/3)), clipped to keep at
/// least 10·p rows of regression sample.
int suggest_lag_order(Eigen::Index T, Eigen::Index p);

}  // namespace msv
