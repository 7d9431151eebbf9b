#include "msv/panel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace msv {

namespace {

std::string cell_ref(Eigen::Index t, Eigen::Index i) {
  return "(t=" + std::to_string(t + 1) + ", series=" + std::to_string(i + 1) + ")";
}

}  // namespace

void validate_return_panel(const Eigen::MatrixXd& y) {
  if (y.rows() < 2 || y.cols() < 1) {
    throw InsufficientSampleError("return panel must be at least 2 x 1, got " +
                                  std::to_string(y.rows()) + " x " + std::to_string(y.cols()));
  }
  for (Eigen::Index i = 0; i < y.cols(); ++i) {
    for (Eigen::Index t = 0; t < y.rows(); ++t) {
      if (!std::isfinite(y(t, i))) {
        throw NonFiniteError("non-finite return at " + cell_ref(t, i));
      }
    }
  }
}

LogSqPanel log_square_transform(const Eigen::MatrixXd& y, ZeroPolicy policy) {
  validate_return_panel(y);
  const Eigen::Index T = y.rows();
  const Eigen::Index p = y.cols();

  LogSqPanel out;
  out.ylog.resize(T, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    double min_nonzero = std::numeric_limits<double>::infinity();
    bool has_zero = false;
    for (Eigen::Index t = 0; t < T; ++t) {
      const double v = std::abs(y(t, i));
      if (v == 0.0) {
        has_zero = true;
      } else {
        min_nonzero = std::min(min_nonzero, v);
      }
    }
    if (has_zero) {
      if (policy == ZeroPolicy::Error) {
        for (Eigen::Index t = 0; t < T; ++t) {
          if (y(t, i) == 0.0) {
            throw ZeroReturnError("zero return at " + cell_ref(t, i) +
                                  "; log of squared return undefined");
          }
        }
      }
      if (!std::isfinite(min_nonzero)) {
        throw ZeroReturnError("series " + std::to_string(i + 1) +
                              " is identically zero; no substitute scale available");
      }
    }
    const double fill = 0.5 * min_nonzero;
    for (Eigen::Index t = 0; t < T; ++t) {
      const double v = y(t, i) == 0.0 ? fill : y(t, i);
      out.ylog(t, i) = std::log(v * v);
    }
  }

  out.colmeans = out.ylog.colwise().mean();
  out.xcentered = out.ylog.rowwise() - out.colmeans;
  return out;
}

RegressorMatrix lag_stack(const Eigen::MatrixXd& x, int m) {
  const Eigen::Index T = x.rows();
  const Eigen::Index p = x.cols();
  if (m < 1) throw ConfigError("lag order m must be >= 1, got " + std::to_string(m));
  if (T <= m) {
    throw InsufficientSampleError("lag_stack needs T > m, got T=" + std::to_string(T) +
                                  ", m=" + std::to_string(m));
  }

  RegressorMatrix out;
  out.m = m;
  out.z.resize(T - m, p * m);
  out.response = x.bottomRows(T - m);
  for (Eigen::Index row = 0; row < T - m; ++row) {
    const Eigen::Index t = row + m;  // response time index into x
    for (int k = 1; k <= m; ++k) {
      out.z.block(row, static_cast<Eigen::Index>(k - 1) * p, 1, p) = x.row(t - k);
    }
  }
  return out;
}

RegressorMatrix lag_stack(const LogSqPanel& panel, int m) {
  return lag_stack(panel.xcentered, m);
}

Eigen::MatrixXd sample_cov(const Eigen::MatrixXd& x) {
  if (x.rows() < 2) throw InsufficientSampleError("sample_cov needs at least 2 rows");
  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  return (centered.transpose() * centered) / static_cast<double>(x.rows());
}

Eigen::MatrixXd sample_corr(const Eigen::MatrixXd& y) {
  const Eigen::MatrixXd cov = sample_cov(y);
  const Eigen::Index p = cov.rows();
  Eigen::VectorXd sd(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    if (cov(i, i) <= 0.0) {
      throw ZeroVarianceColumnError("series " + std::to_string(i + 1) +
                                    " has zero sample variance");
    }
    sd(i) = std::sqrt(cov(i, i));
  }
  Eigen::MatrixXd corr = cov.array() / (sd * sd.transpose()).array();
  corr.diagonal().setOnes();
  return corr;
}

int suggest_lag_order(Eigen::Index T, Eigen::Index p) {
  int m = static_cast<int>(std::floor(std::cbrt(static_cast<double>(T))));
  m = std::max(m, 1);
  // Keep a usable regression sample even for short panels.
  while (m > 1 && (T - m) < 10 * p) --m;
  return m;
}

}  // namespace msv
