#pragma once

#include <Eigen/Dense>

namespace oracle {

struct KalmanResult {
  Eigen::MatrixXd smoothed_state;  // T×p, E[a_t | y_{1..T}] for the zero-mean state
  Eigen::MatrixXd forecasts;       // L×p, E[a_{T+l} | y_{1..T}], l = 1..L
};

/// Fixed-interval RTS smoother for the linear-Gaussian model
///   y_t = c + a_t + noise,  Var(noise) = r
///   a_{t+1} = phi·a_t + innovation,  Var(innovation) = q
///   a_1 ~ N(0, p1)
/// implemented with the textbook filter/smoother recursions and explicit
/// small-matrix inverses; deliberately shares no code with the library.
KalmanResult kalman_smooth(const Eigen::MatrixXd& y, const Eigen::VectorXd& c,
                           const Eigen::MatrixXd& phi, const Eigen::MatrixXd& q,
                           const Eigen::MatrixXd& r, const Eigen::MatrixXd& p1,
                           int n_forecasts);

}  // namespace oracle
