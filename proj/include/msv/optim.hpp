#pragma once

#include <Eigen/Dense>
#include <functional>

namespace msv {

struct OptimResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Minimizes f by BFGS with central-difference gradients and Armijo
/// backtracking. Non-finite objective values are treated as +inf, so the line
/// search backs away from them; the starting point itself must be finite.
/// Convergence: ‖∇f‖_∞ ≤ tol·(1 + |f|).
OptimResult minimize_bfgs(const std::function<double(const Eigen::VectorXd&)>& f,
                          const Eigen::VectorXd& x0, int max_iter = 300,
                          double tol = 1e-7);

}  // namespace msv
