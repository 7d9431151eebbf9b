#include "msv/optim.hpp"

#include <cmath>
#include <limits>

#include "msv/errors.hpp"

namespace msv {
namespace {

using Objective = std::function<double(const Eigen::VectorXd&)>;

double guarded(const Objective& f, const Eigen::VectorXd& x) {
  const double v = f(x);
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

Eigen::VectorXd gradient(const Objective& f, const Eigen::VectorXd& x, double fx) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd g(n);
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double step = 1e-6 * (1.0 + std::abs(x(i)));
    probe(i) = x(i) + step;
    const double fhi = guarded(f, probe);
    probe(i) = x(i) - step;
    const double flo = guarded(f, probe);
    probe(i) = x(i);
    if (std::isfinite(fhi) && std::isfinite(flo)) {
      g(i) = (fhi - flo) / (2.0 * step);
    } else if (std::isfinite(fhi)) {
      g(i) = (fhi - fx) / step;
    } else if (std::isfinite(flo)) {
      g(i) = (fx - flo) / step;
    } else {
      g(i) = 0.0;
    }
  }
  return g;
}

}  // namespace

OptimResult minimize_bfgs(const Objective& f, const Eigen::VectorXd& x0,
                          int max_iter, double tol) {
  if (x0.size() == 0) throw ConfigError("the starting point must be nonempty");
  const Eigen::Index n = x0.size();

  Eigen::VectorXd x = x0;
  double fx = guarded(f, x);
  if (!std::isfinite(fx)) {
    throw OptimFailureError("the objective is not finite at the starting point");
  }
  Eigen::VectorXd g = gradient(f, x, fx);
  Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(n, n);

  OptimResult out;
  for (int iter = 0; iter < max_iter; ++iter) {
    out.iterations = iter + 1;
    if (g.cwiseAbs().maxCoeff() <= tol * (1.0 + std::abs(fx))) {
      out.converged = true;
      break;
    }

    Eigen::VectorXd dir = -(hinv * g);
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      hinv.setIdentity();
      dir = -g;
      slope = g.dot(dir);
      if (!(slope < 0.0)) break;
    }

    double step = 1.0;
    double fn = std::numeric_limits<double>::infinity();
    Eigen::VectorXd xn;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      xn = x + step * dir;
      fn = guarded(f, xn);
      if (fn <= fx + 1e-4 * step * slope) {
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;

    Eigen::VectorXd gn = gradient(f, xn, fn);
    const Eigen::VectorXd s = xn - x;
    const Eigen::VectorXd yv = gn - g;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd left =
          Eigen::MatrixXd::Identity(n, n) - rho * s * yv.transpose();
      hinv = left * hinv * left.transpose() + rho * s * s.transpose();
    }
    x = std::move(xn);
    fx = fn;
    g = std::move(gn);
  }

  out.x = std::move(x);
  out.value = fx;
  return out;
}

}  // namespace msv
