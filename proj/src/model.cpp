#include "msv/model.hpp"

#include <Eigen/Eigenvalues>

namespace msv {

double spectral_radius(const Eigen::MatrixXd& a) {
  if (a.rows() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(a, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace msv
