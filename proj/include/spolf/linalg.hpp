#pragma once

#include <Eigen/Core>

namespace spolf {

struct SymmetricEigen {
  Eigen::VectorXd values;   ///< ascending
  Eigen::MatrixXd vectors;  ///< column i pairs with values(i)
  int sweeps = 0;
};

/// Cyclic Jacobi rotations for a small dense symmetric matrix. Converges when
/// the off-diagonal Frobenius mass drops below tol times the matrix norm.
SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& a, double tol = 1e-15, int max_sweeps = 64);

}  // namespace spolf
