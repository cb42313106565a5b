#pragma once

#include <Eigen/Dense>

namespace gkdv::dense {

struct EigenDecomposition {
  Eigen::VectorXcd values;
  Eigen::MatrixXcd vectors;  ///< right eigenvectors, column j for values(j)
};

/// Full eigendecomposition of a real nonsymmetric matrix (LAPACK dgeev).
EigenDecomposition eig_nonsymmetric(Eigen::MatrixXd a);

struct PencilMinimum {
  double value;
  Eigen::VectorXd vector;  ///< B-normalized minimizer
};

/// Smallest eigenvalue of A x = lambda B x with A symmetric and B symmetric
/// positive definite (LAPACK dsygvx).
PencilMinimum smallest_pencil_eigenpair(Eigen::MatrixXd a, Eigen::MatrixXd b);

}  // namespace gkdv::dense
