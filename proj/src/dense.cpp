#include "gkdv/dense.hpp"

#include <lapacke.h>

#include <vector>

#include "gkdv/error.hpp"

namespace gkdv::dense {

EigenDecomposition eig_nonsymmetric(Eigen::MatrixXd a) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  if (a.cols() != a.rows()) throw NumericalError("eigendecomposition needs a square matrix");
  std::vector<double> wr(n), wi(n);
  Eigen::MatrixXd vr(n, n);
  const lapack_int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'V', n, a.data(), n, wr.data(),
                                        wi.data(), nullptr, 1, vr.data(), n);
  if (info != 0) throw NumericalError("dgeev failed with info " + std::to_string(info));

  EigenDecomposition out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (lapack_int j = 0; j < n; ++j) {
    out.values(j) = {wr[j], wi[j]};
    if (wi[j] == 0.0) {
      out.vectors.col(j) = vr.col(j).cast<std::complex<double>>();
    } else if (wi[j] > 0.0 && j + 1 < n) {
      // Conjugate pair stored as (re, im) in consecutive columns.
      out.vectors.col(j).real() = vr.col(j);
      out.vectors.col(j).imag() = vr.col(j + 1);
      out.vectors.col(j + 1).real() = vr.col(j);
      out.vectors.col(j + 1).imag() = -vr.col(j + 1);
      out.values(j + 1) = {wr[j + 1], wi[j + 1]};
      ++j;
    }
  }
  return out;
}

PencilMinimum smallest_pencil_eigenpair(Eigen::MatrixXd a, Eigen::MatrixXd b) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  if (a.cols() != n || b.rows() != n || b.cols() != n) {
    throw NumericalError("pencil matrices must be square and of equal size");
  }
  lapack_int found = 0;
  std::vector<double> w(n);
  Eigen::MatrixXd z(n, 1);
  std::vector<lapack_int> ifail(n);
  const double abstol = 2.0 * LAPACKE_dlamch('S');
  const lapack_int info =
      LAPACKE_dsygvx(LAPACK_COL_MAJOR, 1, 'V', 'I', 'U', n, a.data(), n, b.data(), n, 0.0, 0.0, 1,
                     1, abstol, &found, w.data(), z.data(), n, ifail.data());
  if (info != 0 || found != 1) {
    throw NumericalError("dsygvx failed with info " + std::to_string(info));
  }
  return {w[0], z.col(0)};
}

}  // namespace gkdv::dense
