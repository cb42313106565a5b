#include "gkdv/krylov.hpp"

#include <cmath>
#include <vector>

namespace gkdv {

GmresResult gmres(const LinearMap& a, const LinearMap& m, const Eigen::VectorXd& b,
                  Eigen::VectorXd& x, const GmresOptions& opts) {
  const Eigen::Index n = b.size();
  GmresResult res;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    x.setZero(n);
    res.converged = true;
    return res;
  }
  if (x.size() != n) x.setZero(n);

  const int k = opts.restart;
  Eigen::MatrixXd v(n, k + 1);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(k + 1, k);
  std::vector<double> cs(k), sn(k);
  Eigen::VectorXd g(k + 1), w(n), z(n), ax(n);

  while (res.iterations < opts.max_iterations) {
    a(x, ax);
    Eigen::VectorXd r = b - ax;
    double beta = r.norm();
    res.rel_residual = beta / bnorm;
    if (res.rel_residual <= opts.rel_tol) {
      res.converged = true;
      return res;
    }
    v.col(0) = r / beta;
    g.setZero();
    g(0) = beta;
    h.setZero();
    int j = 0;
    for (; j < k && res.iterations < opts.max_iterations; ++j, ++res.iterations) {
      m(v.col(j), z);
      a(z, w);
      // Modified Gram-Schmidt with one reorthogonalization pass.
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i <= j; ++i) {
          const double hij = v.col(i).dot(w);
          h(i, j) += hij;
          w -= hij * v.col(i);
        }
      }
      h(j + 1, j) = w.norm();
      if (h(j + 1, j) > 0.0) v.col(j + 1) = w / h(j + 1, j);
      for (int i = 0; i < j; ++i) {
        const double t = cs[i] * h(i, j) + sn[i] * h(i + 1, j);
        h(i + 1, j) = -sn[i] * h(i, j) + cs[i] * h(i + 1, j);
        h(i, j) = t;
      }
      const double rr = std::hypot(h(j, j), h(j + 1, j));
      cs[j] = h(j, j) / rr;
      sn[j] = h(j + 1, j) / rr;
      h(j, j) = rr;
      h(j + 1, j) = 0.0;
      g(j + 1) = -sn[j] * g(j);
      g(j) = cs[j] * g(j);
      if (std::abs(g(j + 1)) / bnorm <= opts.rel_tol) {
        ++j;
        ++res.iterations;
        break;
      }
    }
    const Eigen::VectorXd y =
        h.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
    Eigen::VectorXd update = v.leftCols(j) * y;
    m(update, z);
    x += z;
  }
  a(x, ax);
  res.rel_residual = (b - ax).norm() / bnorm;
  res.converged = res.rel_residual <= opts.rel_tol;
  return res;
}

}  // namespace gkdv
