#pragma once

#include <functional>

#include <Eigen/Dense>

namespace gkdv {

using LinearMap = std::function<void(const Eigen::VectorXd& in, Eigen::VectorXd& out)>;

struct GmresOptions {
  int restart = 60;
  int max_iterations = 2000;
  double rel_tol = 1e-13;
};

struct GmresResult {
  int iterations = 0;
  double rel_residual = 0.0;  ///< ||b - A x|| / ||b|| at exit
  bool converged = false;
};

/// Restarted GMRES for A x = b with right preconditioner M (x = M z).
/// x holds the initial guess on entry.
GmresResult gmres(const LinearMap& a, const LinearMap& m, const Eigen::VectorXd& b,
                  Eigen::VectorXd& x, const GmresOptions& opts = {});

}  // namespace gkdv
