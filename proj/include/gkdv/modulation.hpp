#pragma once

#include <vector>

#include <Eigen/Dense>

#include "gkdv/linop.hpp"
#include "gkdv/soliton.hpp"

namespace gkdv {

struct ModulationOptions {
  double eps = 0.0;             ///< modulation radius; 0 selects 0.1 min_j ||Q_{c_j}||
  bool enforce_radius = true;   ///< reject ||u - R(t)|| >= eps
  int max_iterations = 25;
  double residual_tol = 1e-11;  ///< on max_j |int v R~_{j,x}| / ||R~_{j,x}|| relative to max(||v||, 1)
  double step_tol = 1e-14;
  double wrap_tol = kWrapTolerance;
};

/// u = R~(t; y) + v with int v (R~_j)_x = 0 for every j, where
/// R~_j = Q_{c_j}(x - c_j t - x_j - y_j), and a+-_j = int v Z~+-_j.
struct ModulationState {
  double t = 0.0;
  std::vector<double> y;
  Field v;
  std::vector<double> a_plus, a_minus;
  int iterations = 0;
  double residual = 0.0;  ///< max_j |int v R~_{j,x}| / ||R~_{j,x}||
  double distance = 0.0;  ///< ||u - R(t)||_{L2} against the unmodulated sum
};

/// Final data u(Sn) = R(Sn) + sum_{j,+-} b+-_j Z+-_j(Sn), with b ordered
/// (b+_1..b+_N, b-_1..b-_N).
struct FinalData {
  double Sn = 0.0;
  std::vector<double> b;
  Field u;
  double residual = 0.0;  ///< max |(a+, a-) - (a_hat, 0)| after the solve
  int iterations = 0;
  bool outside_ball = false;
};

struct FinalDataOptions {
  double ball_radius = 0.0;  ///< 0 disables the ball check
  double tol = 1e-11;
  int max_iterations = 50;
};

/// Modulation machinery for a fixed ensemble on a fixed grid. Shifted
/// profiles are produced by Fourier phase shifts of precomputed centered
/// spectra. Const member functions are safe to call concurrently.
class Modulator {
 public:
  Modulator(SolitonEnsemble ens, const EdgeSpectrum& spectrum, const Grid1D& grid,
            ModulationOptions opts = {});

  const SolitonEnsemble& ensemble() const { return ens_; }
  const Grid1D& grid() const { return grid_; }
  const ModulationOptions& options() const { return opts_; }
  double eps() const { return eps_; }
  double e0() const { return e0_; }
  std::size_t size() const { return ens_.size(); }

  double center(std::size_t j, double t, double y = 0.0) const;
  /// d-th derivative (0..2) of R~_j at offset y.
  Field soliton(std::size_t j, double t, double y, int deriv = 0) const;
  /// Z~+-_j at offset y.
  Field dual(std::size_t j, double t, double y, int sign) const;
  /// Same as dual(), without the safe-region check (used for diagnostics only).
  const ScaledDual& scaled_dual(std::size_t j) const { return duals_[j]; }
  /// R~(t; y); R(t) for y = 0.
  Field profile_sum(double t, const std::vector<double>& y) const;
  Field reference(double t) const;

  ModulationState decompose(const Field& u, double t, std::vector<double> y_guess = {}) const;
  void unstable_coeffs(const Field& v, double t, const std::vector<double>& y,
                       std::vector<double>& a_plus, std::vector<double>& a_minus) const;

  /// Gram matrix P = [[A, g A], [g A, A]] with A = diag(||Z~_j||^2) and
  /// g = int Z+ Z-: the Jacobian of b -> (a+, a-) at b = 0 for separated solitons.
  Eigen::MatrixXd gram_P() const;
  /// Central finite-difference Jacobian of b -> (a+, a-) at b = 0.
  Eigen::MatrixXd final_data_jacobian(double Sn, double h = 1e-6) const;
  /// (a+, a-) of decompose(R(Sn) + sum b Z(Sn)).
  Eigen::VectorXd final_map(const Eigen::VectorXd& b, double Sn) const;
  Field final_field(const Eigen::VectorXd& b, double Sn) const;
  /// Solves for b with a+(Sn) = a_hat and a-(Sn) = 0 by Broyden iteration
  /// started from the Jacobian P.
  FinalData final_data(const std::vector<double>& a_hat, double Sn,
                       const FinalDataOptions& opts = {}) const;

 private:
  Field shifted(const CVec& centered, double s, int deriv) const;

  SolitonEnsemble ens_;
  Grid1D grid_;
  ModulationOptions opts_;
  double eps_;
  double e0_;
  double gram_;
  std::vector<CVec> q_hat_;
  std::vector<double> q_extent_;
  std::vector<ScaledDual> duals_;
  std::vector<double> dual_norm2_;
};

/// One-shot wrappers around Modulator.
ModulationState decompose(const Field& u, const SolitonEnsemble& ens, double t,
                          const std::vector<double>& y_guess, const EdgeSpectrum& spectrum,
                          const ModulationOptions& opts = {});
FinalData final_data(const std::vector<double>& a_hat, const SolitonEnsemble& ens, double Sn,
                     const EdgeSpectrum& spectrum, const Grid1D& grid,
                     const FinalDataOptions& opts = {});

}  // namespace gkdv
