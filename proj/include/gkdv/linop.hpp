#pragma once

#include <string>

#include "gkdv/error.hpp"
#include "gkdv/grid.hpp"

namespace gkdv {

/// p Q_c^{p-1}(x - center).
Field potential(int p, double c, const Grid1D& grid, double center = 0.0);

/// L_c v = -v_xx - p Q_c^{p-1}(. - center) v + c v.
Field apply_L(const Field& v, int p, double c = 1.0, double center = 0.0);
/// L_c v with a precomputed potential p Q_c^{p-1}.
Field apply_L(const Field& v, const Field& pot, double c);

/// Eigenvalue of L on Q^{(p+1)/2} from substituting Q'' = Q - Q^p and
/// (Q')^2 = Q^2 - 2/(p+1) Q^{p+1}: mu0 = 1 - ((p+1)/2)^2.
double mu0_symbolic(int p);

struct EdgeOptions {
  double dense_length = 64.0;      ///< domain of the dense eigensolve
  std::size_t dense_n = 1024;      ///< nodes of the dense eigensolve
  double min_eigenvalue = 1e-4;    ///< smaller real parts are treated as kernel splitting
  double imag_tol = 1e-10;         ///< |Im| allowed for a real eigenvalue
  double mass_radius = 20.0;       ///< spurious-mode filter radius
  double mass_fraction = 0.999;    ///< required mass fraction inside the radius
  double convergence_tol = 1e-6;   ///< relative e0 change between n and 2n
  bool check_convergence = true;
  double newton_tol = 1e-12;       ///< relative eigen-residual target of the refinement
  double eta_window_lo = 1e-10;    ///< tail window of the decay-rate fit
  double eta_window_hi = 1e-4;
};

struct EdgeResiduals {
  double eigen_plus = 0.0;   ///< ||(L Y+)_x - e0 Y+|| / ||Y+||
  double eigen_minus = 0.0;  ///< ||(L Y-)_x + e0 Y-|| / ||Y-||
  double e0_dense = 0.0;     ///< eigenvalue from the dense stage
  double e0_fine = 0.0;      ///< eigenvalue refined on the doubled grid
  double eta_left = 0.0;     ///< fitted decay rate of the x < 0 tail of Z+
  double eta_right = 0.0;    ///< fitted decay rate of the x > 0 tail of Z+
  double z_consistency = 0.0;  ///< max ||Z - L Y|| after the L d_x refinement of Z
};

/// Edge eigenstructure of the linearized operator at c = 1:
/// (L Y+-)_x = +-e0 Y+-, Z+- = L Y+- with ||Z+-|| = 1, Y+ positive at its
/// largest-magnitude node, and eta0 the slowest tail decay rate of Z+.
struct EdgeSpectrum {
  int p = 0;
  double e0 = 0.0;
  double eta0 = 0.0;
  Field Yplus, Yminus, Zplus, Zminus;
  EdgeResiduals residuals;

  const Grid1D& grid() const { return Zplus.grid(); }
};

/// Thrown when no admissible positive real eigenvalue exists (subcritical p
/// or an unresolved grid).
class NoEdgeEigenvalue : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Dense nonsymmetric eigensolve on a coarse grid, then Newton refinement of
/// each eigenpair on `grid` and on its doubling for the convergence check.
EdgeSpectrum edge_eigenpair(int p, const Grid1D& grid, const EdgeOptions& opts = {});

struct DualResiduals {
  double r_plus;   ///< ||L(Z+_x) - e0 Z+||
  double r_minus;  ///< ||L(Z-_x) + e0 Z-||
  double ortho;    ///< max |int Q_x Z+-|
  double gram;     ///< int Z+ Z-
  double gram_det; ///< 1 - gram^2
};
DualResiduals dual_residuals(const EdgeSpectrum& spec);

/// ||(L Y)_x - sign e0 Y|| / ||Y|| for Y = Y+ (sign = +1) or Y- (sign = -1).
double eigen_residual(const EdgeSpectrum& spec, int sign);

/// Least-squares decay rates of log|z| on each side of its peak over nodes
/// where |z| / max|z| lies in [lo, hi] (through the local maxima when the tail oscillates).
struct TailFit {
  double left;   ///< rate of the x -> -infinity tail (0 if not enough points)
  double right;  ///< rate of the x -> +infinity tail
  double rate() const;
};
TailFit fit_tail_decay(const Field& z, double lo, double hi);

/// Scaled and translated dual eigenfunctions attached to a soliton of speed c:
/// c^{1/(p-1)} Z+-(sqrt(c)(x - center)), with L_c d_x eigenvalue +-e0 c^{3/2}.
class ScaledDual {
 public:
  ScaledDual(const EdgeSpectrum& base, double c, const Grid1D& grid,
             double wrap_tol = 1e-12);

  double c() const { return c_; }
  double eigenvalue() const { return eigenvalue_; }
  const Grid1D& grid() const { return plus_.grid(); }
  /// Profile centered at x = 0.
  const Field& centered(int sign) const { return sign > 0 ? plus_ : minus_; }
  const CVec& centered_spectrum(int sign) const { return sign > 0 ? plus_hat_ : minus_hat_; }
  /// Profile centered at `center`; throws DomainError outside the safe region.
  Field at(double center, int sign) const;
  /// Throws DomainError when a profile centered at `center` would wrap.
  void check_center(double center) const;
  double extent_left() const { return extent_left_; }
  double extent_right() const { return extent_right_; }

 private:
  double c_;
  double eigenvalue_;
  Field plus_, minus_;
  CVec plus_hat_, minus_hat_;
  double extent_left_ = 0.0;
  double extent_right_ = 0.0;
};

/// Z~+-(x) = c^{1/(p-1)} Z+-(sqrt(c)(x - c t - x0)) on grid.
Field scaled_dual(const EdgeSpectrum& spec, double c, double x0, double t, const Grid1D& grid,
                  int sign);

}  // namespace gkdv
