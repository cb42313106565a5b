#pragma once

#include <vector>

#include "gkdv/grid.hpp"

namespace gkdv {

/// Default relative tail level below which a profile counts as negligible
/// at the periodic boundary.
inline constexpr double kWrapTolerance = 1e-12;

struct SolitonParams {
  double c;   ///< speed, > 0
  double x0;  ///< center at t = 0
};

/// Nonlinearity exponent p together with solitons ordered by strictly increasing speed.
class SolitonEnsemble {
 public:
  SolitonEnsemble(int p, std::vector<SolitonParams> params);

  int p() const { return p_; }
  std::size_t size() const { return params_.size(); }
  const std::vector<SolitonParams>& params() const { return params_; }
  const SolitonParams& operator[](std::size_t j) const { return params_[j]; }
  double center(std::size_t j, double t) const { return params_[j].c * t + params_[j].x0; }
  /// Smallest distance between consecutive centers at time t.
  double min_separation(double t) const;

 private:
  int p_;
  std::vector<SolitonParams> params_;
};

/// Q_c(x) = c^{1/(p-1)} Q(sqrt(c) x) with Q(x) = ((p+1)/(2 cosh^2((p-1)x/2)))^{1/(p-1)}.
double ground_state_value(int p, double c, double x);
/// Distance from the center beyond which Q_c < tol * Q_c(0).
double tail_extent(int p, double c, double tol = kWrapTolerance);

/// Q_c(x - center) on the grid. Throws DomainError if the tails wrap.
Field ground_state(int p, double c, const Grid1D& grid, double center,
                   double wrap_tol = kWrapTolerance);
/// R_{c,x0}(t, x) = Q_c(x - c t - x0).
Field soliton_field(int p, const SolitonParams& s, double t, const Grid1D& grid,
                    double wrap_tol = kWrapTolerance);
/// R(t) = sum_j R_j(t). Throws DomainError if consecutive centers are closer than min_sep.
Field ensemble_field(const SolitonEnsemble& ens, double t, const Grid1D& grid,
                     double min_sep = 0.0, double wrap_tol = kWrapTolerance);

struct Conserved {
  double mass;    ///< int u^2
  double energy;  ///< 1/2 int u_x^2 - 1/(p+1) int u^{p+1}
};
Conserved conserved_quantities(const Field& u, int p);

struct Criticality {
  int sign;         ///< sign of d/dc int Q_c^2: +1 subcritical, 0 critical, -1 supercritical
  double exponent;  ///< int Q_c^2 = c^exponent int Q^2
};
/// The mass exponent is (5-p)/(2(p-1)), from x -> sqrt(c) x in int Q_c^2.
Criticality criticality(int p, double c = 1.0);
double mass_scaling_exponent(int p);

}  // namespace gkdv
