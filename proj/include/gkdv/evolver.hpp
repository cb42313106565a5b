#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "gkdv/grid.hpp"

namespace gkdv {

struct EvolveOptions {
  double dt = 1e-2;               ///< upper bound on |dt|; the step is min(cfl rule, dt)
  double cfl = 0.1;               ///< dt <= cfl * dx / max|u0|^{(p-1)/2}
  double tol_mass = 1e-10;        ///< relative mass drift budget
  double tol_energy = 1e-9;       ///< relative energy drift budget
  bool check_conservation = true;
  bool dealias = true;            ///< zero-pad by (p+1)/2 for the nonlinear term
  double tail_guard = 1e-10;      ///< spectral-tail limit when dealias is off, and for u0
  std::size_t max_steps = 100'000'000;
  double h1_ceiling = 1e3;        ///< ||u||_{H1} above this is reported as blow-up
  std::size_t sample_every = 0;   ///< keep every k-th step in the trajectory (0: endpoints)
  std::size_t observe_every = 0;  ///< observer cadence in steps (0: never)
};

struct Sample {
  double t;
  Field u;
  double mass;
  double energy;
};

struct Trajectory {
  std::vector<Sample> samples;  ///< times strictly monotone in the direction of integration
  double dt = 0.0;              ///< signed step actually used
  std::size_t steps = 0;
  double max_mass_drift = 0.0;    ///< relative, over checked times
  double max_energy_drift = 0.0;  ///< relative, over checked times
  bool stopped_early = false;     ///< the observer asked to stop
};

/// Called every observe_every steps (and at the start) with the current
/// state; returning false stops the integration.
using Observer = std::function<bool(std::size_t step, double t, const Field& u)>;

/// Fixed-step ETDRK4 for u_t + (u_xx + u^p)_x = 0 on the periodic grid:
/// the dispersive term is integrated exactly in Fourier space, the
/// nonlinear term -ik FFT(u^p) by the four-stage exponential scheme. A
/// negative step integrates backward.
class Etdrk4 {
 public:
  Etdrk4(const Grid1D& grid, int p, double h, bool dealias);

  double h() const { return h_; }
  const Grid1D& grid() const { return grid_; }
  /// Advances the unnormalized r2c coefficients by one step.
  void step(CVec& uh);
  /// -ik FFT(u^p) in the same normalization as uh.
  void nonlinear(const CVec& uh, CVec& out);

 private:
  Grid1D grid_;
  int p_;
  double h_;
  std::size_t m_;  // physical length of the (padded) product grid
  std::shared_ptr<const RealFft> fft_m_;
  CVec e_, e2_, q_, f1_, f2_, f3_;
  std::vector<double> k_;
  CVec nv_, na_, nb_, nc_, a_, b_, c_, tmp_, pad_;
  RVec phys_, pow_;
};

/// Signed step used by evolve(): |t1 - t0| divided into equal steps of size
/// at most min(cfl * dx / max|u0|^{(p-1)/2}, opts.dt).
double choose_step(const Field& u0, int p, double t0, double t1, const EvolveOptions& opts);

/// Integrates from t0 to t1 (t1 < t0 integrates backward). Throws
/// EvolutionError on blow-up, NaN or a conservation budget overrun, and
/// DomainError if u0 is not resolved.
Trajectory evolve(const Field& u0, int p, double t0, double t1, const EvolveOptions& opts = {},
                  const Observer& observer = {});

/// Right-hand side of Kato's identity
///   d/dt int u^2 f = -3 int u_x^2 f_x + int u^2 f_xxx + 2p/(p+1) int u^{p+1} f_x.
/// The weight f itself does not enter; it is accepted for grid validation.
double kato_rate(const Field& u, int p, const Field& f, const Field& f_x, const Field& f_xxx);

}  // namespace gkdv
