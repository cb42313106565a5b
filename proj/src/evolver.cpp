#include "gkdv/evolver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gkdv/error.hpp"
#include "gkdv/simd.hpp"
#include "gkdv/soliton.hpp"

namespace gkdv {
namespace {

struct Phi {
  cplx p1, p2, p3;
};

/// phi_1..phi_3 with phi_k(z) = sum_j z^j / (j + k)!; Taylor series near 0,
/// the recurrence phi_{k+1} = (phi_k - 1/k!) / z elsewhere.
Phi phi_functions(cplx z) {
  if (std::abs(z) < 1.0) {
    Phi r{0.0, 0.0, 0.0};
    // 1/(j+1)!, 1/(j+2)!, 1/(j+3)! accumulated together
    cplx zj = 1.0;
    double f1 = 1.0, f2 = 0.5, f3 = 1.0 / 6.0;
    for (int j = 0; j < 30; ++j) {
      r.p1 += zj * f1;
      r.p2 += zj * f2;
      r.p3 += zj * f3;
      zj *= z;
      f1 /= (j + 2);
      f2 /= (j + 3);
      f3 /= (j + 4);
    }
    return r;
  }
  const cplx ez = std::exp(z);
  const cplx p1 = (ez - 1.0) / z;
  const cplx p2 = (p1 - 1.0) / z;
  const cplx p3 = (p2 - 0.5) / z;
  return {p1, p2, p3};
}

std::size_t product_grid_size(std::size_t n, int p, bool dealias) {
  if (!dealias) return n;
  const std::size_t m = (static_cast<std::size_t>(p + 1) * n + 1) / 2;
  return m + (m % 2);
}

double relative_drift(double value, double ref, double scale) {
  const double denom = std::max(std::abs(ref), scale);
  return denom > 0.0 ? std::abs(value - ref) / denom : std::abs(value - ref);
}

}  // namespace

Etdrk4::Etdrk4(const Grid1D& grid, int p, double h, bool dealias)
    : grid_(grid), p_(p), h_(h), m_(product_grid_size(grid.size(), p, dealias)) {
  if (p < 2) throw DomainError("nonlinearity exponent p must be an integer >= 2");
  if (!(h != 0.0) || !std::isfinite(h)) throw DomainError("time step must be finite and nonzero");
  fft_m_ = RealFft::get(m_);
  const std::size_t ns = grid.spectral_size();
  const std::size_t nyq = grid.size() / 2;
  k_.resize(ns);
  e_.resize(ns);
  e2_.resize(ns);
  q_.resize(ns);
  f1_.resize(ns);
  f2_.resize(ns);
  f3_.resize(ns);
  for (std::size_t m = 0; m < ns; ++m) {
    // The Nyquist mode is held at zero throughout.
    k_[m] = m == nyq ? 0.0 : grid.wavenumber(m);
    const cplx z(0.0, h * k_[m] * k_[m] * k_[m]);
    const Phi full = phi_functions(z);
    const Phi half = phi_functions(0.5 * z);
    e_[m] = std::exp(z);
    e2_[m] = std::exp(0.5 * z);
    q_[m] = 0.5 * h * half.p1;
    f1_[m] = h * (full.p1 - 3.0 * full.p2 + 4.0 * full.p3);
    f2_[m] = 2.0 * h * (full.p2 - 2.0 * full.p3);  // stored doubled
    f3_[m] = h * (4.0 * full.p3 - full.p2);
  }
  for (CVec* v : {&nv_, &na_, &nb_, &nc_, &a_, &b_, &c_, &tmp_}) v->assign(ns, 0.0);
  pad_.assign(m_ / 2 + 1, 0.0);
  phys_.assign(m_, 0.0);
  pow_.assign(m_, 0.0);
}

void Etdrk4::nonlinear(const CVec& uh, CVec& out) {
  const std::size_t n = grid_.size();
  const std::size_t nyq = n / 2;
  std::fill(pad_.begin(), pad_.end(), cplx(0.0));
  std::copy(uh.begin(), uh.begin() + static_cast<std::ptrdiff_t>(nyq), pad_.begin());
  fft_m_->inverse(pad_.data(), phys_.data());
  const double inv_n = 1.0 / static_cast<double>(n);
  for (double& x : phys_) x *= inv_n;
  simd::active().ipow(phys_.data(), pow_.data(), m_, p_);
  fft_m_->forward(pow_.data(), pad_.data());
  const double back = static_cast<double>(n) / static_cast<double>(m_);
  out.resize(uh.size());
  for (std::size_t m = 0; m < nyq; ++m) {
    const cplx w = pad_[m] * back;
    out[m] = cplx(k_[m] * w.imag(), -k_[m] * w.real());  // -i k w
  }
  out[nyq] = 0.0;
}

void Etdrk4::step(CVec& uh) {
  const auto& kt = simd::active();
  const std::size_t ns = uh.size();
  nonlinear(uh, nv_);
  kt.cmul_add2(e2_.data(), uh.data(), q_.data(), nv_.data(), a_.data(), ns);
  nonlinear(a_, na_);
  kt.cmul_add2(e2_.data(), uh.data(), q_.data(), na_.data(), b_.data(), ns);
  nonlinear(b_, nb_);
  for (std::size_t m = 0; m < ns; ++m) tmp_[m] = 2.0 * nb_[m] - nv_[m];
  kt.cmul_add2(e2_.data(), a_.data(), q_.data(), tmp_.data(), c_.data(), ns);
  nonlinear(c_, nc_);
  for (std::size_t m = 0; m < ns; ++m) tmp_[m] = na_[m] + nb_[m];
  kt.cmul_add2(e_.data(), uh.data(), f1_.data(), nv_.data(), a_.data(), ns);
  kt.cmul_add2(f2_.data(), tmp_.data(), f3_.data(), nc_.data(), b_.data(), ns);
  for (std::size_t m = 0; m < ns; ++m) uh[m] = a_[m] + b_[m];
}

double choose_step(const Field& u0, int p, double t0, double t1, const EvolveOptions& opts) {
  if (!(opts.dt > 0.0)) throw DomainError("time step bound must be positive");
  const double span = t1 - t0;
  if (span == 0.0) return 0.0;
  const double umax = u0.max_abs();
  double h = opts.dt;
  if (umax > 0.0) h = std::min(h, opts.cfl * u0.grid().dx() / std::pow(umax, 0.5 * (p - 1)));
  const double steps = std::ceil(std::abs(span) / h * (1.0 - 1e-14));
  return span / std::max(1.0, steps);
}

Trajectory evolve(const Field& u0, int p, double t0, double t1, const EvolveOptions& opts,
                  const Observer& observer) {
  const Grid1D& grid = u0.grid();
  if (spectral_tail(u0) > opts.tail_guard) {
    throw DomainError("initial data is not resolved on the grid (spectral tail " +
                      std::to_string(spectral_tail(u0)) + ")");
  }
  Trajectory traj;
  const double h = choose_step(u0, p, t0, t1, opts);
  traj.dt = h;
  const std::size_t nsteps =
      h == 0.0 ? 0 : static_cast<std::size_t>(std::llround((t1 - t0) / h));
  if (nsteps > opts.max_steps) {
    throw DomainError("integration needs " + std::to_string(nsteps) + " steps, above max_steps");
  }

  CVec uh = u0.spectrum();
  uh[grid.size() / 2] = 0.0;
  const Conserved c0 = conserved_quantities(u0, p);
  const Field ux0 = derivative(u0, 1);
  const double energy_scale =
      1e-12 * (0.5 * inner_l2(ux0, ux0) + std::abs(c0.energy) + c0.mass);

  auto check = [&](double t, const Field& u) {
    const Conserved cq = conserved_quantities(u, p);
    const double dm = relative_drift(cq.mass, c0.mass, 0.0);
    const double de = relative_drift(cq.energy, c0.energy, energy_scale);
    traj.max_mass_drift = std::max(traj.max_mass_drift, dm);
    traj.max_energy_drift = std::max(traj.max_energy_drift, de);
    if (norm_h1(u) > opts.h1_ceiling) {
      throw EvolutionError("blow-up: H1 norm above ceiling at t = " + std::to_string(t), t);
    }
    if (!opts.dealias && spectral_tail(u) > opts.tail_guard) {
      throw EvolutionError("spectral tail above guard at t = " + std::to_string(t), t);
    }
    if (opts.check_conservation && (dm > opts.tol_mass || de > opts.tol_energy)) {
      throw EvolutionError("conservation drift exceeded at t = " + std::to_string(t) +
                               " (mass " + std::to_string(dm) + ", energy " +
                               std::to_string(de) + ")",
                           t);
    }
    return cq;
  };

  traj.samples.push_back({t0, u0, c0.mass, c0.energy});
  if (observer && !observer(0, t0, u0)) {
    traj.stopped_early = true;
    return traj;
  }
  if (nsteps == 0) return traj;

  Etdrk4 stepper(grid, p, h, opts.dealias);
  for (std::size_t s = 1; s <= nsteps; ++s) {
    stepper.step(uh);
    const double t = s == nsteps ? t1 : t0 + static_cast<double>(s) * h;
    for (const cplx& v : uh) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw EvolutionError("non-finite values at t = " + std::to_string(t), t);
      }
    }
    const bool sample = s == nsteps || (opts.sample_every > 0 && s % opts.sample_every == 0);
    const bool observe = observer && opts.observe_every > 0 && s % opts.observe_every == 0;
    if (!sample && !observe) continue;
    Field u = Field::from_spectrum(grid, uh);
    const Conserved cq = check(t, u);
    traj.steps = s;
    if (sample) traj.samples.push_back({t, u, cq.mass, cq.energy});
    if (observe && !observer(s, t, u)) {
      traj.stopped_early = true;
      if (!sample) traj.samples.push_back({t, std::move(u), cq.mass, cq.energy});
      return traj;
    }
  }
  traj.steps = nsteps;
  return traj;
}

double kato_rate(const Field& u, int p, const Field& f, const Field& f_x, const Field& f_xxx) {
  require_same_grid(u, f);
  require_same_grid(u, f_x);
  require_same_grid(u, f_xxx);
  const auto& kt = simd::active();
  const std::size_t n = u.size();
  const double dx = u.grid().dx();
  const Field ux = derivative(u, 1);
  RVec up(n);
  kt.ipow(u.data(), up.data(), n, p + 1);
  const double t1 = kt.dot3(ux.data(), ux.data(), f_x.data(), n) * dx;
  const double t2 = kt.dot3(u.data(), u.data(), f_xxx.data(), n) * dx;
  const double t3 = kt.dot(up.data(), f_x.data(), n) * dx;
  return -3.0 * t1 + t2 + (2.0 * p / (p + 1.0)) * t3;
}

}  // namespace gkdv
