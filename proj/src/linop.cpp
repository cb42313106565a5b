#include "gkdv/linop.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gkdv/dense.hpp"
#include "gkdv/krylov.hpp"
#include "gkdv/simd.hpp"
#include "gkdv/soliton.hpp"

namespace gkdv {
namespace {

/// d_x L (whose eigenfunctions are Y+-) or L d_x (whose eigenfunctions are
/// Z+-) on a fixed grid, applied through FFTs.
class EdgeOperator {
 public:
  enum class Kind { DxL, LDx };

  EdgeOperator(int p, const Grid1D& grid, Kind kind)
      : grid_(grid), pot_(potential(p, 1.0, grid)), kind_(kind) {}

  const Grid1D& grid() const { return grid_; }

  void apply(const double* in, double* out) const {
    const std::size_t n = grid_.size();
    const double s = 1.0 / static_cast<double>(n);
    RVec u(in, in + n);
    CVec uh;
    grid_.fft().forward(u, uh);
    if (kind_ == Kind::LDx) {
      apply_derivative(grid_, uh, 1);
      grid_.fft().inverse(uh, u);
      for (double& x : u) x *= s;
    }
    // (-d_xx + 1) u - V u
    CVec lh = uh;
    for (std::size_t m = 0; m < lh.size(); ++m) {
      const double k = grid_.wavenumber(m);
      lh[m] *= (k * k + 1.0);
    }
    RVec pu(n);
    for (std::size_t i = 0; i < n; ++i) pu[i] = pot_[i] * u[i];
    CVec ph;
    grid_.fft().forward(pu, ph);
    for (std::size_t m = 0; m < lh.size(); ++m) lh[m] -= ph[m];
    if (kind_ == Kind::DxL) apply_derivative(grid_, lh, 1);
    RVec r;
    grid_.fft().inverse(lh, r);
    for (std::size_t i = 0; i < n; ++i) out[i] = r[i] * s;
  }

  Field apply(const Field& f) const {
    RVec out(grid_.size());
    apply(f.data(), out.data());
    return Field(grid_, std::move(out));
  }

 private:
  Grid1D grid_;
  Field pot_;
  Kind kind_;
};

struct Candidate {
  double value;
  Field vector;
};

double mass_fraction_inside(const Field& f, double radius) {
  double inside = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double w = f[i] * f[i];
    total += w;
    if (std::abs(f.grid().x(i)) <= radius) inside += w;
  }
  return total > 0.0 ? inside / total : 0.0;
}

/// Largest (sign = +1) or most negative (sign = -1) real eigenvalue of the
/// dense d_x L with a localized eigenvector.
Candidate dense_edge(const EdgeOperator& op, const dense::EigenDecomposition& eig, int sign,
                     const EdgeOptions& opts) {
  const Grid1D& g = op.grid();
  std::vector<Eigen::Index> order;
  for (Eigen::Index j = 0; j < eig.values.size(); ++j) {
    const cplx lam = eig.values(j);
    if (std::abs(lam.imag()) <= opts.imag_tol && sign * lam.real() > opts.min_eigenvalue) {
      order.push_back(j);
    }
  }
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return sign * eig.values(a).real() > sign * eig.values(b).real();
  });
  for (Eigen::Index j : order) {
    RVec v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = eig.vectors(static_cast<Eigen::Index>(i), j).real();
    Field f(g, std::move(v));
    if (mass_fraction_inside(f, opts.mass_radius) >= opts.mass_fraction) {
      return {eig.values(j).real(), std::move(f)};
    }
  }
  throw NoEdgeEigenvalue("no positive real eigenvalue of d_x L with a localized eigenvector");
}

/// Newton iteration on (A - e) Y = 0, <l, Y> = 1 with the bordered Jacobian
/// [[A - e, -Y], [l^T, 0]] solved by right-preconditioned GMRES.
Candidate refine(int p, const Grid1D& grid, EdgeOperator::Kind kind, const Field& guess,
                 double e_guess, const EdgeOptions& opts) {
  const EdgeOperator op(p, grid, kind);
  const std::size_t n = grid.size();
  const double dx = grid.dx();
  Field y = guess;
  y *= 1.0 / norm_l2(y);
  const Field ell = y;  // <l, Y> = dx sum ell_i Y_i, equal to 1 at the guess
  double e = e_guess;

  // Wavenumbers of d_x with the Nyquist mode dropped, for the preconditioner.
  std::vector<double> kk(grid.spectral_size());
  for (std::size_t m = 0; m < kk.size(); ++m) kk[m] = m == n / 2 ? 0.0 : grid.wavenumber(m);

  for (int it = 0; it < 40; ++it) {
    const Field ay = op.apply(y);
    Field r1 = ay;
    r1.axpy(-e, y);
    const double r2 = inner_l2(ell, y) - 1.0;
    const double rel = norm_l2(r1) / norm_l2(y);
    if (rel <= opts.newton_tol && std::abs(r2) <= 1e-14) break;

    const Eigen::Index nn = static_cast<Eigen::Index>(n);
    LinearMap jac = [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
      out.resize(nn + 1);
      op.apply(in.data(), out.data());
      for (Eigen::Index i = 0; i < nn; ++i) out(i) -= e * in(i) + in(nn) * y[static_cast<std::size_t>(i)];
      double s = 0.0;
      for (Eigen::Index i = 0; i < nn; ++i) s += ell[static_cast<std::size_t>(i)] * in(i);
      out(nn) = s * dx;
    };
    LinearMap prec = [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
      out.resize(nn + 1);
      RVec u(in.data(), in.data() + nn);
      CVec uh;
      grid.fft().forward(u, uh);
      for (std::size_t m = 0; m < uh.size(); ++m) {
        // inverse symbol of d_x(-d_xx + 1) - e, shared by both operator kinds
        uh[m] /= cplx(-e, kk[m] * (kk[m] * kk[m] + 1.0));
      }
      RVec r;
      grid.fft().inverse(uh, r);
      const double s = 1.0 / static_cast<double>(n);
      for (Eigen::Index i = 0; i < nn; ++i) out(i) = r[static_cast<std::size_t>(i)] * s;
      out(nn) = in(nn);
    };
    Eigen::VectorXd rhs(nn + 1);
    for (Eigen::Index i = 0; i < nn; ++i) rhs(i) = -r1[static_cast<std::size_t>(i)];
    rhs(nn) = -r2;
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(nn + 1);
    GmresOptions gopts;
    gopts.rel_tol = 1e-13;
    gmres(jac, prec, rhs, delta, gopts);
    RVec dy(delta.data(), delta.data() + nn);
    y.axpy(1.0, Field(grid, std::move(dy)));
    e += delta(nn);
    if (std::abs(delta(nn)) <= 1e-16 * std::abs(e) && rel <= 1e3 * opts.newton_tol) break;
  }
  return {e, std::move(y)};
}

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Scales Y so that ||L Y|| = 1 and Y is positive at its largest-magnitude node.
double normalize(int p, Field& y) {
  const double s = 1.0 / norm_l2(apply_L(y, p));
  std::size_t imax = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (std::abs(y[i]) > std::abs(y[imax])) imax = i;
  }
  const double sign = y[imax] < 0.0 ? -1.0 : 1.0;
  y *= sign * s;
  return sign * s;
}

/// Rescales z to unit norm with the sign of L y; returns ||z - L y||.
double match_dual(int p, const Field& y, Field& z) {
  const Field ly = apply_L(y, p);
  const double s = (inner_l2(z, ly) < 0.0 ? -1.0 : 1.0) / norm_l2(z);
  z *= s;
  return norm_l2(z - ly);
}

}  // namespace

Field potential(int p, double c, const Grid1D& grid, double center) {
  Field q = ground_state(p, c, grid, center);
  RVec v(grid.size());
  simd::active().ipow(q.data(), v.data(), grid.size(), p - 1);
  for (double& x : v) x *= p;
  return Field(grid, std::move(v));
}

Field apply_L(const Field& v, const Field& pot, double c) {
  require_same_grid(v, pot);
  Field out = derivative(v, 2);
  out *= -1.0;
  RVec& o = out.mutable_values();
  for (std::size_t i = 0; i < v.size(); ++i) o[i] += (c - pot[i]) * v[i];
  return out;
}

Field apply_L(const Field& v, int p, double c, double center) {
  return apply_L(v, potential(p, c, v.grid(), center), c);
}

double mu0_symbolic(int p) {
  const double h = 0.5 * (p + 1);
  return 1.0 - h * h;
}

double TailFit::rate() const {
  if (left > 0.0 && right > 0.0) return std::min(left, right);
  return std::max(left, right);
}

namespace {

/// Decay rate of one tail given (x, |z|/peak) ordered from the far end toward
/// the peak. An oscillating tail is fitted through its local maxima, which sit
/// on the exponential envelope; a monotone tail is fitted through all points.
double fit_one_tail(const std::vector<double>& xs, const std::vector<double>& mag, double lo,
                    double hi) {
  std::vector<double> px, py, ax, ay;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (mag[i] < lo || mag[i] > hi) continue;
    ax.push_back(xs[i]);
    ay.push_back(std::log(mag[i]));
    if (i > 0 && i + 1 < xs.size() && mag[i] >= mag[i - 1] && mag[i] >= mag[i + 1]) {
      px.push_back(xs[i]);
      py.push_back(std::log(mag[i]));
    }
  }
  if (px.size() >= 2) return std::abs(fit_slope(px, py));
  if (ax.size() >= 8) return std::abs(fit_slope(ax, ay));
  return 0.0;
}

}  // namespace

TailFit fit_tail_decay(const Field& z, double lo, double hi) {
  const std::size_t n = z.size();
  double peak = 0.0;
  std::size_t imax = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(z[i]) > peak) {
      peak = std::abs(z[i]);
      imax = i;
    }
  }
  TailFit fit{0.0, 0.0};
  if (peak == 0.0) return fit;
  std::vector<double> xs, mag;
  for (std::size_t i = 0; i <= imax; ++i) {
    xs.push_back(z.grid().x(i));
    mag.push_back(std::abs(z[i]) / peak);
  }
  fit.left = fit_one_tail(xs, mag, lo, hi);
  xs.clear();
  mag.clear();
  for (std::size_t i = n; i-- > imax;) {
    xs.push_back(z.grid().x(i));
    mag.push_back(std::abs(z[i]) / peak);
  }
  fit.right = fit_one_tail(xs, mag, lo, hi);
  return fit;
}

EdgeSpectrum edge_eigenpair(int p, const Grid1D& grid, const EdgeOptions& opts) {
  if (p < 2) throw DomainError("nonlinearity exponent p must be an integer >= 2");
  const Grid1D dense_grid(opts.dense_length, opts.dense_n);
  const EdgeOperator dense_op(p, dense_grid, EdgeOperator::Kind::DxL);
  const Eigen::Index nd = static_cast<Eigen::Index>(dense_grid.size());
  Eigen::MatrixXd a(nd, nd);
  {
    RVec unit(dense_grid.size(), 0.0);
    for (Eigen::Index j = 0; j < nd; ++j) {
      unit[static_cast<std::size_t>(j)] = 1.0;
      dense_op.apply(unit.data(), a.col(j).data());
      unit[static_cast<std::size_t>(j)] = 0.0;
    }
  }
  const auto eig = dense::eig_nonsymmetric(std::move(a));
  const Candidate plus0 = dense_edge(dense_op, eig, +1, opts);
  const Candidate minus0 = dense_edge(dense_op, eig, -1, opts);

  constexpr auto kDxL = EdgeOperator::Kind::DxL;
  constexpr auto kLDx = EdgeOperator::Kind::LDx;
  const Candidate plus = refine(p, grid, kDxL, resample(plus0.vector, grid), plus0.value, opts);
  const Candidate minus = refine(p, grid, kDxL, resample(minus0.vector, grid), minus0.value, opts);
  if (!(plus.value > opts.min_eigenvalue)) {
    throw NoEdgeEigenvalue("no positive real eigenvalue after refinement");
  }

  double e_fine = plus.value;
  if (opts.check_convergence) {
    const Grid1D fine(grid.length(), 2 * grid.size());
    e_fine = refine(p, fine, kDxL, resample(plus.vector, fine), plus.value, opts).value;
    if (std::abs(e_fine - plus.value) > opts.convergence_tol * std::abs(plus.value)) {
      throw NumericalError("edge eigenvalue not resolution-converged: " +
                           std::to_string(plus.value) + " vs " + std::to_string(e_fine));
    }
  }

  Field yp = plus.vector, ym = minus.vector;
  const double sp = normalize(p, yp);
  const double sm = normalize(p, ym);
  // Z = L Y loses accuracy at high wavenumbers (a second derivative of a
  // roundoff-level Y tail), so Z is refined as an eigenfunction of L d_x
  // starting from L Y, then rescaled and sign-matched to L Y.
  Field zp = refine(p, grid, kLDx, apply_L(yp, p), plus.value, opts).vector;
  Field zm = refine(p, grid, kLDx, apply_L(ym, p), minus.value, opts).vector;
  const double consistency = std::max(match_dual(p, yp, zp), match_dual(p, ym, zm));
  (void)sp;
  (void)sm;

  const TailFit tail = fit_tail_decay(zp, opts.eta_window_lo, opts.eta_window_hi);
  if (!(tail.rate() > 0.0)) throw NumericalError("could not fit the tail decay rate of Z+");

  EdgeSpectrum spec{p, plus.value, tail.rate(), yp, ym, zp, zm, {}};
  spec.residuals.eigen_plus = eigen_residual(spec, +1);
  spec.residuals.eigen_minus = eigen_residual(spec, -1);
  spec.residuals.e0_dense = plus0.value;
  spec.residuals.e0_fine = e_fine;
  spec.residuals.eta_left = tail.left;
  spec.residuals.eta_right = tail.right;
  spec.residuals.z_consistency = consistency;
  return spec;
}

double eigen_residual(const EdgeSpectrum& spec, int sign) {
  const Field& y = sign > 0 ? spec.Yplus : spec.Yminus;
  Field r = derivative(apply_L(y, spec.p), 1);
  r.axpy(-sign * spec.e0, y);
  return norm_l2(r) / norm_l2(y);
}

DualResiduals dual_residuals(const EdgeSpectrum& spec) {
  const Field pot = potential(spec.p, 1.0, spec.grid());
  Field rp = apply_L(derivative(spec.Zplus, 1), pot, 1.0);
  rp.axpy(-spec.e0, spec.Zplus);
  Field rm = apply_L(derivative(spec.Zminus, 1), pot, 1.0);
  rm.axpy(spec.e0, spec.Zminus);
  const Field qx = derivative(ground_state(spec.p, 1.0, spec.grid(), 0.0), 1);
  const double g = inner_l2(spec.Zplus, spec.Zminus);
  return {norm_l2(rp), norm_l2(rm),
          std::max(std::abs(inner_l2(qx, spec.Zplus)), std::abs(inner_l2(qx, spec.Zminus))), g,
          inner_l2(spec.Zplus, spec.Zplus) * inner_l2(spec.Zminus, spec.Zminus) - g * g};
}

ScaledDual::ScaledDual(const EdgeSpectrum& base, double c, const Grid1D& grid, double wrap_tol)
    : c_(c),
      eigenvalue_(base.e0 * std::pow(c, 1.5)),
      plus_(grid),
      minus_(grid) {
  if (!(c > 0.0)) throw DomainError("speed must be positive");
  if (c == 1.0 && grid == base.grid()) {
    plus_ = base.Zplus;
    minus_ = base.Zminus;
  } else {
    const double amp = std::pow(c, 1.0 / (base.p - 1));
    plus_ = resample(base.Zplus, grid, std::sqrt(c), 0.0, amp);
    minus_ = resample(base.Zminus, grid, std::sqrt(c), 0.0, amp);
  }
  plus_hat_ = plus_.spectrum();
  minus_hat_ = minus_.spectrum();
  const double peak = std::max(plus_.max_abs(), minus_.max_abs());
  for (const Field* f : {&plus_, &minus_}) {
    for (std::size_t i = 0; i < f->size(); ++i) {
      if (std::abs((*f)[i]) >= wrap_tol * peak) {
        const double x = grid.x(i);
        extent_left_ = std::max(extent_left_, -x);
        extent_right_ = std::max(extent_right_, x);
      }
    }
  }
  // The base domain bounds the support of the resampled profile.
  const double reach = 0.5 * base.grid().length() / std::sqrt(c);
  if (extent_left_ >= reach * (1.0 - 1e-12) || extent_right_ >= reach * (1.0 - 1e-12)) {
    throw DomainError("dual eigenfunction tails are not negligible at the base domain boundary");
  }
}

void ScaledDual::check_center(double center) const {
  const double half = 0.5 * grid().length();
  if (center - extent_left_ < -half || center + extent_right_ > half) {
    throw DomainError("dual eigenfunction centered at " + std::to_string(center) +
                      " leaves the safe region");
  }
}

Field ScaledDual::at(double center, int sign) const {
  check_center(center);
  CVec c = centered_spectrum(sign);
  apply_shift(grid(), c, center);
  return Field::from_spectrum(grid(), c);
}

Field scaled_dual(const EdgeSpectrum& spec, double c, double x0, double t, const Grid1D& grid,
                  int sign) {
  return ScaledDual(spec, c, grid).at(c * t + x0, sign);
}

}  // namespace gkdv
