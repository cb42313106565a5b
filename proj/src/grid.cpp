#include "gkdv/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gkdv/error.hpp"
#include "gkdv/simd.hpp"

namespace gkdv {

Grid1D::Grid1D(double length, std::size_t n) : length_(length), n_(n) {
  if (!(length > 0.0) || !std::isfinite(length)) throw GridError("grid length must be positive");
  if (n < 16) throw GridError("grid needs at least 16 nodes");
  if ((n & (n - 1)) != 0) throw GridError("grid size must be a power of two");
  fft_ = RealFft::get(n);
}

RVec Grid1D::nodes() const {
  RVec xs(n_);
  for (std::size_t i = 0; i < n_; ++i) xs[i] = x(i);
  return xs;
}

double Grid1D::k1() const { return 2.0 * std::numbers::pi / length_; }

double Grid1D::wavenumber(std::size_t m) const { return k1() * static_cast<double>(m); }

Field::Field(const Grid1D& grid) : grid_(grid), values_(grid.size(), 0.0) {}

Field::Field(const Grid1D& grid, RVec values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw GridError("field length does not match grid");
  if (!all_finite()) throw DomainError("field has non-finite values");
}

Field Field::from_function(const Grid1D& grid, const std::function<double(double)>& f) {
  RVec v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) v[i] = f(grid.x(i));
  return Field(grid, std::move(v));
}

Field Field::from_spectrum(const Grid1D& grid, const CVec& coeffs) {
  RVec v;
  grid.fft().inverse(coeffs, v);
  const double s = 1.0 / static_cast<double>(grid.size());
  for (double& x : v) x *= s;
  return Field(grid, std::move(v));
}

double Field::max_abs() const {
  double m = 0.0;
  for (double x : values_) m = std::max(m, std::abs(x));
  return m;
}

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

CVec Field::spectrum() const {
  CVec c;
  grid_.fft().forward(values_, c);
  return c;
}

Field& Field::operator+=(const Field& o) {
  require_same_grid(*this, o);
  simd::active().axpy(1.0, o.data(), values_.data(), size());
  return *this;
}

Field& Field::operator-=(const Field& o) {
  require_same_grid(*this, o);
  simd::active().axpy(-1.0, o.data(), values_.data(), size());
  return *this;
}

Field& Field::operator*=(double s) {
  for (double& x : values_) x *= s;
  return *this;
}

Field& Field::axpy(double s, const Field& o) {
  require_same_grid(*this, o);
  simd::active().axpy(s, o.data(), values_.data(), size());
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

Field hadamard(const Field& a, const Field& b) {
  require_same_grid(a, b);
  RVec v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] * b[i];
  return Field(a.grid(), std::move(v));
}

void require_same_grid(const Field& a, const Field& b) {
  if (a.grid() != b.grid()) throw GridError("fields live on different grids");
}

void apply_derivative(const Grid1D& grid, CVec& coeffs, int order) {
  if (order < 1 || order > 4) throw DomainError("derivative order must be in 1..4");
  const std::size_t nyq = grid.size() / 2;
  for (std::size_t m = 0; m < coeffs.size(); ++m) {
    const double k = grid.wavenumber(m);
    cplx mult;
    switch (order) {
      case 1: mult = cplx(0.0, k); break;
      case 2: mult = cplx(-k * k, 0.0); break;
      case 3: mult = cplx(0.0, -k * k * k); break;
      default: mult = cplx(k * k * k * k, 0.0); break;
    }
    coeffs[m] *= mult;
  }
  if (order % 2 == 1 && coeffs.size() > nyq) coeffs[nyq] = 0.0;
}

Field derivative(const Field& f, int order) {
  if (order < 1 || order > 4) throw DomainError("derivative order must be in 1..4");
  CVec c = f.spectrum();
  apply_derivative(f.grid(), c, order);
  return Field::from_spectrum(f.grid(), c);
}

double inner_l2(const Field& f, const Field& g) {
  require_same_grid(f, g);
  return simd::active().dot(f.data(), g.data(), f.size()) * f.grid().dx();
}

double norm_l2(const Field& f) { return std::sqrt(inner_l2(f, f)); }

double inner_h1(const Field& f, const Field& g) {
  return inner_l2(f, g) + inner_l2(derivative(f, 1), derivative(g, 1));
}

double norm_h1(const Field& f) {
  const Field fx = derivative(f, 1);
  return std::sqrt(inner_l2(f, f) + inner_l2(fx, fx));
}

double spectral_inner_l2(const Field& f, const Field& g) {
  require_same_grid(f, g);
  const CVec a = f.spectrum();
  const CVec b = g.spectrum();
  const std::size_t last = a.size() - 1;
  double s = (a[0] * std::conj(b[0])).real() + (a[last] * std::conj(b[last])).real();
  for (std::size_t m = 1; m < last; ++m) s += 2.0 * (a[m] * std::conj(b[m])).real();
  return s / static_cast<double>(f.size()) * f.grid().dx();
}

void apply_shift(const Grid1D& grid, CVec& coeffs, double s) {
  const double k1 = grid.k1();
  const std::size_t nyq = grid.size() / 2;
  for (std::size_t m = 0; m < coeffs.size(); ++m) {
    const double a = -k1 * static_cast<double>(m) * s;
    coeffs[m] *= cplx(std::cos(a), std::sin(a));
  }
  // A shifted Nyquist mode is no longer representable as a real sample set.
  if (coeffs.size() > nyq) coeffs[nyq] = cplx(coeffs[nyq].real(), 0.0);
}

Field shift(const Field& f, double s) {
  CVec c = f.spectrum();
  apply_shift(f.grid(), c, s);
  return Field::from_spectrum(f.grid(), c);
}

Field reflect(const Field& f) {
  const std::size_t n = f.size();
  RVec v(n);
  v[0] = f[0];
  for (std::size_t i = 1; i < n; ++i) v[i] = f[n - i];
  return Field(f.grid(), std::move(v));
}

RVec interpolate(const Field& f, const RVec& points) {
  const Grid1D& g = f.grid();
  const CVec c = f.spectrum();
  const double half = 0.5 * g.length();
  RVec theta;
  std::vector<std::size_t> idx;
  theta.reserve(points.size());
  for (std::size_t j = 0; j < points.size(); ++j) {
    if (points[j] >= -half && points[j] <= half) {
      theta.push_back(points[j] + half);
      idx.push_back(j);
    }
  }
  RVec inside(theta.size());
  simd::active().fourier_eval(c.data(), c.size(), g.k1(), 1.0 / static_cast<double>(g.size()),
                              theta.data(), inside.data(), theta.size());
  RVec out(points.size(), 0.0);
  for (std::size_t j = 0; j < idx.size(); ++j) out[idx[j]] = inside[j];
  return out;
}

Field resample(const Field& f, const Grid1D& target, double scale, double center,
               double amplitude) {
  RVec pts(target.size());
  for (std::size_t i = 0; i < target.size(); ++i) pts[i] = scale * (target.x(i) - center);
  RVec v = interpolate(f, pts);
  for (double& x : v) x *= amplitude;
  return Field(target, std::move(v));
}

double spectral_tail(const Field& f) {
  const CVec c = f.spectrum();
  double peak = 0.0;
  double tail = 0.0;
  const std::size_t cut = f.size() / 3;
  for (std::size_t m = 0; m < c.size(); ++m) {
    const double a = std::abs(c[m]);
    peak = std::max(peak, a);
    if (m > cut) tail = std::max(tail, a);
  }
  return peak > 0.0 ? tail / peak : 0.0;
}

}  // namespace gkdv
