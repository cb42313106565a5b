#pragma once

#include <cstddef>
#include <functional>
#include <memory>

#include "gkdv/aligned.hpp"
#include "gkdv/fft.hpp"

namespace gkdv {

/// Periodic grid on [-L/2, L/2) with n equispaced nodes (n a power of two, n >= 16).
class Grid1D {
 public:
  Grid1D(double length, std::size_t n);

  double length() const { return length_; }
  std::size_t size() const { return n_; }
  double dx() const { return length_ / static_cast<double>(n_); }
  double x(std::size_t i) const { return -0.5 * length_ + static_cast<double>(i) * dx(); }
  RVec nodes() const;

  /// Number of r2c coefficients, n/2 + 1.
  std::size_t spectral_size() const { return n_ / 2 + 1; }
  /// k_m = 2 pi m / L for m = 0..n/2 (the r2c half spectrum).
  double wavenumber(std::size_t m) const;
  double k1() const;
  const RealFft& fft() const { return *fft_; }

  bool operator==(const Grid1D& o) const { return length_ == o.length_ && n_ == o.n_; }
  bool operator!=(const Grid1D& o) const { return !(*this == o); }

 private:
  double length_;
  std::size_t n_;
  std::shared_ptr<const RealFft> fft_;
};

/// Real grid function. Values are always finite.
class Field {
 public:
  explicit Field(const Grid1D& grid);
  Field(const Grid1D& grid, RVec values);
  static Field from_function(const Grid1D& grid, const std::function<double(double)>& f);
  /// Inverse of spectrum(): coefficients are the unnormalized r2c transform.
  static Field from_spectrum(const Grid1D& grid, const CVec& coeffs);

  const Grid1D& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  const RVec& values() const { return values_; }
  RVec& mutable_values() { return values_; }
  const double* data() const { return values_.data(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double max_abs() const;
  bool all_finite() const;

  /// Unnormalized r2c coefficients (n/2 + 1 of them).
  CVec spectrum() const;

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(double s);
  /// this += s * o
  Field& axpy(double s, const Field& o);

 private:
  Grid1D grid_;
  RVec values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);
/// Pointwise product.
Field hadamard(const Field& a, const Field& b);

void require_same_grid(const Field& a, const Field& b);

/// Spectral derivative of order 1..4. The Nyquist mode is dropped for odd orders.
Field derivative(const Field& f, int order);
/// Applies the multiplier (i k)^order to r2c coefficients in place.
void apply_derivative(const Grid1D& grid, CVec& coeffs, int order);

/// Rectangle-rule quadrature sum_i f_i g_i dx.
double inner_l2(const Field& f, const Field& g);
double norm_l2(const Field& f);
double norm_h1(const Field& f);
double inner_h1(const Field& f, const Field& g);
/// The L2 inner product evaluated from spectral coefficients (Parseval).
double spectral_inner_l2(const Field& f, const Field& g);

/// f(x - s) by Fourier phase shift.
Field shift(const Field& f, double s);
/// Multiplies r2c coefficients by e^{-i k s}, i.e. translates by s.
void apply_shift(const Grid1D& grid, CVec& coeffs, double s);
/// f(-x); exact on the grid since x_{n-i} = -x_i modulo L.
Field reflect(const Field& f);

/// Evaluates the trigonometric interpolant of f at arbitrary points.
/// Points outside [-L/2, L/2] return 0 (callers use this for decaying profiles).
RVec interpolate(const Field& f, const RVec& points);
/// g(x) = amplitude * f(scale * (x - center)) sampled on target.
Field resample(const Field& f, const Grid1D& target, double scale = 1.0, double center = 0.0,
               double amplitude = 1.0);

/// max |f_hat_m| over m > n/3 relative to max |f_hat|; 0 for the zero field.
double spectral_tail(const Field& f);

}  // namespace gkdv
