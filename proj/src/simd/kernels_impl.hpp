#pragma once

// Scalar building blocks shared by both kernel tables so that the vector
// code falls back to exactly the same arithmetic on loop tails.

#include <cmath>

#include "gkdv/aligned.hpp"

namespace gkdv::simd::detail {

inline constexpr std::size_t kAnchorEvery = 64;

inline double ipow1(double x, int p) {
  double result = 1.0;
  double base = x;
  bool first = true;
  while (p > 0) {
    if (p & 1) {
      result = first ? base : result * base;
      first = false;
    }
    p >>= 1;
    if (p > 0) base = base * base;
  }
  return result;
}

inline cplx cmul1(cplx a, cplx b) {
  const double re = a.real() * b.real() - a.imag() * b.imag();
  const double im = a.real() * b.imag() + a.imag() * b.real();
  return {re, im};
}

/// One point of the trigonometric interpolant (see KernelTable::fourier_eval).
/// The rotation e^{i m k1 theta} is advanced by complex multiplication and
/// re-anchored with cos/sin every kAnchorEvery terms.
inline double fourier_point(const cplx* c, std::size_t nc, double k1, double theta) {
  const double ph = k1 * theta;
  const double wr = std::cos(ph);
  const double wi = std::sin(ph);
  double acc = c[0].real();
  double zr = 1.0;
  double zi = 0.0;
  const std::size_t last = nc - 1;
  for (std::size_t m = 1; m <= last; ++m) {
    if (m % kAnchorEvery == 0) {
      const double a = static_cast<double>(m) * ph;
      zr = std::cos(a);
      zi = std::sin(a);
    } else {
      const double nr = zr * wr - zi * wi;
      const double ni = zr * wi + zi * wr;
      zr = nr;
      zi = ni;
    }
    const double term = c[m].real() * zr - c[m].imag() * zi;
    acc += (m == last ? 1.0 : 2.0) * term;
  }
  return acc;
}

}  // namespace gkdv::simd::detail
