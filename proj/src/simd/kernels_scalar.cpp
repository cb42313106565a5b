#include <cmath>

#include "gkdv/simd.hpp"
#include "kernels_impl.hpp"

namespace gkdv::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  // Four partial sums in the same lane order as the vector kernel.
  double s[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (int l = 0; l < 4; ++l) s[l] += a[i + l] * b[i + l];
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return ((s[0] + s[1]) + (s[2] + s[3])) + tail;
}

double dot3_scalar(const double* a, const double* b, const double* w, std::size_t n) {
  double s[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (int l = 0; l < 4; ++l) s[l] += a[i + l] * b[i + l] * w[i + l];
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i] * b[i] * w[i];
  return ((s[0] + s[1]) + (s[2] + s[3])) + tail;
}

void ipow_scalar(const double* x, double* y, std::size_t n, int p) {
  for (std::size_t i = 0; i < n; ++i) y[i] = detail::ipow1(x[i], p);
}

void cmul_scalar(const cplx* a, const cplx* b, cplx* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = detail::cmul1(a[i], b[i]);
}

void cmul_add2_scalar(const cplx* a, const cplx* x, const cplx* b, const cplx* y, cplx* out,
                      std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const cplx u = detail::cmul1(a[i], x[i]);
    const cplx v = detail::cmul1(b[i], y[i]);
    out[i] = cplx(u.real() + v.real(), u.imag() + v.imag());
  }
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void fourier_eval_scalar(const cplx* c, std::size_t nc, double k1, double scale,
                         const double* theta, double* out, std::size_t npts) {
  for (std::size_t j = 0; j < npts; ++j) {
    out[j] = scale * detail::fourier_point(c, nc, k1, theta[j]);
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{"scalar",       dot_scalar,  dot3_scalar,
                                 ipow_scalar,    cmul_scalar, cmul_add2_scalar,
                                 axpy_scalar,    fourier_eval_scalar};
  return table;
}

}  // namespace gkdv::simd
