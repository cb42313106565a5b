#pragma once

#include <cstddef>

#include "gkdv/aligned.hpp"

namespace gkdv::simd {

/// Data-parallel inner loops. Every entry has a scalar reference
/// implementation; the AVX2 table must agree with it to rounding.
struct KernelTable {
  const char* name;
  /// sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// sum_i a[i] * b[i] * w[i]
  double (*dot3)(const double* a, const double* b, const double* w, std::size_t n);
  /// y[i] = x[i]^p by binary exponentiation (bitwise identical across tables)
  void (*ipow)(const double* x, double* y, std::size_t n, int p);
  /// out[i] = a[i] * b[i]
  void (*cmul)(const cplx* a, const cplx* b, cplx* out, std::size_t n);
  /// out[i] = a[i] * x[i] + b[i] * y[i]
  void (*cmul_add2)(const cplx* a, const cplx* x, const cplx* b, const cplx* y, cplx* out,
                    std::size_t n);
  /// y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  /// Evaluates the real trigonometric interpolant with r2c coefficients
  /// c[0..nc-1] (nc = n/2 + 1, unnormalized) at phases theta[j]:
  ///   out[j] = scale * Re(c0 + 2 sum_{m=1}^{nc-2} c_m e^{i m k1 theta} + c_{nc-1} e^{i (nc-1) k1 theta})
  void (*fourier_eval)(const cplx* c, std::size_t nc, double k1, double scale,
                       const double* theta, double* out, std::size_t npts);
};

const KernelTable& scalar_table();
/// nullptr when the AVX2 translation unit was not built or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table();
/// The table selected at startup: AVX2 when available, overridable with
/// GKDV_SIMD=scalar|avx2.
const KernelTable& active();

}  // namespace gkdv::simd
