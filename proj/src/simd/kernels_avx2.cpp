// Built with -mavx2 -mfma -ffp-contract=off. Only dot and dot3 use FMA;
// the remaining kernels reproduce the scalar table bit for bit.

#include "gkdv/simd.hpp"

#if defined(GKDV_BUILD_AVX2)

#include <immintrin.h>

#include <cmath>

#include "kernels_impl.hpp"

namespace gkdv::simd {
namespace {

double hsum(__m256d v) {
  // ((l0 + l1) + (l2 + l3)), matching the scalar reduction order.
  alignas(32) double l[4];
  _mm256_store_pd(l, v);
  return (l[0] + l[1]) + (l[2] + l[3]);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return hsum(acc) + tail;
}

double dot3_avx2(const double* a, const double* b, const double* w, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d ab = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(ab, _mm256_loadu_pd(w + i), acc);
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i] * b[i] * w[i];
  return hsum(acc) + tail;
}

void ipow_avx2(const double* x, double* y, std::size_t n, int p) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d base = _mm256_loadu_pd(x + i);
    __m256d result = _mm256_set1_pd(1.0);
    bool first = true;
    int q = p;
    while (q > 0) {
      if (q & 1) {
        result = first ? base : _mm256_mul_pd(result, base);
        first = false;
      }
      q >>= 1;
      if (q > 0) base = _mm256_mul_pd(base, base);
    }
    _mm256_storeu_pd(y + i, result);
  }
  for (; i < n; ++i) y[i] = detail::ipow1(x[i], p);
}

inline __m256d cmul2(__m256d a, __m256d b) {
  const __m256d bre = _mm256_movedup_pd(b);
  const __m256d bim = _mm256_permute_pd(b, 0xF);
  const __m256d asw = _mm256_permute_pd(a, 0x5);
  return _mm256_addsub_pd(_mm256_mul_pd(a, bre), _mm256_mul_pd(asw, bim));
}

void cmul_avx2(const cplx* a, const cplx* b, cplx* out, std::size_t n) {
  const double* pa = reinterpret_cast<const double*>(a);
  const double* pb = reinterpret_cast<const double*>(b);
  double* po = reinterpret_cast<double*>(out);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    _mm256_storeu_pd(po + 2 * i, cmul2(_mm256_loadu_pd(pa + 2 * i), _mm256_loadu_pd(pb + 2 * i)));
  }
  for (; i < n; ++i) out[i] = detail::cmul1(a[i], b[i]);
}

void cmul_add2_avx2(const cplx* a, const cplx* x, const cplx* b, const cplx* y, cplx* out,
                    std::size_t n) {
  const double* pa = reinterpret_cast<const double*>(a);
  const double* px = reinterpret_cast<const double*>(x);
  const double* pb = reinterpret_cast<const double*>(b);
  const double* py = reinterpret_cast<const double*>(y);
  double* po = reinterpret_cast<double*>(out);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d u = cmul2(_mm256_loadu_pd(pa + 2 * i), _mm256_loadu_pd(px + 2 * i));
    const __m256d v = cmul2(_mm256_loadu_pd(pb + 2 * i), _mm256_loadu_pd(py + 2 * i));
    _mm256_storeu_pd(po + 2 * i, _mm256_add_pd(u, v));
  }
  for (; i < n; ++i) {
    const cplx u = detail::cmul1(a[i], x[i]);
    const cplx v = detail::cmul1(b[i], y[i]);
    out[i] = cplx(u.real() + v.real(), u.imag() + v.imag());
  }
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void fourier_eval_avx2(const cplx* c, std::size_t nc, double k1, double scale,
                       const double* theta, double* out, std::size_t npts) {
  std::size_t j = 0;
  const std::size_t last = nc - 1;
  for (; j + 4 <= npts; j += 4) {
    alignas(32) double ph[4], wr_a[4], wi_a[4];
    for (int l = 0; l < 4; ++l) {
      ph[l] = k1 * theta[j + l];
      wr_a[l] = std::cos(ph[l]);
      wi_a[l] = std::sin(ph[l]);
    }
    const __m256d wr = _mm256_load_pd(wr_a);
    const __m256d wi = _mm256_load_pd(wi_a);
    __m256d zr = _mm256_set1_pd(1.0);
    __m256d zi = _mm256_setzero_pd();
    __m256d acc = _mm256_set1_pd(c[0].real());
    const __m256d two = _mm256_set1_pd(2.0);
    for (std::size_t m = 1; m <= last; ++m) {
      if (m % detail::kAnchorEvery == 0) {
        alignas(32) double ar[4], ai[4];
        for (int l = 0; l < 4; ++l) {
          const double a = static_cast<double>(m) * ph[l];
          ar[l] = std::cos(a);
          ai[l] = std::sin(a);
        }
        zr = _mm256_load_pd(ar);
        zi = _mm256_load_pd(ai);
      } else {
        const __m256d nr = _mm256_sub_pd(_mm256_mul_pd(zr, wr), _mm256_mul_pd(zi, wi));
        const __m256d ni = _mm256_add_pd(_mm256_mul_pd(zr, wi), _mm256_mul_pd(zi, wr));
        zr = nr;
        zi = ni;
      }
      const __m256d cr = _mm256_set1_pd(c[m].real());
      const __m256d ci = _mm256_set1_pd(c[m].imag());
      const __m256d term = _mm256_sub_pd(_mm256_mul_pd(cr, zr), _mm256_mul_pd(ci, zi));
      acc = _mm256_add_pd(acc, m == last ? term : _mm256_mul_pd(two, term));
    }
    _mm256_storeu_pd(out + j, _mm256_mul_pd(_mm256_set1_pd(scale), acc));
  }
  for (; j < npts; ++j) out[j] = scale * detail::fourier_point(c, nc, k1, theta[j]);
}

}  // namespace

const KernelTable* avx2_table_impl() {
  static const KernelTable table{"avx2",     dot_avx2,  dot3_avx2,      ipow_avx2,
                                 cmul_avx2,  cmul_add2_avx2, axpy_avx2, fourier_eval_avx2};
  return &table;
}

}  // namespace gkdv::simd

#else

namespace gkdv::simd {
const KernelTable* avx2_table_impl() { return nullptr; }
}  // namespace gkdv::simd

#endif
