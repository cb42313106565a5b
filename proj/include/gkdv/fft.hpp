#pragma once

#include <cstddef>
#include <memory>

#include "gkdv/aligned.hpp"

namespace gkdv {

/// Real-to-complex FFT of a fixed length backed by FFTW. Plans are created
/// once per length with FFTW_ESTIMATE (deterministic) and shared; execution
/// is thread-safe. Transforms are unnormalized.
class RealFft {
 public:
  /// Shared plan for length n (n even).
  static std::shared_ptr<const RealFft> get(std::size_t n);

  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  std::size_t spectral_size() const { return n_ / 2 + 1; }

  /// out[0..n/2] = sum_j in[j] e^{-2 pi i m j / n}. Arrays must come from
  /// RVec/CVec (64-byte aligned).
  void forward(const double* in, cplx* out) const;
  /// out[j] = sum_m in[m] e^{2 pi i m j / n} over the Hermitian extension.
  /// The input is not modified.
  void inverse(const cplx* in, double* out) const;

  void forward(const RVec& in, CVec& out) const;
  void inverse(const CVec& in, RVec& out) const;

 private:
  explicit RealFft(std::size_t n);
  struct Plans;
  std::size_t n_;
  std::unique_ptr<Plans> plans_;
};

}  // namespace gkdv
