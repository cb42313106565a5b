#include "gkdv/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>

#include "gkdv/error.hpp"

namespace gkdv {
namespace {

// FFTW's planner is not thread-safe; execution with the new-array API is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct RealFft::Plans {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

RealFft::RealFft(std::size_t n) : n_(n), plans_(std::make_unique<Plans>()) {
  if (n < 2 || n % 2 != 0) throw GridError("FFT length must be even");
  RVec r(n);
  CVec c(n / 2 + 1);
  auto* cp = reinterpret_cast<fftw_complex*>(c.data());
  const int ni = static_cast<int>(n);
  plans_->r2c = fftw_plan_dft_r2c_1d(ni, r.data(), cp, FFTW_ESTIMATE);
  plans_->c2r = fftw_plan_dft_c2r_1d(ni, cp, r.data(), FFTW_ESTIMATE);
  if (plans_->r2c == nullptr || plans_->c2r == nullptr) throw NumericalError("FFTW planning failed");
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (plans_->r2c != nullptr) fftw_destroy_plan(plans_->r2c);
  if (plans_->c2r != nullptr) fftw_destroy_plan(plans_->c2r);
}

std::shared_ptr<const RealFft> RealFft::get(std::size_t n) {
  std::lock_guard<std::mutex> lock(planner_mutex());
  static std::map<std::size_t, std::shared_ptr<const RealFft>> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::shared_ptr<const RealFft> plan(new RealFft(n));
  cache.emplace(n, plan);
  return plan;
}

void RealFft::forward(const double* in, cplx* out) const {
  fftw_execute_dft_r2c(plans_->r2c, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
}

void RealFft::inverse(const cplx* in, double* out) const {
  // c2r overwrites its input, so work on a per-thread copy.
  thread_local CVec scratch;
  scratch.resize(spectral_size());
  std::copy(in, in + spectral_size(), scratch.begin());
  fftw_execute_dft_c2r(plans_->c2r, reinterpret_cast<fftw_complex*>(scratch.data()), out);
}

void RealFft::forward(const RVec& in, CVec& out) const {
  if (in.size() != n_) throw GridError("FFT input length mismatch");
  out.resize(spectral_size());
  forward(in.data(), out.data());
}

void RealFft::inverse(const CVec& in, RVec& out) const {
  if (in.size() != spectral_size()) throw GridError("FFT input length mismatch");
  out.resize(n_);
  inverse(in.data(), out.data());
}

}  // namespace gkdv
