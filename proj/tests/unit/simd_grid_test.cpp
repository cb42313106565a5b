#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "doctest.h"

#include "gkdv/error.hpp"
#include "gkdv/grid.hpp"
#include "gkdv/simd.hpp"
#include "gkdv/snapshot.hpp"

using namespace gkdv;

namespace {

RVec random_vec(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  RVec v(n);
  for (double& x : v) x = d(rng);
  return v;
}

CVec random_cvec(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  CVec v(n);
  for (cplx& x : v) x = {d(rng), d(rng)};
  return v;
}

double max_abs_diff(const RVec& a, const RVec& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_abs_diff(const CVec& a, const CVec& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_SUITE("simd") {
  TEST_CASE("active table is one of the known tables") {
    const simd::KernelTable& t = simd::active();
    CHECK((&t == &simd::scalar_table() || &t == simd::avx2_table()));
  }

  TEST_CASE("avx2 kernels agree with the scalar reference") {
    const simd::KernelTable* v = simd::avx2_table();
    if (!v) {
      MESSAGE("AVX2 unavailable; equivalence not exercised");
      return;
    }
    const simd::KernelTable& s = simd::scalar_table();
    std::mt19937_64 rng(7);
    // odd lengths exercise the remainder loops
    for (std::size_t n : {1u, 3u, 4u, 7u, 16u, 33u, 1000u, 1027u}) {
      CAPTURE(n);
      const RVec a = random_vec(n, rng), b = random_vec(n, rng), w = random_vec(n, rng);
      const double d0 = s.dot(a.data(), b.data(), n), d1 = v->dot(a.data(), b.data(), n);
      CHECK(std::abs(d0 - d1) <= 1e-13 * std::max(1.0, std::abs(d0)) * std::sqrt(double(n)));
      const double t0 = s.dot3(a.data(), b.data(), w.data(), n);
      const double t1 = v->dot3(a.data(), b.data(), w.data(), n);
      CHECK(std::abs(t0 - t1) <= 1e-13 * std::max(1.0, std::abs(t0)) * std::sqrt(double(n)));

      for (int p : {2, 3, 6, 7, 8}) {
        RVec y0(n), y1(n);
        s.ipow(a.data(), y0.data(), n, p);
        v->ipow(a.data(), y1.data(), n, p);
        CHECK(max_abs_diff(y0, y1) == 0.0);
      }

      RVec y0 = b, y1 = b;
      s.axpy(0.37, a.data(), y0.data(), n);
      v->axpy(0.37, a.data(), y1.data(), n);
      CHECK(max_abs_diff(y0, y1) == 0.0);

      const CVec ca = random_cvec(n, rng), cx = random_cvec(n, rng);
      const CVec cb = random_cvec(n, rng), cy = random_cvec(n, rng);
      CVec o0(n), o1(n);
      s.cmul(ca.data(), cx.data(), o0.data(), n);
      v->cmul(ca.data(), cx.data(), o1.data(), n);
      CHECK(max_abs_diff(o0, o1) <= 1e-15);
      s.cmul_add2(ca.data(), cx.data(), cb.data(), cy.data(), o0.data(), n);
      v->cmul_add2(ca.data(), cx.data(), cb.data(), cy.data(), o1.data(), n);
      CHECK(max_abs_diff(o0, o1) <= 1e-15);
    }
  }

  TEST_CASE("fourier_eval matches a direct sum in both tables") {
    std::mt19937_64 rng(11);
    const std::size_t nc = 33;
    const CVec c = random_cvec(nc, rng);
    const RVec theta = random_vec(37, rng);
    const double k1 = 0.3, scale = 0.5;
    RVec ref(theta.size());
    for (std::size_t j = 0; j < theta.size(); ++j) {
      std::complex<double> acc = c[0];
      for (std::size_t m = 1; m + 1 < nc; ++m) {
        acc += 2.0 * c[m] * std::polar(1.0, double(m) * k1 * theta[j]);
      }
      acc += c[nc - 1] * std::polar(1.0, double(nc - 1) * k1 * theta[j]);
      ref[j] = scale * acc.real();
    }
    for (const simd::KernelTable* t : {&simd::scalar_table(), simd::avx2_table()}) {
      if (!t) continue;
      CAPTURE(t->name);
      RVec out(theta.size());
      t->fourier_eval(c.data(), nc, k1, scale, theta.data(), out.data(), theta.size());
      CHECK(max_abs_diff(out, ref) <= 1e-12);
    }
  }
}

TEST_SUITE("grid") {
  TEST_CASE("invalid grids are rejected") {
    CHECK_THROWS_AS(Grid1D(10.0, 100), GridError);
    CHECK_THROWS_AS(Grid1D(10.0, 8), GridError);
    CHECK_THROWS_AS(Grid1D(-1.0, 64), GridError);
    CHECK_THROWS_AS(Grid1D(0.0, 64), GridError);
  }

  TEST_CASE("nodes and wavenumbers") {
    const Grid1D g(2.0 * std::numbers::pi, 64);
    CHECK(g.x(0) == doctest::Approx(-std::numbers::pi));
    CHECK(g.dx() == doctest::Approx(2.0 * std::numbers::pi / 64));
    CHECK(g.spectral_size() == 33);
    CHECK(g.wavenumber(5) == doctest::Approx(5.0));
  }

  TEST_CASE("spectral derivatives are exact on trigonometric polynomials") {
    const Grid1D g(2.0 * std::numbers::pi, 64);
    const Field f = Field::from_function(g, [](double x) { return std::sin(3 * x) + std::cos(x); });
    const Field d1 = derivative(f, 1);
    const Field d3 = derivative(f, 3);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = g.x(i);
      CHECK(d1[i] == doctest::Approx(3 * std::cos(3 * x) - std::sin(x)).epsilon(1e-12));
      CHECK(std::abs(d3[i] - (-27 * std::cos(3 * x) + std::sin(x))) <= 1e-10);
    }
  }

  TEST_CASE("Parseval inner product equals the rectangle rule") {
    std::mt19937_64 rng(3);
    const Grid1D g(20.0, 256);
    const Field a(g, random_vec(256, rng)), b(g, random_vec(256, rng));
    CHECK(spectral_inner_l2(a, b) == doctest::Approx(inner_l2(a, b)).epsilon(1e-12));
  }

  TEST_CASE("shift by whole cells rolls the samples; reflect is exact") {
    const Grid1D g(30.0, 128);
    const Field f = Field::from_function(g, [](double x) { return std::exp(-x * x) * (1 + x); });
    const Field s = shift(f, 3 * g.dx());
    for (std::size_t i = 3; i < g.size(); ++i) CHECK(std::abs(s[i] - f[i - 3]) <= 1e-13);
    const Field r = reflect(reflect(f));
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(r[i] == f[i]);
  }

  TEST_CASE("interpolate reproduces the samples and a band-limited function") {
    const Grid1D g(2.0 * std::numbers::pi, 32);
    const Field f = Field::from_function(g, [](double x) { return std::cos(2 * x) + 0.5 * std::sin(5 * x); });
    RVec pts{g.x(3), g.x(17), 0.123, -1.7};
    const RVec v = interpolate(f, pts);
    CHECK(v[0] == doctest::Approx(f[3]).epsilon(1e-12));
    CHECK(v[1] == doctest::Approx(f[17]).epsilon(1e-12));
    CHECK(std::abs(v[2] - (std::cos(0.246) + 0.5 * std::sin(0.615))) <= 1e-12);
    CHECK(std::abs(v[3] - (std::cos(-3.4) + 0.5 * std::sin(-8.5))) <= 1e-12);
  }

  TEST_CASE("mismatched grids are rejected") {
    const Field a(Grid1D(10.0, 64)), b(Grid1D(10.0, 128));
    CHECK_THROWS_AS(inner_l2(a, b), GridError);
  }
}

TEST_SUITE("snapshot") {
  TEST_CASE("round trip is bitwise") {
    std::mt19937_64 rng(5);
    const Grid1D g(17.5, 64);
    const Field f(g, random_vec(64, rng));
    const auto path = std::filesystem::temp_directory_path() / "gkdv_snapshot_test.snap";
    save_snapshot(f, 3.25, path.string());
    const Snapshot s = load_snapshot(path.string());
    CHECK(s.t == 3.25);
    CHECK(s.field.grid() == g);
    for (std::size_t i = 0; i < 64; ++i) CHECK(s.field[i] == f[i]);
    std::filesystem::remove(path);
  }

  TEST_CASE("corrupt files are rejected") {
    const auto path = std::filesystem::temp_directory_path() / "gkdv_snapshot_bad.snap";
    {
      std::ofstream o(path, std::ios::binary);
      o << "NOPE and some bytes";
    }
    CHECK_THROWS_AS(load_snapshot(path.string()), FormatError);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_snapshot("/nonexistent/gkdv.snap"), FormatError);
  }
}
