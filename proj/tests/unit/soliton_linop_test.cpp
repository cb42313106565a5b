#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "doctest.h"
#include "fixtures.hpp"

#include "gkdv/error.hpp"
#include "gkdv/linop.hpp"
#include "gkdv/soliton.hpp"

using namespace gkdv;

namespace {

/// int Q^2 for c = 1 from int sech^a(b x) dx = B(a/2, 1/2) / b.
double mass_closed_form(int p) {
  const double a = 4.0 / (p - 1), b = 0.5 * (p - 1);
  return std::pow(0.5 * (p + 1), 2.0 / (p - 1)) * std::beta(0.5 * a, 0.5) / b;
}

/// Composite Simpson rule on [-h, h].
template <class F>
double simpson(F f, double h, int n) {
  const double dx = 2.0 * h / n;
  double s = f(-h) + f(h);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(-h + i * dx);
  return s * dx / 3.0;
}

/// Roots of r^3 - r + e0 = 0, the far-field characteristic polynomial of
/// L d_x Z = e0 Z, from the companion matrix.
Eigen::VectorXcd far_field_roots(double e0) {
  Eigen::Matrix3d m;
  m << 0, 1, -e0, 1, 0, 0, 0, 1, 0;
  return Eigen::EigenSolver<Eigen::Matrix3d>(m).eigenvalues();
}

/// d_x (-d_xx - p Q^{p-1} + 1) with the closed-form periodic spectral
/// differentiation matrices (cotangent and cosecant kernels), largest real eigenvalue.
double dense_edge_eigenvalue(int p, double L, int n) {
  const double h = 2.0 * std::numbers::pi / n, scale = 2.0 * std::numbers::pi / L;
  Eigen::MatrixXd d1(n, n), d2(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        d1(i, j) = 0.0;
        d2(i, j) = -std::numbers::pi * std::numbers::pi / (3 * h * h) - 1.0 / 6.0;
      } else {
        const double sgn = (i - j) % 2 ? -1.0 : 1.0;
        const double half = 0.5 * (i - j) * h;
        d1(i, j) = 0.5 * sgn / std::tan(half);
        d2(i, j) = -0.5 * sgn / (std::sin(half) * std::sin(half));
      }
    }
  }
  d1 *= scale;
  d2 *= scale * scale;
  Eigen::MatrixXd l = -d2 + Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i) {
    const double x = -0.5 * L + i * L / n;
    l(i, i) -= p * std::pow(ground_state_value(p, 1.0, x), p - 1);
  }
  const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(d1 * l, false).eigenvalues();
  double best = 0.0;
  for (const auto& z : ev) {
    if (std::abs(z.imag()) < 1e-8) best = std::max(best, z.real());
  }
  return best;
}

}  // namespace

TEST_SUITE("soliton") {
  TEST_CASE("ground state solves the profile equation") {
    const Grid1D g(128.0, 4096);
    for (int p : {3, 5, 6, 8}) {
      for (double c : {0.7, 1.0, 1.6}) {
        CAPTURE(p);
        CAPTURE(c);
        const Field q = ground_state(p, c, g, 1.5);
        Field r = derivative(q, 2);
        for (std::size_t i = 0; i < q.size(); ++i) r.mutable_values()[i] += std::pow(q[i], p) - c * q[i];
        CHECK(r.max_abs() <= 1e-10);
      }
    }
  }

  TEST_CASE("mass matches the Beta-function closed form and a Simpson oracle") {
    const Grid1D g(80.0, 2048);
    for (int p : {3, 5, 6, 7}) {
      CAPTURE(p);
      const double m = conserved_quantities(ground_state(p, 1.0, g, 0.0), p).mass;
      CHECK(m == doctest::Approx(mass_closed_form(p)).epsilon(1e-11));
      const double s = simpson([&](double x) { return std::pow(ground_state_value(p, 1.0, x), 2); }, 40.0, 40000);
      CHECK(m == doctest::Approx(s).epsilon(1e-10));
    }
  }

  TEST_CASE("mass scales as c^((5-p)/(2(p-1)))") {
    const Grid1D g(128.0, 4096);
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> dc(0.4, 3.0);
    for (int p : {3, 5, 6, 8}) {
      const double m1 = conserved_quantities(ground_state(p, 1.0, g, 0.0), p).mass;
      for (int k = 0; k < 4; ++k) {
        const double c = dc(rng);
        CAPTURE(p);
        CAPTURE(c);
        const double mc = conserved_quantities(ground_state(p, c, g, 0.0), p).mass;
        CHECK(mc / m1 == doctest::Approx(std::pow(c, mass_scaling_exponent(p))).epsilon(1e-11));
      }
    }
  }

  TEST_CASE("criticality classification") {
    CHECK(criticality(3).sign == 1);
    CHECK(criticality(5).sign == 0);
    CHECK(criticality(6).sign == -1);
    CHECK(mass_scaling_exponent(6) == doctest::Approx(-0.1));
    CHECK(mass_scaling_exponent(3) == doctest::Approx(0.5));
  }

  TEST_CASE("tail wrap and close solitons are rejected") {
    CHECK_THROWS_AS(ground_state(6, 0.3, Grid1D(32.0, 512), 0.0), DomainError);
    const SolitonEnsemble ens(6, {{0.7, -5.0}, {1.3, 5.0}});
    CHECK(ens.min_separation(0.0) == doctest::Approx(10.0));
    CHECK_THROWS_AS(ensemble_field(ens, 0.0, Grid1D(128.0, 2048), 20.0), DomainError);
    CHECK_THROWS(SolitonEnsemble(6, {{1.3, 0.0}, {0.7, 20.0}}));
  }

  TEST_CASE("soliton field translates with speed c") {
    const Grid1D g(64.0, 1024);
    const SolitonParams sp{1.2, -3.0};
    const Field a = soliton_field(6, sp, 2.0, g);
    const Field b = ground_state(6, 1.2, g, -3.0 + 2.4);
    CHECK(norm_l2(a - b) <= 1e-14);
  }
}

TEST_SUITE("linop") {
  TEST_CASE("L Q_x = 0 and L Q = -(p-1) Q^p") {
    const Grid1D g(64.0, 4096);
    for (int p : {3, 6, 7}) {
      CAPTURE(p);
      const Field q = ground_state(p, 1.0, g, 0.0);
      CHECK(apply_L(derivative(q, 1), p).max_abs() <= 1e-9);
      Field lq = apply_L(q, p);
      for (std::size_t i = 0; i < q.size(); ++i) lq.mutable_values()[i] += (p - 1) * std::pow(q[i], p);
      CHECK(lq.max_abs() <= 1e-9);
    }
  }

  TEST_CASE("Q^((p+1)/2) is an eigenfunction of L with eigenvalue mu0") {
    const Grid1D g(64.0, 4096);
    for (int p : {3, 4, 6, 7, 8}) {
      CAPTURE(p);
      CHECK(mu0_symbolic(p) == doctest::Approx(1.0 - 0.25 * (p + 1) * (p + 1)));
      Field w = ground_state(p, 1.0, g, 0.0);
      for (double& v : w.mutable_values()) v = std::pow(v, 0.5 * (p + 1));
      const Field r = apply_L(w, p) - mu0_symbolic(p) * w;
      CHECK(norm_l2(r) <= 1e-9 * norm_l2(w));
    }
  }

  TEST_CASE("edge eigenvalue for p = 6") {
    const EdgeSpectrum& s = test::spectrum6();
    CHECK(s.e0 == doctest::Approx(0.634507643481213).epsilon(1e-11));
    CHECK(s.residuals.eigen_plus <= 1e-9);
    CHECK(s.residuals.eigen_minus <= 1e-9);
    CHECK(eigen_residual(s, 1) <= 1e-9);
    CHECK(norm_l2(s.Zplus) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(norm_l2(s.Zminus) == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("edge eigenvalue agrees with an independent dense eigensolve") {
    CHECK(dense_edge_eigenvalue(6, 48.0, 400) == doctest::Approx(test::spectrum6().e0).epsilon(1e-6));
  }

  TEST_CASE("decay rate eta0 matches the far-field characteristic roots") {
    const EdgeSpectrum& s = test::spectrum6();
    double eta = 1e300;
    for (const auto& r : far_field_roots(s.e0)) eta = std::min(eta, std::abs(r.real()));
    CHECK(eta == doctest::Approx(0.6155144).epsilon(1e-6));
    // the least-squares tail fit carries a small bias from the oscillating tail
    CHECK(s.eta0 == doctest::Approx(eta).epsilon(5e-4));
  }

  TEST_CASE("dual eigenfunctions") {
    const EdgeSpectrum& s = test::spectrum6();
    const DualResiduals d = dual_residuals(s);
    CHECK(d.r_plus <= 1e-8);
    CHECK(d.r_minus <= 1e-8);
    CHECK(d.ortho <= 1e-10);
    CHECK(d.gram == doctest::Approx(0.962337196080361).epsilon(1e-9));
    CHECK(d.gram_det == doctest::Approx(1.0 - d.gram * d.gram));
    // Z- is the reflection of Z+ up to sign.
    const double r = std::min(norm_l2(reflect(s.Zplus) - s.Zminus), norm_l2(reflect(s.Zplus) + s.Zminus));
    CHECK(r <= 1e-8);
  }

  TEST_CASE("scaled duals carry eigenvalue e0 c^{3/2}") {
    const EdgeSpectrum& s = test::spectrum6();
    const Grid1D g(160.0, 4096);
    for (double c : {0.7, 1.3}) {
      CAPTURE(c);
      const ScaledDual sd(s, c, g);
      CHECK(sd.eigenvalue() == doctest::Approx(s.e0 * std::pow(c, 1.5)));
      const Field z = sd.at(2.0, 1);
      const Field r = apply_L(derivative(z, 1), 6, c, 2.0) - sd.eigenvalue() * z;
      CHECK(norm_l2(r) <= 1e-7 * norm_l2(z));
      CHECK_THROWS_AS(sd.at(75.0, 1), DomainError);
    }
  }

  TEST_CASE("edge eigenvalue for p = 7") {
    const EdgeSpectrum s = edge_eigenpair(7, Grid1D(128.0, 4096));
    CHECK(s.e0 == doctest::Approx(1.68063794423).epsilon(1e-10));
  }

  TEST_CASE("no edge eigenvalue below the critical power") {
    CHECK_THROWS_AS(edge_eigenpair(4, Grid1D(64.0, 1024)), NoEdgeEigenvalue);
  }
}
