#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "doctest.h"
#include "fixtures.hpp"

#include "gkdv/coercivity.hpp"
#include "gkdv/error.hpp"
#include "gkdv/evolver.hpp"
#include "gkdv/modulation.hpp"
#include "gkdv/shooting.hpp"
#include "gkdv/snapshot.hpp"
#include "gkdv/soliton.hpp"

using namespace gkdv;

namespace {

const Grid1D& base_grid() {
  static const Grid1D g(128.0, 4096);
  return g;
}

Field q_power(int p, const Grid1D& g) {
  Field w = ground_state(p, 1.0, g, 0.0);
  for (double& v : w.mutable_values()) v = std::pow(v, 0.5 * (p + 1));
  return w;
}

Field project_out(Field v, const std::vector<Field>& fields) {
  const std::size_t m = fields.size();
  Eigen::MatrixXd gm(m, m);
  Eigen::VectorXd r(m);
  for (std::size_t i = 0; i < m; ++i) {
    r(i) = inner_l2(fields[i], v);
    for (std::size_t j = 0; j < m; ++j) gm(i, j) = inner_l2(fields[i], fields[j]);
  }
  const Eigen::VectorXd a = gm.ldlt().solve(r);
  for (std::size_t i = 0; i < m; ++i) v.axpy(-a(i), fields[i]);
  return v;
}

}  // namespace

TEST_SUITE("grid") {
  TEST_CASE("single-mode derivatives") {
    const double L = 40.0;
    const Grid1D g(L, 128);
    const double k = 2.0 * std::numbers::pi / L;
    const Field s = Field::from_function(g, [&](double x) { return std::sin(k * x); });
    const Field c3 = Field::from_function(g, [&](double x) { return std::cos(3 * k * x); });
    const Field d1 = derivative(s, 1), d3 = derivative(c3, 3);
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(std::abs(d1[i] - k * std::cos(k * g.x(i))) <= 1e-12);
      CHECK(std::abs(d3[i] - std::pow(3 * k, 3) * std::sin(3 * k * g.x(i))) <= 1e-11);
    }
    const Field one(g, RVec(g.size(), 2.5));
    for (int order = 1; order <= 4; ++order) CHECK(derivative(one, order).max_abs() == 0.0);
  }

  TEST_CASE("inner products and norms") {
    const Field q = ground_state(6, 1.0, base_grid(), 0.0);
    CHECK(std::abs(inner_l2(q, derivative(q, 1))) <= 1e-12);
    const Field zero(base_grid());
    CHECK(inner_l2(zero, zero) == 0.0);
    CHECK(norm_h1(zero) == 0.0);
    const double n1 = inner_l2(q, q);
    const Field q2 = ground_state(6, 1.0, Grid1D(128.0, 8192), 0.0);
    CHECK(n1 > 0.0);
    CHECK(std::abs(inner_l2(q2, q2) - n1) <= 1e-10 * n1);

    const double L = 30.0;
    const Grid1D g(L, 256);
    const double k = 2.0 * std::numbers::pi / L;
    const Field s = Field::from_function(g, [&](double x) { return std::sin(k * x); });
    CHECK(norm_h1(s) == doctest::Approx(std::sqrt(0.5 * L * (1 + k * k))).epsilon(1e-13));

    std::mt19937_64 rng(59);
    for (int i = 0; i < 50; ++i) {
      const Field f = test::random_bumps(g, rng, 4, 10.0);
      CHECK(norm_h1(f) >= norm_l2(f));
    }
  }
}

TEST_SUITE("snapshot") {
  TEST_CASE("unknown version is reported as such") {
    const auto path = std::filesystem::temp_directory_path() / "gkdv_snapshot_version.snap";
    {
      std::ofstream o(path, std::ios::binary);
      const std::uint32_t version = kSnapshotVersion + 1;
      const double L = 10.0, t = 0.0;
      const std::uint64_t n = 16;
      o.write("GKDV", 4);
      o.write(reinterpret_cast<const char*>(&version), sizeof version);
      o.write(reinterpret_cast<const char*>(&L), sizeof L);
      o.write(reinterpret_cast<const char*>(&n), sizeof n);
      o.write(reinterpret_cast<const char*>(&t), sizeof t);
      for (std::uint64_t i = 0; i < n; ++i) o.write(reinterpret_cast<const char*>(&t), sizeof t);
    }
    bool version_error = false;
    try {
      load_snapshot(path.string());
    } catch (const FormatError& e) {
      version_error = std::string(e.what()).find("version") != std::string::npos;
    }
    CHECK(version_error);
    std::filesystem::remove(path);
  }
}

TEST_SUITE("soliton") {
  TEST_CASE("peak value and amplitude scaling") {
    CHECK(ground_state_value(6, 1.0, 0.0) == doctest::Approx(std::pow(3.5, 0.2)).epsilon(1e-14));
    CHECK(ground_state_value(6, 1.0, 0.0) == doctest::Approx(1.28473).epsilon(1e-5));
    for (double c : {0.5, 2.0}) {
      const Field qc = ground_state(6, c, base_grid(), 0.0);
      const Field q1 = ground_state(6, 1.0, base_grid(), 0.0);
      CHECK(std::abs(qc.max_abs() - std::pow(c, 0.2) * q1.max_abs()) <= 1e-12);
    }
  }

  TEST_CASE("soliton fields translate and keep their mass") {
    const Grid1D& g = base_grid();
    const SolitonParams sp{1.0, -10.0};
    const Field r0 = soliton_field(6, sp, 0.0, g);
    CHECK(norm_l2(r0 - ground_state(6, 1.0, g, -10.0)) == 0.0);
    const Field r3 = soliton_field(6, sp, 3.0, g);
    CHECK((r3 - shift(r0, 3.0)).max_abs() <= 1e-12);
    CHECK(std::abs(inner_l2(r3, r3) - inner_l2(r0, r0)) <= 1e-12);
    const SolitonEnsemble one(6, {sp});
    CHECK(norm_l2(ensemble_field(one, 3.0, g) - r3) == 0.0);
  }

  TEST_CASE("well-separated pair: mass is additive up to the cross term") {
    const Grid1D g(160.0, 4096);
    const SolitonEnsemble ens(6, {{0.7, -30.0}, {1.3, 26.0}});
    const double sigma0 = compute_sigma0(ens, test::spectrum6());
    for (double t : {0.0, 5.0}) {
      const Field r = ensemble_field(ens, t, g);
      const Field r1 = soliton_field(6, ens[0], t, g), r2 = soliton_field(6, ens[1], t, g);
      const double tol = std::exp(-std::sqrt(sigma0) * ens.min_separation(t));
      CHECK(std::abs(inner_l2(r, r) - inner_l2(r1, r1) - inner_l2(r2, r2)) <= tol);
    }
  }

  TEST_CASE("conserved quantities") {
    const Conserved z = conserved_quantities(Field(base_grid()), 6);
    CHECK(z.mass == 0.0);
    CHECK(z.energy == 0.0);
    const double e1 = conserved_quantities(ground_state(6, 1.0, base_grid(), 0.0), 6).energy;
    const double e2 = conserved_quantities(ground_state(6, 1.0, Grid1D(128.0, 8192), 0.0), 6).energy;
    CHECK(std::abs(e1 - e2) <= 1e-10 * std::abs(e1));
  }
}

TEST_SUITE("linop") {
  TEST_CASE("relative kernel residual and constant eigen-ratio") {
    // the residual floor is roundoff amplified by k_max^2, so a moderate n is best
    const Grid1D g(80.0, 2048);
    const Field qx = derivative(ground_state(6, 1.0, g, 0.0), 1);
    CHECK(norm_l2(apply_L(qx, 6)) <= 1e-10 * norm_l2(qx));
    const Field w = q_power(6, g);
    const Field lw = apply_L(w, 6);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (w[i] < 1e-3 * w.max_abs()) continue;
      CHECK(lw[i] / w[i] == doctest::Approx(mu0_symbolic(6)).epsilon(1e-9));
    }
  }

  TEST_CASE("translation equivariance") {
    const Grid1D g(64.0, 2048);
    std::mt19937_64 rng(61);
    const Field v = test::random_bumps(g, rng, 5, 6.0);
    const double s = 3.7;
    const Field a = apply_L(shift(v, s), 6, 1.2, s);
    const Field b = shift(apply_L(v, 6, 1.2, 0.0), s);
    CHECK((a - b).max_abs() <= 1e-12 * std::max(1.0, b.max_abs()));
  }

  TEST_CASE("dense oracle agrees at two resolutions") {
    // the edge eigenvalue is also recovered by the library's own dense stage
    const EdgeSpectrum& s = test::spectrum6();
    CHECK(s.residuals.e0_fine == doctest::Approx(s.e0).epsilon(1e-6));
    CHECK(s.residuals.e0_dense == doctest::Approx(s.e0).epsilon(1e-6));
  }

  TEST_CASE("dual Gram entry is strictly inside (-1, 1)") {
    const DualResiduals d = dual_residuals(test::spectrum6());
    CHECK(d.gram_det > 1e-6);
    CHECK(std::abs(d.gram) < 1.0);
  }

  TEST_CASE("scaled duals: identity scaling, norms and eigen-relation at c = 2") {
    const EdgeSpectrum& s = test::spectrum6();
    CHECK(norm_l2(scaled_dual(s, 1.0, 0.0, 0.0, s.grid(), 1) - s.Zplus) <= 1e-12);
    CHECK(norm_l2(scaled_dual(s, 1.0, 0.0, 0.0, s.grid(), -1) - s.Zminus) <= 1e-12);
    for (double c : {0.7, 1.3, 2.0}) {
      CAPTURE(c);
      const Field z = scaled_dual(s, c, 0.0, 0.0, base_grid(), 1);
      CHECK(norm_l2(z) == doctest::Approx(std::pow(c, 0.2 - 0.25)).epsilon(1e-10));
    }
    const ScaledDual sd(s, 2.0, base_grid());
    for (int sign : {1, -1}) {
      const Field z = sd.centered(sign);
      const Field r = apply_L(derivative(z, 1), 6, 2.0) - (sign * sd.eigenvalue()) * z;
      CHECK(norm_l2(r) <= 1e-7);
    }
  }
}

TEST_SUITE("coercivity") {
  TEST_CASE("the translation constraint alone admits a negative direction") {
    const Grid1D g(64.0, 1024);
    CHECK(rayleigh_quotient(q_power(6, g), 6, 1.0) < 0.0);
  }

  TEST_CASE("localized form on constrained and kernel directions") {
    const Grid1D g(64.0, 1024);
    const EdgeSpectrum& s = test::spectrum6();
    const SolitonEnsemble ens(6, {{1.0, 0.0}});
    const Field one(g, RVec(g.size(), 1.0));
    CHECK(localized_form_H(Field(g), ens, {0.0}, {one}, 0.0)[0] == 0.0);

    const ConstraintSet cs = dual_constraints(s, 1.0, 0.0, g);
    const double lambda = constrained_min_rayleigh(6, 1.0, 0.0, cs, g).lambda;
    std::mt19937_64 rng(67);
    for (int k = 0; k < 20; ++k) {
      const Field v = project_out(test::random_bumps(g, rng), cs.fields());
      const double h = localized_form_H(v, ens, {0.0}, {one}, 0.0)[0];
      CHECK(h >= lambda * norm_h1(v) * norm_h1(v) - 1e-10);
    }
    const Field rx = derivative(ground_state(6, 1.0, g, 0.0), 1);
    const double h = localized_form_H(rx, ens, {0.0}, {one}, 0.0)[0];
    CHECK(std::abs(h) <= 1e-6 * norm_h1(rx) * norm_h1(rx));
  }
}

TEST_SUITE("evolver") {
  TEST_CASE("zero stays zero") {
    const Grid1D g(64.0, 512);
    EvolveOptions o;
    o.dt = 1e-2;
    const Trajectory tr = evolve(Field(g), 6, 0.0, 1.0, o);
    CHECK(tr.samples.back().u.max_abs() == 0.0);
  }

  TEST_CASE("Kato rate vanishes for constant weights and zero data") {
    const Grid1D g(64.0, 1024);
    const Field one(g, RVec(g.size(), 1.0)), zero(g);
    const Field u = ground_state(6, 1.0, g, 0.0);
    CHECK(kato_rate(u, 6, one, zero, zero) == 0.0);
    const KatoWeight w = kato_weight(0.4, 0.0, g);
    CHECK(kato_rate(zero, 6, w.f, w.f_x, w.f_xxx) == 0.0);
  }
}

TEST_SUITE("modulation") {
  TEST_CASE("exact sums decompose to zero") {
    const Modulator m(SolitonEnsemble(6, {{1.0, -5.0}}), test::spectrum6(), base_grid());
    const ModulationState st = m.decompose(m.reference(2.0), 2.0);
    CHECK(std::abs(st.y[0]) <= 1e-12);
    CHECK(norm_h1(st.v) <= 1e-12);
    CHECK(std::abs(st.a_plus[0]) <= 1e-12);
    CHECK(std::abs(st.a_minus[0]) <= 1e-12);
  }

  TEST_CASE("a shifted soliton is recovered as a translation") {
    const Modulator m(SolitonEnsemble(6, {{1.0, 2.0}}), test::spectrum6(), base_grid());
    const ModulationState st = m.decompose(ground_state(6, 1.0, base_grid(), 2.1), 0.0);
    CHECK(st.y[0] == doctest::Approx(0.1).epsilon(1e-8));
    CHECK(norm_h1(st.v) <= 1e-8);
  }

  TEST_CASE("an unstable-direction perturbation moves y at second order") {
    const Modulator m(SolitonEnsemble(6, {{1.0, 0.0}}), test::spectrum6(), base_grid());
    const Field z = m.dual(0, 0.0, 0.0, 1);
    double y_prev = 0.0, v_prev = 0.0;
    for (double eps : {1e-3, 2e-3}) {
      const ModulationState st = m.decompose(m.reference(0.0) + eps * z, 0.0);
      const double y = std::abs(st.y[0]);
      const double dv = norm_l2(st.v - eps * z);
      CHECK(y <= 10.0 * eps * eps);
      CHECK(dv <= 10.0 * eps * eps);
      if (y_prev > 1e-13) CHECK(y / y_prev == doctest::Approx(4.0).epsilon(0.05));
      if (v_prev > 1e-13) CHECK(dv / v_prev == doctest::Approx(4.0).epsilon(0.05));
      y_prev = y;
      v_prev = dv;
    }
  }

  TEST_CASE("unstable coefficients") {
    const EdgeSpectrum& s = test::spectrum6();
    const Modulator m1(SolitonEnsemble(6, {{1.0, 0.0}}), s, base_grid());
    std::vector<double> ap, am;
    m1.unstable_coeffs(m1.dual(0, 0.0, 0.0, 1), 0.0, {0.0}, ap, am);
    CHECK(ap[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(am[0] == doctest::Approx(inner_l2(s.Zplus, s.Zminus)).epsilon(1e-12));

    std::mt19937_64 rng(71);
    const Field v = project_out(test::random_bumps(base_grid(), rng, 6, 10.0),
                                {m1.dual(0, 0.0, 0.0, 1), m1.dual(0, 0.0, 0.0, -1)});
    m1.unstable_coeffs(v, 0.0, {0.0}, ap, am);
    CHECK(std::abs(ap[0]) <= 1e-12);
    CHECK(std::abs(am[0]) <= 1e-12);

    const Modulator m2(SolitonEnsemble(6, {{2.0, 0.0}}), s, base_grid());
    m2.unstable_coeffs(m2.dual(0, 0.0, 0.0, 1), 0.0, {0.0}, ap, am);
    CHECK(ap[0] == doctest::Approx(std::pow(2.0, -0.1)).epsilon(1e-9));
  }

  TEST_CASE("final data: zero target and a target on the sphere") {
    const EdgeSpectrum& s = test::spectrum6();
    const double sigma0 = compute_sigma0(SolitonEnsemble(6, {{1.0, 0.0}}), s);
    const double T0 = default_T0(sigma0), Sn = T0 + 8.0;
    const Modulator m(place_ensemble(s, {1.0}, base_grid(), T0, Sn), s, base_grid());
    const FinalData zero = m.final_data({0.0}, Sn);
    CHECK(zero.b[0] == 0.0);
    CHECK(zero.b[1] == 0.0);
    const double ball = std::exp(-1.5 * std::pow(sigma0, 1.5) * Sn);
    const FinalData fd = m.final_data({ball}, Sn);
    const ModulationState st = m.decompose(fd.u, Sn);
    CHECK(std::abs(st.a_plus[0] - ball) <= 1e-10);
    CHECK(std::abs(st.a_minus[0]) <= 1e-10);
    CHECK(std::hypot(fd.b[0], fd.b[1]) <= 20.0 * ball);
  }
}

TEST_SUITE("shooting") {
  TEST_CASE("sigma0 with a dominant speed gap, and monotonicity") {
    EdgeSpectrum big = test::spectrum6();
    big.e0 = 100.0;
    big.eta0 = 100.0;
    CHECK(compute_sigma0(SolitonEnsemble(6, {{0.7, 0.0}, {1.3, 60.0}}), big) == doctest::Approx(0.15));
    const EdgeSpectrum& s = test::spectrum6();
    double prev = 0.0;
    for (double c2 : {1.0, 1.2, 1.4, 1.8, 2.5}) {
      const double sg = compute_sigma0(SolitonEnsemble(6, {{0.7, 0.0}, {c2, 60.0}}), s);
      CHECK(sg >= prev);
      prev = sg;
    }
  }

  TEST_CASE("cutoff is monotone decreasing") {
    double prev = 2.0;
    for (double x = -30.0; x <= 30.0; x += 0.5) {
      const double v = cutoff(0.4, x);
      CHECK(v < prev);
      prev = v;
    }
  }

  TEST_CASE("localized masses of a separated pair") {
    const Grid1D g(160.0, 4096);
    const SolitonEnsemble ens(6, {{0.7, -30.0}, {1.3, 26.0}});
    const double sigma0 = compute_sigma0(ens, test::spectrum6());
    const PartitionWeights w = diagnostics_weights(ens, {}, 0.0, sigma0, g);
    const LocalFunctionals lf = localized_functionals(ensemble_field(ens, 0.0, g), w.phi, 6);
    for (std::size_t j = 0; j < 2; ++j) {
      const Field q = ground_state(6, ens[j].c, g, 0.0);
      CHECK(lf.M[j] == doctest::Approx(inner_l2(q, q)).epsilon(1e-3));
    }
  }

  TEST_CASE("final data on the sphere leaves the tube at Sn") {
    const EdgeSpectrum& s = test::spectrum6();
    const double sigma0 = compute_sigma0(SolitonEnsemble(6, {{1.0, 0.0}}), s);
    TubeSpec tube;
    tube.T0 = default_T0(sigma0);
    tube.Sn = tube.T0 + 8.0;
    const Shooter sh(place_ensemble(s, {1.0}, base_grid(), tube.T0, tube.Sn), s, base_grid(), tube);
    const ShootResult r = sh.backward_run({sh.tube().ball()});
    CHECK_FALSE(r.success);
    CHECK(r.T_exit == doctest::Approx(tube.Sn));
    CHECK(r.exit_condition != TubeCondition::None);
  }
}
