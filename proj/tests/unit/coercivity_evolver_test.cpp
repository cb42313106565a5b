#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "doctest.h"
#include "fixtures.hpp"

#include "gkdv/coercivity.hpp"
#include "gkdv/error.hpp"
#include "gkdv/evolver.hpp"
#include "gkdv/shooting.hpp"
#include "gkdv/soliton.hpp"

using namespace gkdv;

namespace {

/// Removes the L2 projection of v onto span(fields).
Field project_out(Field v, const std::vector<Field>& fields) {
  const std::size_t m = fields.size();
  Eigen::MatrixXd g(m, m);
  Eigen::VectorXd r(m);
  for (std::size_t i = 0; i < m; ++i) {
    r(i) = inner_l2(fields[i], v);
    for (std::size_t j = 0; j < m; ++j) g(i, j) = inner_l2(fields[i], fields[j]);
  }
  const Eigen::VectorXd a = g.ldlt().solve(r);
  for (std::size_t i = 0; i < m; ++i) v.axpy(-a(i), fields[i]);
  return v;
}

double weighted_l2(const Field& u, const Field& f) { return inner_l2(hadamard(u, u), f); }

}  // namespace

TEST_SUITE("coercivity") {
  TEST_CASE("constrained minima for p = 6") {
    const Grid1D g(64.0, 1024);
    const EdgeSpectrum& s = test::spectrum6();
    const double dual = constrained_min_rayleigh(6, 1.0, 0.0, dual_constraints(s, 1.0, 0.0, g), g).lambda;
    const double qx = constrained_min_rayleigh(6, 1.0, 0.0, translation_constraint(6, 1.0, 0.0, g), g).lambda;
    const double pw = constrained_min_rayleigh(6, 1.0, 0.0, power_constraints(6, 1.0, 0.0, g), g).lambda;
    CHECK(dual == doctest::Approx(0.0730495127167).epsilon(1e-9));
    CHECK(qx == doctest::Approx(-5.0).epsilon(1e-9));
    CHECK(pw == doctest::Approx(0.493003512904).epsilon(1e-9));
    // adding constraints can only raise the minimum
    CHECK(dual >= qx);
    CHECK(pw >= qx);
  }

  TEST_CASE("random constrained directions stay above the minimum") {
    const Grid1D g(64.0, 1024);
    const EdgeSpectrum& s = test::spectrum6();
    std::mt19937_64 rng(23);
    for (double c : {0.8, 1.0, 1.4}) {
      const ConstraintSet cs = dual_constraints(s, c, 0.0, g);
      const RayleighMinimum rm = constrained_min_rayleigh(6, c, 0.0, cs, g);
      CHECK(norm_h1(rm.minimizer) == doctest::Approx(1.0).epsilon(1e-10));
      CHECK(rayleigh_quotient(rm.minimizer, 6, c) == doctest::Approx(rm.lambda).epsilon(1e-8));
      for (const Field& f : cs.fields()) CHECK(std::abs(inner_l2(f, rm.minimizer)) <= 1e-10);
      for (int k = 0; k < 20; ++k) {
        const Field v = project_out(test::random_bumps(g, rng), cs.fields());
        CAPTURE(c);
        CHECK(rayleigh_quotient(v, 6, c) >= rm.lambda - 1e-10);
      }
    }
  }

  TEST_CASE("degenerate constraint sets are rejected") {
    const Grid1D g(64.0, 1024);
    const Field qx = derivative(ground_state(6, 1.0, g, 0.0), 1);
    CHECK_THROWS_AS(ConstraintSet("dup", {qx, 2.0 * qx}), DomainError);
  }

  TEST_CASE("localized form reduces to (L v, v) for one soliton") {
    const Grid1D g(64.0, 1024);
    std::mt19937_64 rng(29);
    const Field v = test::random_bumps(g, rng);
    const SolitonEnsemble ens(6, {{1.0, 0.0}});
    const Field one(g, RVec(g.size(), 1.0));
    const std::vector<double> h = localized_form_H(v, ens, {0.0}, {one}, 0.0);
    REQUIRE(h.size() == 1);
    CHECK(h[0] == doctest::Approx(inner_l2(apply_L(v, 6), v)).epsilon(1e-10));
    CHECK_THROWS_AS(localized_form_H(v, ens, {0.0}, {0.5 * one}, 0.0), DomainError);
  }

  TEST_CASE("minimal composite constant") {
    const Grid1D g(80.0, 512);
    const EdgeSpectrum& s = test::spectrum6();
    const double k = minimal_composite_constant(s, 1.0, g);
    CHECK(k == doctest::Approx(46.8).epsilon(2e-3));
    // the inequality holds at K on random directions orthogonal to Q_x
    const ConstraintSet qx = translation_constraint(6, 1.0, 0.0, g);
    const Field zp = scaled_dual(s, 1.0, 0.0, 0.0, g, 1), zm = scaled_dual(s, 1.0, 0.0, 0.0, g, -1);
    std::mt19937_64 rng(31);
    for (int i = 0; i < 20; ++i) {
      const Field v = project_out(test::random_bumps(g, rng), qx.fields());
      const double lhs = norm_h1(v) * norm_h1(v);
      const double ap = inner_l2(v, zp), am = inner_l2(v, zm);
      const double rhs = k * inner_l2(apply_L(v, 6), v) + k * k * (ap * ap + am * am);
      CHECK(lhs <= rhs * (1.0 + 1e-6));
    }
  }
}

TEST_SUITE("evolver") {
  TEST_CASE("a soliton translates at speed c") {
    const Grid1D g(64.0, 1024);
    const SolitonParams sp{1.0, -4.0};
    EvolveOptions o;
    o.dt = 2.5e-4;
    const Trajectory tr = evolve(soliton_field(6, sp, 0.0, g), 6, 0.0, 1.0, o);
    CHECK(norm_h1(tr.samples.back().u - soliton_field(6, sp, 1.0, g)) <= 1e-6);
    CHECK(tr.max_mass_drift <= 1e-10);
    CHECK(tr.max_energy_drift <= 1e-9);
    CHECK(tr.samples.back().t == 1.0);
  }

  TEST_CASE("backward integration undoes forward integration") {
    const Grid1D g(64.0, 2048);
    std::mt19937_64 rng(37);
    const Field u0 = ground_state(6, 1.0, g, 0.0) + 0.05 * test::random_bumps(g, rng, 4, 5.0);
    EvolveOptions o;
    o.dt = 1e-4;
    o.check_conservation = false;
    const Trajectory fw = evolve(u0, 6, 0.0, 0.5, o);
    const Trajectory bw = evolve(fw.samples.back().u, 6, 0.5, 0.0, o);
    CHECK(bw.dt < 0.0);
    CHECK(norm_h1(bw.samples.back().u - u0) <= 1e-8);
  }

  TEST_CASE("two solitons conserve mass and energy") {
    const Grid1D g(128.0, 4096);
    const SolitonEnsemble ens(6, {{0.7, -20.0}, {1.3, 10.0}});
    EvolveOptions o;
    // the faster soliton needs a finer step than c = 1 to stay inside the budgets
    o.dt = 1.25e-4;
    o.sample_every = 400;
    const Trajectory tr = evolve(ensemble_field(ens, 0.0, g), 6, 0.0, 1.0, o);
    CHECK(tr.samples.size() >= 3);
    CHECK(tr.max_mass_drift <= 1e-10);
    CHECK(tr.max_energy_drift <= 1e-9);
  }

  TEST_CASE("step selection divides the interval evenly") {
    const Grid1D g(64.0, 1024);
    const Field u0 = ground_state(6, 1.0, g, 0.0);
    EvolveOptions o;
    o.dt = 0.003;
    for (double t1 : {0.1, 1.0, -0.7}) {
      const double h = choose_step(u0, 6, 0.0, t1, o);
      CHECK(std::abs(h) <= o.dt);
      CHECK((h > 0) == (t1 > 0));
      const double steps = t1 / h;
      CHECK(std::abs(steps - std::round(steps)) <= 1e-9);
    }
  }

  TEST_CASE("Kato identity agrees with the time derivative of the weighted mass") {
    const Grid1D g(64.0, 1024);
    std::mt19937_64 rng(41);
    const Field u0 = ground_state(6, 1.0, g, -2.0) + 0.1 * test::random_bumps(g, rng, 4, 6.0);
    EvolveOptions o;
    o.dt = 1e-4;
    o.check_conservation = false;
    const KatoWeight w = kato_weight(0.4, 1.0, g);
    auto central = [&](double d) {
      const double ip = weighted_l2(evolve(u0, 6, 0.0, d, o).samples.back().u, w.f);
      const double im = weighted_l2(evolve(u0, 6, 0.0, -d, o).samples.back().u, w.f);
      return (ip - im) / (2 * d);
    };
    // Richardson extrapolation removes the O(d^2) term of the central difference
    const double fd = (4.0 * central(1e-3) - central(2e-3)) / 3.0;
    const double rate = kato_rate(u0, 6, w.f, w.f_x, w.f_xxx);
    CHECK(std::abs(rate) > 1e-3);
    CHECK(fd == doctest::Approx(rate).epsilon(1e-7));
  }

  TEST_CASE("blow-up guard and unresolved data") {
    const Grid1D g(64.0, 1024);
    EvolveOptions o;
    o.h1_ceiling = 0.5;
    CHECK_THROWS_AS(evolve(ground_state(6, 1.0, g, 0.0), 6, 0.0, 0.1, o), EvolutionError);
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    RVec noise(g.size());
    for (double& x : noise) x = d(rng);
    CHECK_THROWS_AS(evolve(Field(g, noise), 6, 0.0, 0.1), DomainError);
  }
}
