#include "gkdv/coercivity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "gkdv/dense.hpp"
#include "gkdv/error.hpp"
#include "gkdv/simd.hpp"

namespace gkdv {
namespace {

/// Spectral second-derivative matrix; circulant, so built from one column.
Eigen::MatrixXd second_derivative_matrix(const Grid1D& grid) {
  const std::size_t n = grid.size();
  Field e(grid);
  e.mutable_values()[0] = 1.0;
  const Field col = derivative(e, 2);
  Eigen::MatrixXd d(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) d(i, j) = col[(i + n - j) % n];
  }
  return 0.5 * (d + d.transpose());
}

struct Forms {
  Eigen::MatrixXd a;  // dx (-D2 + c - pot)
  Eigen::MatrixXd b;  // dx (I - D2)
};

Forms quadratic_forms(int p, double c, double center, const Grid1D& grid) {
  const double dx = grid.dx();
  const Eigen::MatrixXd d2 = second_derivative_matrix(grid);
  const Field pot = potential(p, c, grid, center);
  Forms f;
  f.a = -dx * d2;
  f.b = -dx * d2;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    f.a(k, k) += dx * (c - pot[i]);
    f.b(k, k) += dx;
  }
  return f;
}

Eigen::VectorXd to_vector(const Field& f) {
  return Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
}

/// Householder basis whose trailing n - m columns span the complement of the constraints.
struct Projection {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr;
  Eigen::Index m;

  explicit Projection(const ConstraintSet& cs)
      : qr([&] {
          const auto n = static_cast<Eigen::Index>(cs.grid().size());
          Eigen::MatrixXd c(n, static_cast<Eigen::Index>(cs.size()));
          for (std::size_t j = 0; j < cs.size(); ++j) {
            c.col(static_cast<Eigen::Index>(j)) = to_vector(cs.fields()[j]);
          }
          return Eigen::HouseholderQR<Eigen::MatrixXd>(c);
        }()),
        m(static_cast<Eigen::Index>(cs.size())) {}

  /// Trailing block of H^T M H.
  Eigen::MatrixXd restrict(Eigen::MatrixXd mat) const {
    const auto h = qr.householderQ();
    mat.applyOnTheLeft(h.transpose());
    mat.applyOnTheRight(h);
    const Eigen::Index k = mat.rows() - m;
    Eigen::MatrixXd r = mat.bottomRightCorner(k, k);
    return 0.5 * (r + r.transpose());
  }

  Eigen::VectorXd lift(const Eigen::VectorXd& z) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(z.size() + m);
    v.tail(z.size()) = z;
    v.applyOnTheLeft(qr.householderQ());
    return v;
  }
};

}  // namespace

ConstraintSet::ConstraintSet(std::string name, std::vector<Field> fields)
    : name_(std::move(name)), fields_(std::move(fields)) {
  if (fields_.empty()) throw DomainError("constraint set must not be empty");
  const auto m = static_cast<Eigen::Index>(fields_.size());
  Eigen::MatrixXd g(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    require_same_grid(fields_[0], fields_[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < m; ++j) {
      const Field& a = fields_[static_cast<std::size_t>(i)];
      const Field& b = fields_[static_cast<std::size_t>(j)];
      const double na = norm_l2(a), nb = norm_l2(b);
      if (!(na > 0.0) || !(nb > 0.0)) throw DomainError("constraint set contains a zero field");
      g(i, j) = inner_l2(a, b) / (na * nb);
    }
  }
  gram_det_ = g.determinant();
  if (!(gram_det_ > 1e-10)) {
    throw DomainError("degenerate constraint set '" + name_ + "' (normalized Gram determinant " +
                      std::to_string(gram_det_) + ")");
  }
}

ConstraintSet dual_constraints(const EdgeSpectrum& spec, double c, double center,
                               const Grid1D& grid) {
  const ScaledDual dual(spec, c, grid);
  return ConstraintSet("Z+,Z-,Q_x",
                       {dual.at(center, +1), dual.at(center, -1),
                        derivative(ground_state(spec.p, c, grid, center), 1)});
}

ConstraintSet translation_constraint(int p, double c, double center, const Grid1D& grid) {
  return ConstraintSet("Q_x", {derivative(ground_state(p, c, grid, center), 1)});
}

ConstraintSet power_constraints(int p, double c, double center, const Grid1D& grid) {
  const Field q = ground_state(p, c, grid, center);
  RVec w(grid.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::pow(q[i], 0.5 * (p + 1));
  return ConstraintSet("Q^((p+1)/2),Q_x", {Field(grid, std::move(w)), derivative(q, 1)});
}

RayleighMinimum constrained_min_rayleigh(int p, double c, double center,
                                         const ConstraintSet& constraints, const Grid1D& grid) {
  if (constraints.grid() != grid) throw GridError("constraints live on a different grid");
  if (constraints.size() >= grid.size()) throw DomainError("too many constraints for the grid");
  const Forms f = quadratic_forms(p, c, center, grid);
  const Projection proj(constraints);
  const dense::PencilMinimum pm =
      dense::smallest_pencil_eigenpair(proj.restrict(f.a), proj.restrict(f.b));
  Eigen::VectorXd v = proj.lift(pm.vector);
  Field out(grid, RVec(v.data(), v.data() + v.size()));
  out *= 1.0 / norm_h1(out);
  return {pm.value, std::move(out)};
}

double rayleigh_quotient(const Field& v, int p, double c, double center) {
  const double h1 = norm_h1(v);
  if (!(h1 > 0.0)) throw DomainError("Rayleigh quotient of the zero field");
  return inner_l2(apply_L(v, p, c, center), v) / (h1 * h1);
}

std::vector<double> localized_form_H(const Field& v, const SolitonEnsemble& ens,
                                     const std::vector<double>& y,
                                     const std::vector<Field>& weights, double t) {
  const std::size_t n = ens.size();
  if (weights.size() != n) throw DomainError("one weight per soliton is required");
  if (!y.empty() && y.size() != n) throw DomainError("one offset per soliton is required");
  const Grid1D& grid = v.grid();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double s = 0.0;
    for (const Field& w : weights) s += w[i];
    if (std::abs(s - 1.0) > 1e-12) {
      throw DomainError("weights are not a partition of unity at x = " +
                        std::to_string(grid.x(i)));
    }
  }
  const Field vx = derivative(v, 1);
  const auto& kt = simd::active();
  const double dx = grid.dx();
  std::vector<double> h(n);
  RVec pot(grid.size());
  for (std::size_t j = 0; j < n; ++j) {
    require_same_grid(v, weights[j]);
    const double yj = y.empty() ? 0.0 : y[j];
    const Field r = ground_state(ens.p(), ens[j].c, grid, ens.center(j, t) + yj);
    kt.ipow(r.data(), pot.data(), grid.size(), ens.p() - 1);
    double acc = kt.dot3(vx.data(), vx.data(), weights[j].data(), grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      acc += (ens[j].c - ens.p() * pot[i]) * v[i] * v[i] * weights[j][i];
    }
    h[j] = acc * dx;
  }
  return h;
}

double minimal_composite_constant(const EdgeSpectrum& spec, double c, const Grid1D& grid,
                                  double rel_tol) {
  const Forms f = quadratic_forms(spec.p, c, 0.0, grid);
  const Projection proj(translation_constraint(spec.p, c, 0.0, grid));
  const Eigen::MatrixXd a = proj.restrict(f.a);
  const Eigen::MatrixXd b = proj.restrict(f.b);
  const ScaledDual dual(spec, c, grid);
  const double dx = grid.dx();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(grid.size(), grid.size());
  for (int sign : {+1, -1}) {
    const Eigen::VectorXd z = dx * to_vector(dual.centered(sign));
    g.noalias() += z * z.transpose();
  }
  const Eigen::MatrixXd gp = proj.restrict(g);

  // K is admissible iff min over the pencil (K a + K^2 g, b) is >= 1.
  auto admissible = [&](double k) {
    return dense::smallest_pencil_eigenpair(k * a + k * k * gp, b).value >= 1.0;
  };
  double hi = 1.0;
  while (!admissible(hi)) {
    hi *= 2.0;
    if (hi > 1e12) throw NumericalError("no admissible composite constant found");
  }
  double lo = 0.0;
  while (hi - lo > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    (admissible(mid) ? hi : lo) = mid;
  }
  return hi;
}

double composite_constant(const EdgeSpectrum& spec, const std::vector<double>& speeds,
                          const Grid1D& grid) {
  if (speeds.empty()) throw DomainError("at least one speed is required");
  double k = 0.0;
  for (double c : speeds) k = std::max(k, minimal_composite_constant(spec, c, grid));
  return kCompositeMargin * k;
}

}  // namespace gkdv
