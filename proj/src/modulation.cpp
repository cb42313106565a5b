#include "gkdv/modulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gkdv/error.hpp"

namespace gkdv {
namespace {

double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

Modulator::Modulator(SolitonEnsemble ens, const EdgeSpectrum& spectrum, const Grid1D& grid,
                     ModulationOptions opts)
    : ens_(std::move(ens)), grid_(grid), opts_(opts), eps_(opts.eps), e0_(spectrum.e0) {
  if (spectrum.p != ens_.p()) throw DomainError("edge spectrum computed for a different p");
  gram_ = inner_l2(spectrum.Zplus, spectrum.Zminus);
  double min_norm = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < ens_.size(); ++j) {
    const double c = ens_[j].c;
    const Field q = ground_state(ens_.p(), c, grid_, 0.0, opts_.wrap_tol);
    min_norm = std::min(min_norm, norm_l2(q));
    q_hat_.push_back(q.spectrum());
    q_extent_.push_back(tail_extent(ens_.p(), c, opts_.wrap_tol));
    duals_.emplace_back(spectrum, c, grid_, opts_.wrap_tol);
    const Field& zp = duals_.back().centered(+1);
    dual_norm2_.push_back(inner_l2(zp, zp));
  }
  if (!(eps_ > 0.0)) eps_ = 0.1 * min_norm;
}

double Modulator::center(std::size_t j, double t, double y) const {
  return ens_.center(j, t) + y;
}

Field Modulator::shifted(const CVec& centered, double s, int deriv) const {
  CVec c = centered;
  apply_shift(grid_, c, s);
  if (deriv > 0) apply_derivative(grid_, c, deriv);
  return Field::from_spectrum(grid_, c);
}

Field Modulator::soliton(std::size_t j, double t, double y, int deriv) const {
  const double s = center(j, t, y);
  const double half = 0.5 * grid_.length();
  if (s - q_extent_[j] < -half || s + q_extent_[j] > half) {
    throw DomainError("soliton centered at " + std::to_string(s) + " leaves the safe region");
  }
  return shifted(q_hat_[j], s, deriv);
}

Field Modulator::dual(std::size_t j, double t, double y, int sign) const {
  return duals_[j].at(center(j, t, y), sign);
}

Field Modulator::profile_sum(double t, const std::vector<double>& y) const {
  Field r(grid_);
  for (std::size_t j = 0; j < size(); ++j) r += soliton(j, t, y.empty() ? 0.0 : y[j]);
  return r;
}

Field Modulator::reference(double t) const { return profile_sum(t, {}); }

ModulationState Modulator::decompose(const Field& u, double t, std::vector<double> y) const {
  if (u.grid() != grid_) throw GridError("field lives on a different grid than the modulator");
  const std::size_t n = size();
  if (y.empty()) y.assign(n, 0.0);
  if (y.size() != n) throw DomainError("initial modulation guess has the wrong length");

  const double distance = norm_l2(u - reference(t));
  if (opts_.enforce_radius && !(distance < eps_)) {
    throw DomainError("outside modulation radius: ||u - R|| = " + std::to_string(distance) +
                      " >= " + std::to_string(eps_));
  }

  struct Eval {
    Field w;
    std::vector<Field> rx, rxx;
    Eigen::VectorXd phi;
    double scaled;  // max_j |phi_j| / ||R~_{j,x}||
  };
  auto evaluate = [&](const std::vector<double>& yy) {
    Eval e{u, {}, {}, Eigen::VectorXd(static_cast<Eigen::Index>(n)), 0.0};
    for (std::size_t j = 0; j < n; ++j) {
      e.w -= soliton(j, t, yy[j]);
      e.rx.push_back(soliton(j, t, yy[j], 1));
      e.rxx.push_back(soliton(j, t, yy[j], 2));
    }
    for (std::size_t j = 0; j < n; ++j) {
      e.phi[static_cast<Eigen::Index>(j)] = inner_l2(e.w, e.rx[j]);
      e.scaled = std::max(e.scaled, std::abs(e.phi[static_cast<Eigen::Index>(j)]) /
                                        norm_l2(e.rx[j]));
    }
    return e;
  };
  // Roundoff floor of the orthogonality residual.
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * norm_l2(u);

  Eval cur = evaluate(y);
  int it = 0;
  bool converged = false;
  for (; it < opts_.max_iterations; ++it) {
    const double wn = norm_l2(cur.w);
    if (cur.scaled <= std::max(opts_.residual_tol * std::min(wn, 1.0), floor)) {
      converged = true;
      break;
    }
    Eigen::MatrixXd jac(n, n);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        double v = inner_l2(cur.rx[k], cur.rx[j]);
        if (j == k) v -= inner_l2(cur.w, cur.rxx[j]);
        jac(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = v;
      }
    }
    const Eigen::VectorXd step = jac.partialPivLu().solve(-cur.phi);
    if (!step.allFinite()) throw NumericalError("modulation Jacobian is singular");
    double lambda = 1.0;
    std::vector<double> trial(n);
    Eval next = cur;
    bool accepted = false;
    for (int h = 0; h < 12; ++h, lambda *= 0.5) {
      for (std::size_t j = 0; j < n; ++j) trial[j] = y[j] + lambda * step[static_cast<Eigen::Index>(j)];
      next = evaluate(trial);
      if (next.phi.norm() < cur.phi.norm() || next.scaled <= floor) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No decrease along the Newton direction: accept only at the roundoff floor.
      if (cur.scaled <= 1e3 * floor) {
        converged = true;
        break;
      }
      throw NumericalError("modulation Newton iteration stalled at residual " +
                           std::to_string(cur.scaled));
    }
    y = trial;
    cur = std::move(next);
    if (lambda * max_abs(step) <= opts_.step_tol) {
      converged = true;
      ++it;
      break;
    }
  }
  if (!converged) {
    const double wn = norm_l2(cur.w);
    if (cur.scaled > std::max(opts_.residual_tol * std::min(wn, 1.0), floor)) {
      throw NumericalError("modulation Newton iteration did not converge (residual " +
                           std::to_string(cur.scaled) + ")");
    }
  }
  ModulationState st{t, y, cur.w, {}, {}, it, cur.scaled, distance};
  unstable_coeffs(st.v, t, st.y, st.a_plus, st.a_minus);
  return st;
}

void Modulator::unstable_coeffs(const Field& v, double t, const std::vector<double>& y,
                                std::vector<double>& a_plus,
                                std::vector<double>& a_minus) const {
  const std::size_t n = size();
  a_plus.assign(n, 0.0);
  a_minus.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double yj = y.empty() ? 0.0 : y[j];
    a_plus[j] = inner_l2(v, dual(j, t, yj, +1));
    a_minus[j] = inner_l2(v, dual(j, t, yj, -1));
  }
}

Eigen::MatrixXd Modulator::gram_P() const {
  const auto n = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double a = dual_norm2_[static_cast<std::size_t>(j)];
    p(j, j) = a;
    p(n + j, n + j) = a;
    p(j, n + j) = gram_ * a;
    p(n + j, j) = gram_ * a;
  }
  return p;
}

Field Modulator::final_field(const Eigen::VectorXd& b, double Sn) const {
  const std::size_t n = size();
  if (static_cast<std::size_t>(b.size()) != 2 * n) throw DomainError("b has the wrong length");
  Field u = reference(Sn);
  for (std::size_t j = 0; j < n; ++j) {
    const double bp = b[static_cast<Eigen::Index>(j)];
    const double bm = b[static_cast<Eigen::Index>(n + j)];
    if (bp != 0.0) u.axpy(bp, dual(j, Sn, 0.0, +1));
    if (bm != 0.0) u.axpy(bm, dual(j, Sn, 0.0, -1));
  }
  return u;
}

Eigen::VectorXd Modulator::final_map(const Eigen::VectorXd& b, double Sn) const {
  const ModulationState st = decompose(final_field(b, Sn), Sn);
  const std::size_t n = size();
  Eigen::VectorXd a(static_cast<Eigen::Index>(2 * n));
  for (std::size_t j = 0; j < n; ++j) {
    a[static_cast<Eigen::Index>(j)] = st.a_plus[j];
    a[static_cast<Eigen::Index>(n + j)] = st.a_minus[j];
  }
  return a;
}

Eigen::MatrixXd Modulator::final_data_jacobian(double Sn, double h) const {
  const auto m = static_cast<Eigen::Index>(2 * size());
  Eigen::MatrixXd jac(m, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    b[k] = h;
    const Eigen::VectorXd fp = final_map(b, Sn);
    b[k] = -h;
    const Eigen::VectorXd fm = final_map(b, Sn);
    jac.col(k) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

FinalData Modulator::final_data(const std::vector<double>& a_hat, double Sn,
                                const FinalDataOptions& fo) const {
  const std::size_t n = size();
  if (a_hat.size() != n) throw DomainError("a_hat must have one entry per soliton");
  bool outside = false;
  if (fo.ball_radius > 0.0) {
    double norm = 0.0;
    for (double a : a_hat) norm += a * a;
    norm = std::sqrt(norm);
    if (norm > 10.0 * fo.ball_radius) {
      throw DomainError("a_hat out of ball: |a_hat| = " + std::to_string(norm));
    }
    outside = norm > fo.ball_radius;
  }
  const auto m = static_cast<Eigen::Index>(2 * n);
  Eigen::VectorXd target = Eigen::VectorXd::Zero(m);
  for (std::size_t j = 0; j < n; ++j) target[static_cast<Eigen::Index>(j)] = a_hat[j];

  Eigen::MatrixXd jac = gram_P();
  Eigen::VectorXd b = jac.partialPivLu().solve(target);
  Eigen::VectorXd f = final_map(b, Sn) - target;
  int it = 0;
  while (max_abs(f) > fo.tol) {
    if (++it > fo.max_iterations) {
      throw NumericalError("final data solve did not converge (residual " +
                           std::to_string(max_abs(f)) + ")");
    }
    const Eigen::VectorXd db = jac.partialPivLu().solve(-f);
    b += db;
    const Eigen::VectorXd fn = final_map(b, Sn) - target;
    const double dd = db.squaredNorm();
    if (dd > 0.0) jac += ((fn - f) - jac * db) * db.transpose() / dd;
    f = fn;
  }
  return FinalData{Sn, std::vector<double>(b.data(), b.data() + b.size()), final_field(b, Sn),
                   max_abs(f), it, outside};
}

ModulationState decompose(const Field& u, const SolitonEnsemble& ens, double t,
                          const std::vector<double>& y_guess, const EdgeSpectrum& spectrum,
                          const ModulationOptions& opts) {
  return Modulator(ens, spectrum, u.grid(), opts).decompose(u, t, y_guess);
}

FinalData final_data(const std::vector<double>& a_hat, const SolitonEnsemble& ens, double Sn,
                     const EdgeSpectrum& spectrum, const Grid1D& grid,
                     const FinalDataOptions& opts) {
  return Modulator(ens, spectrum, grid).final_data(a_hat, Sn, opts);
}

}  // namespace gkdv
