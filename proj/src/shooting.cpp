#include "gkdv/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <numbers>

#include <Eigen/Dense>
#include "json.hpp"

#include "gkdv/coercivity.hpp"
#include "gkdv/error.hpp"
#include "gkdv/simd.hpp"

namespace gkdv {
namespace {

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double sech(double x) {
  const double e = std::exp(-std::abs(x));
  return 2.0 * e / (1.0 + e * e);
}

/// Time at which the largest tube ratio crosses 1 between two checks,
/// interpolating log(ratio) linearly in t.
double crossing_time(double t_prev, double r_prev, double t_cur, double r_cur) {
  if (!(r_cur > r_prev)) return t_cur;
  double s;
  if (r_prev > 0.0) {
    s = -std::log(r_prev) / (std::log(r_cur) - std::log(r_prev));
  } else {
    s = 1.0 / r_cur;
  }
  return t_prev + std::clamp(s, 0.0, 1.0) * (t_cur - t_prev);
}

}  // namespace

double TubeSpec::rate() const { return std::pow(sigma0, 1.5); }

double TubeSpec::ball() const { return r_ap * std::exp(-1.5 * rate() * Sn); }

void TubeSpec::validate() const {
  if (!(sigma0 > 0.0)) throw DomainError("sigma0 must be positive");
  if (!(eps > 0.0)) throw DomainError("closeness radius must be positive");
  if (!(T0 < Sn)) throw DomainError("the window needs T0 < Sn");
  if (!(r_v > 0.0 && r_y > 0.0 && r_am > 0.0 && r_ap > 0.0)) {
    throw DomainError("tube radii must be positive");
  }
}

std::string to_string(TubeCondition c) {
  switch (c) {
    case TubeCondition::None: return "none";
    case TubeCondition::Closeness: return "closeness";
    case TubeCondition::VBall: return "v_ball";
    case TubeCondition::YBall: return "y_ball";
    case TubeCondition::AMinusBall: return "a_minus_ball";
    case TubeCondition::APlusSphere: return "a_plus_sphere";
  }
  return "unknown";
}

double TubeStatus::max_ratio() const { return *std::max_element(ratios.begin(), ratios.end()); }

double compute_sigma0(const SolitonEnsemble& ens, const EdgeSpectrum& spectrum) {
  const double c1 = ens[0].c;
  double m = std::min({spectrum.eta0, std::pow(spectrum.e0, 2.0 / 3.0) * c1, c1});
  for (std::size_t j = 1; j < ens.size(); ++j) m = std::min(m, ens[j].c - ens[j - 1].c);
  return 0.25 * m;
}

double default_T0(double sigma0) { return std::max(4.0, 2.0 / std::pow(sigma0, 1.5)); }

double default_separation(double sigma0) { return 20.0 / std::sqrt(sigma0); }

SolitonEnsemble place_ensemble(const EdgeSpectrum& spectrum, const std::vector<double>& speeds,
                               const Grid1D& grid, double T0, double Sn, double separation) {
  std::vector<SolitonParams> params;
  for (double c : speeds) params.push_back({c, 0.0});
  const SolitonEnsemble probe(spectrum.p, params);
  if (!(separation > 0.0)) separation = default_separation(compute_sigma0(probe, spectrum));
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t j = 0; j < params.size(); ++j) {
    params[j].x0 = static_cast<double>(j) * separation - params[j].c * Sn;
    const ScaledDual dual(spectrum, params[j].c, grid);
    for (double t : {T0, Sn}) {
      const double z = params[j].c * t + params[j].x0;
      lo = std::min(lo, z - dual.extent_left());
      hi = std::max(hi, z + dual.extent_right());
    }
  }
  if (hi - lo >= grid.length()) {
    throw DomainError("domain of length " + std::to_string(grid.length()) +
                      " is too small for the ensemble over the window (needs " +
                      std::to_string(hi - lo) + ")");
  }
  const double shift = -0.5 * (lo + hi);
  for (SolitonParams& s : params) s.x0 += shift;
  return SolitonEnsemble(spectrum.p, params);
}

TubeStatus tube_check(const ModulationState& st, double distance, const TubeSpec& spec) {
  const double r = spec.rate();
  const double t = st.t;
  TubeStatus s;
  s.ratios[0] = distance / spec.eps;
  s.ratios[1] = std::exp(r * t) * norm_h1(st.v) / spec.r_v;
  s.ratios[2] = std::exp(r * t) * norm2(st.y) / spec.r_y;
  s.ratios[3] = std::exp(1.5 * r * t) * norm2(st.a_minus) / spec.r_am;
  s.ratios[4] = std::exp(1.5 * r * t) * norm2(st.a_plus) / spec.r_ap;
  s.margin = 1.0 - s.max_ratio();
  for (std::size_t k = 0; k < s.ratios.size(); ++k) {
    if (!(s.ratios[k] <= 1.0)) {
      s.inside = false;
      s.failed = static_cast<TubeCondition>(k + 1);
      break;
    }
  }
  return s;
}

TubeStatus tube_check(const ModulationState& st, const Field& u, const Field& reference,
                      const TubeSpec& spec) {
  return tube_check(st, norm_h1(u - reference), spec);
}

double cutoff(double a, double x) {
  return (2.0 / std::numbers::pi) * std::atan(std::exp(-a * x));
}

double cutoff_dx(double a, double x) { return -(a / std::numbers::pi) * sech(a * x); }

double cutoff_dxxx(double a, double x) {
  const double s = sech(a * x);
  return -(a * a * a / std::numbers::pi) * s * (1.0 - 2.0 * s * s);
}

std::vector<double> interface_points(const SolitonEnsemble& ens, const std::vector<double>& y,
                                     double t) {
  std::vector<double> m;
  for (std::size_t j = 0; j + 1 < ens.size(); ++j) {
    const double yj = y.empty() ? 0.0 : y[j];
    const double yk = y.empty() ? 0.0 : y[j + 1];
    m.push_back(0.5 * (ens.center(j, t) + ens.center(j + 1, t) + yj + yk));
  }
  return m;
}

PartitionWeights diagnostics_weights(const SolitonEnsemble& ens, const std::vector<double>& y,
                                     double t, double sigma0, const Grid1D& grid) {
  const double a = std::sqrt(sigma0);
  const std::vector<double> m = interface_points(ens, y, t);
  PartitionWeights w;
  for (double mj : m) {
    w.psi.push_back(Field::from_function(grid, [&](double x) { return cutoff(a, x - mj); }));
  }
  w.psi.push_back(Field(grid, RVec(grid.size(), 1.0)));
  for (std::size_t j = 0; j < w.psi.size(); ++j) {
    w.phi.push_back(j == 0 ? w.psi[0] : w.psi[j] - w.psi[j - 1]);
  }
  return w;
}

KatoWeight kato_weight(double a, double m, const Grid1D& grid) {
  return {Field::from_function(grid, [&](double x) { return cutoff(a, x - m); }),
          Field::from_function(grid, [&](double x) { return cutoff_dx(a, x - m); }),
          Field::from_function(grid, [&](double x) { return cutoff_dxxx(a, x - m); })};
}

LocalFunctionals localized_functionals(const Field& u, const std::vector<Field>& phi, int p) {
  const auto& kt = simd::active();
  const std::size_t n = u.size();
  const double dx = u.grid().dx();
  const Field ux = derivative(u, 1);
  RVec up(n);
  kt.ipow(u.data(), up.data(), n, p + 1);
  LocalFunctionals lf;
  for (const Field& w : phi) {
    require_same_grid(u, w);
    lf.M.push_back(kt.dot3(u.data(), u.data(), w.data(), n) * dx);
    lf.E.push_back((0.5 * kt.dot3(ux.data(), ux.data(), w.data(), n) -
                    kt.dot(up.data(), w.data(), n) / (p + 1.0)) *
                   dx);
  }
  return lf;
}

DecayFit fit_log_linear(const std::vector<double>& t, const std::vector<double>& values,
                        double t_lo, double t_hi) {
  double st = 0, sy = 0, stt = 0, sty = 0, syy = 0;
  std::size_t k = 0;
  for (std::size_t i = 0; i < t.size() && i < values.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi || !(values[i] > 0.0)) continue;
    const double y = std::log(values[i]);
    st += t[i];
    sy += y;
    stt += t[i] * t[i];
    sty += t[i] * y;
    syy += y * y;
    ++k;
  }
  DecayFit f;
  f.points = k;
  if (k < 3) return f;
  const double n = static_cast<double>(k);
  const double vt = stt - st * st / n;
  const double vy = syy - sy * sy / n;
  const double cty = sty - st * sy / n;
  if (!(vt > 0.0)) return f;
  f.slope = cty / vt;
  f.intercept = (sy - f.slope * st) / n;
  f.r2 = vy > 0.0 ? cty * cty / (vt * vy) : 1.0;
  return f;
}

EvolveOptions ShootOptions::default_evolve() {
  EvolveOptions e;
  e.dt = 2.5e-4;
  e.check_conservation = false;
  return e;
}

Shooter::Shooter(SolitonEnsemble ens, const EdgeSpectrum& spectrum, const Grid1D& grid,
                 TubeSpec tube, ShootOptions opts)
    : spectrum_(spectrum), mod_(std::move(ens), spectrum, grid), tube_(tube), opts_(opts) {
  if (!(tube_.sigma0 > 0.0)) tube_.sigma0 = compute_sigma0(mod_.ensemble(), spectrum);
  if (!(tube_.eps > 0.0)) tube_.eps = mod_.eps();
  tube_.validate();
}

Shooter Shooter::with_window(double T0, double Sn) const {
  TubeSpec t = tube_;
  t.T0 = T0;
  t.Sn = Sn;
  return Shooter(mod_.ensemble(), spectrum_, mod_.grid(), t, opts_);
}

ShootResult Shooter::backward_run_from(const Field& u_Sn, bool integrate_past) const {
  const SolitonEnsemble& ens = mod_.ensemble();
  const int p = ens.p();
  ShootResult res;
  res.Sn = tube_.Sn;
  res.T0 = tube_.T0;
  res.sigma0 = tube_.sigma0;
  res.T_exit = tube_.T0;

  EvolveOptions eo = opts_.evolve;
  const double h = choose_step(u_Sn, p, tube_.Sn, tube_.T0, eo);
  res.dt = h;
  eo.observe_every =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(opts_.check_interval / std::abs(h))));
  eo.sample_every = 0;

  std::vector<double> y_prev;
  bool exited = false;
  bool aborted = false;

  auto check = [&](double t, const Field& u) {
    CheckRecord rec;
    rec.t = t;
    rec.distance = norm_h1(u - mod_.reference(t));
    std::optional<ModulationState> st;
    if (rec.distance <= opts_.abort_factor * tube_.eps) {
      try {
        st = mod_.decompose(u, t, y_prev);
      } catch (const DomainError&) {
      } catch (const NumericalError&) {
      }
    }
    if (st) {
      y_prev = st->y;
      rec.status = tube_check(*st, rec.distance, tube_);
      rec.v_h1 = norm_h1(st->v);
      rec.y = st->y;
      rec.a_plus = st->a_plus;
      rec.a_minus = st->a_minus;
      if (opts_.diagnostics) {
        const PartitionWeights w = diagnostics_weights(ens, st->y, t, tube_.sigma0, mod_.grid());
        const LocalFunctionals lf = localized_functionals(u, w.phi, p);
        rec.M = lf.M;
        rec.E = lf.E;
        rec.H = localized_form_H(st->v, ens, st->y, w.phi, t);
        rec.variation_lhs = rec.v_h1 * rec.v_h1;
        if (opts_.K > 0.0) {
          double sh = 0.0, sa = 0.0;
          for (double x : rec.H) sh += x;
          for (std::size_t j = 0; j < ens.size(); ++j) {
            sa += st->a_plus[j] * st->a_plus[j] + st->a_minus[j] * st->a_minus[j];
          }
          rec.variation_rhs = opts_.K * sh + opts_.K * opts_.K * sa;
        }
      }
    } else {
      // Modulation is unavailable this far from R(t): an effective closeness exit.
      rec.status.inside = false;
      rec.status.failed = TubeCondition::Closeness;
      rec.status.ratios[0] = std::max(rec.distance / tube_.eps, 1.0 + 1e-12);
      rec.status.margin = 1.0 - rec.status.ratios[0];
    }
    if (!rec.status.inside && !exited) {
      exited = true;
      res.exit_condition = rec.status.failed;
      if (res.log.empty()) {
        res.T_exit = tube_.Sn;
      } else {
        const CheckRecord& prev = res.log.back();
        res.T_exit =
            crossing_time(prev.t, prev.status.max_ratio(), t, rec.status.max_ratio());
      }
      res.a_plus_exit = rec.a_plus.empty() && !res.log.empty() ? res.log.back().a_plus
                                                               : rec.a_plus;
    }
    if (rec.distance > opts_.abort_factor * tube_.eps) aborted = true;
    res.log.push_back(std::move(rec));
    if (aborted) return false;
    return integrate_past || !exited;
  };

  Trajectory traj = evolve(u_Sn, p, tube_.Sn, tube_.T0, eo,
                           [&](std::size_t, double t, const Field& u) { return check(t, u); });
  res.max_mass_drift = traj.max_mass_drift;
  res.max_energy_drift = traj.max_energy_drift;
  const Sample& last = traj.samples.back();
  if (!traj.stopped_early && res.log.back().t != last.t) check(last.t, last.u);
  res.u_final = last.u;
  res.reached_T0 = !traj.stopped_early && last.t == tube_.T0 && !aborted;
  if (res.reached_T0) res.a_plus_T0 = res.log.back().a_plus;
  if (aborted) res.note = "integration aborted far outside the tube";
  res.success = res.reached_T0 && !exited;
  if (res.success) {
    res.T_exit = tube_.T0;
    res.a_plus_exit = res.a_plus_T0;
    std::vector<double> ts, ds;
    for (const CheckRecord& r : res.log) {
      ts.push_back(r.t);
      ds.push_back(r.distance);
    }
    res.decay = fit_log_linear(ts, ds, tube_.T0 + 2.0, tube_.Sn - 2.0);
  }
  return res;
}

ShootResult Shooter::backward_run(const std::vector<double>& a_hat, bool integrate_past) const {
  const double ball = tube_.ball();
  if (norm2(a_hat) > opts_.ball_factor * ball) {
    throw DomainError("a_hat outside " + std::to_string(opts_.ball_factor) +
                      " times the admissible ball");
  }
  FinalDataOptions fo;
  fo.ball_radius = opts_.ball_factor * ball / 10.0;
  const FinalData fd = mod_.final_data(a_hat, tube_.Sn, fo);
  ShootResult res = backward_run_from(fd.u, integrate_past);
  res.a_hat = a_hat;
  res.b = fd.b;
  return res;
}

ShootResult Shooter::backward_run(const std::vector<double>& a_hat) const {
  return backward_run(a_hat, opts_.integrate_past);
}

ShootResult Shooter::find_a_hat(std::vector<double> seed) const {
  const std::size_t n = mod_.size();
  if (seed.empty()) seed.assign(n, 0.0);
  if (seed.size() != n) throw DomainError("seed must have one entry per soliton");
  return n == 1 ? bisect(seed[0]) : broyden(std::move(seed));
}

ShootResult Shooter::bisect(double seed) const {
  const double r = tube_.ball();
  double lo = seed - r, hi = seed + r;
  auto run = [this](double a) { return backward_run({a}, false); };
  auto side = [](const ShootResult& s) {
    if (s.a_plus_exit.empty()) throw NumericalError("exit without an a+ reading");
    return s.a_plus_exit[0] > 0.0 ? 1 : -1;
  };
  ShootResult r_lo, r_hi;
  if (opts_.threads > 1) {
    auto f_lo = std::async(std::launch::async, run, lo);
    r_hi = run(hi);
    r_lo = f_lo.get();
  } else {
    r_lo = run(lo);
    r_hi = run(hi);
  }
  int runs = 2;
  for (ShootResult* s : {&r_lo, &r_hi}) {
    if (s->success) {
      s->runs = runs;
      return std::move(*s);
    }
  }
  int s_lo = side(r_lo);
  const int s_hi = side(r_hi);
  if (s_lo == s_hi) {
    throw NumericalError("bracket not found: both probes exit with the same sign of a+");
  }
  for (int it = 0; it < opts_.max_bisection; ++it) {
    const double mid = 0.5 * (lo + hi);
    ShootResult s = run(mid);
    ++runs;
    if (s.success) {
      s.runs = runs;
      return s;
    }
    if (side(s) == s_lo) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  throw NumericalError("bisection did not find a tube-preserving a_hat");
}

ShootResult Shooter::broyden(std::vector<double> seed) const {
  const std::size_t n = mod_.size();
  const auto m = static_cast<Eigen::Index>(n);
  const SolitonEnsemble& ens = mod_.ensemble();
  const double window = tube_.Sn - tube_.T0;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    jac(j, j) = std::exp(mod_.e0() * std::pow(ens[static_cast<std::size_t>(j)].c, 1.5) * window);
  }
  const double sphere_T0 = tube_.r_ap * std::exp(-1.5 * tube_.rate() * tube_.T0);
  const double tol = opts_.broyden_tol * sphere_T0;
  const double limit = opts_.ball_factor * tube_.ball();

  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(seed.data(), m);
  auto eval = [&](const Eigen::VectorXd& x, ShootResult& out) {
    out = backward_run(std::vector<double>(x.data(), x.data() + x.size()), true);
    if (!out.reached_T0) {
      throw NumericalError("integrate-past run aborted before T0 (" + out.note + ")");
    }
    return Eigen::Map<const Eigen::VectorXd>(out.a_plus_T0.data(), m).eval();
  };
  ShootResult cur;
  Eigen::VectorXd g = eval(a, cur);
  int runs = 1;
  for (int it = 0; it <= opts_.max_broyden; ++it) {
    if (g.norm() <= tol) {
      if (!cur.success) {
        cur = backward_run(std::vector<double>(a.data(), a.data() + a.size()), false);
        ++runs;
        if (!cur.success) {
          throw NumericalError("tube validation failed after root-finding (exit at t = " +
                               std::to_string(cur.T_exit) + ", " +
                               to_string(cur.exit_condition) + ")");
        }
      }
      cur.runs = runs;
      return cur;
    }
    if (it == opts_.max_broyden) break;
    Eigen::VectorXd step = jac.partialPivLu().solve(-g);
    if (!step.allFinite()) throw NumericalError("Broyden Jacobian became singular");
    // Damp steps that would leave the admissible ball.
    const double len = (a + step).norm();
    if (len > limit) step *= limit / len;
    const Eigen::VectorXd a_next = a + step;
    ShootResult next;
    const Eigen::VectorXd g_next = eval(a_next, next);
    ++runs;
    const double ss = step.squaredNorm();
    if (ss > 0.0) jac += ((g_next - g) - jac * step) * step.transpose() / ss;
    a = a_next;
    g = g_next;
    cur = std::move(next);
  }
  throw NumericalError("Broyden stagnated: |a+(T0)| = " + std::to_string(g.norm()) +
                       " above " + std::to_string(tol));
}

std::vector<ShootResult> continuation(const Shooter& base, const std::vector<double>& Sn_list,
                                      bool fixed_T0) {
  std::vector<ShootResult> out;
  const double offset = base.tube().Sn - base.tube().T0;
  std::vector<double> seed;
  double prev_Sn = 0.0;
  for (double Sn : Sn_list) {
    const double T0 = fixed_T0 ? base.tube().T0 : Sn - offset;
    const Shooter sh = base.with_window(T0, Sn);
    if (!out.empty()) {
      const double f = std::exp(-1.5 * sh.tube().rate() * (Sn - prev_Sn));
      for (double& a : seed) a *= f;
    }
    out.push_back(sh.find_a_hat(seed));
    seed = out.back().a_hat;
    prev_Sn = Sn;
  }
  return out;
}

std::string shoot_result_json(const ShootResult& r) {
  nlohmann::json j;
  j["a_hat_plus"] = r.a_hat;
  j["Sn"] = r.Sn;
  j["T0"] = r.T0;
  j["sigma0"] = r.sigma0;
  j["b"] = r.b;
  j["success"] = r.success;
  j["reached_T0"] = r.reached_T0;
  j["T_exit"] = r.T_exit;
  j["exit_condition"] = to_string(r.exit_condition);
  j["a_plus_exit"] = r.a_plus_exit;
  j["a_plus_T0"] = r.a_plus_T0;
  j["decay_fit"] = {{"slope", r.decay.slope},
                    {"intercept", r.decay.intercept},
                    {"r2", r.decay.r2},
                    {"points", r.decay.points}};
  j["max_mass_drift"] = r.max_mass_drift;
  j["max_energy_drift"] = r.max_energy_drift;
  j["dt"] = r.dt;
  j["runs"] = r.runs;
  j["checks"] = r.log.size();
  if (!r.note.empty()) j["note"] = r.note;
  return j.dump(2);
}

void write_shoot_result(const ShootResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "result.json");
    f << shoot_result_json(r) << '\n';
    if (!f) throw Error("cannot write " + (dir / "result.json").string());
  }
  std::ofstream f(dir / "series.csv");
  const std::size_t n = r.a_hat.size();
  f << "t,distance_h1,v_h1";
  auto cols = [&](const char* name, std::size_t k) {
    for (std::size_t j = 1; j <= k; ++j) f << ',' << name << '_' << j;
  };
  cols("y", n);
  cols("a_plus", n);
  cols("a_minus", n);
  f << ",inside,failed,margin,r_close,r_v,r_y,r_am,r_ap";
  cols("M", n);
  cols("E", n);
  cols("H", n);
  f << ",variation_lhs,variation_rhs\n";
  char buf[32];
  auto num = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    f << ',' << buf;
  };
  auto vec = [&](const std::vector<double>& v) {
    for (std::size_t j = 0; j < n; ++j) num(j < v.size() ? v[j] : std::nan(""));
  };
  for (const CheckRecord& c : r.log) {
    std::snprintf(buf, sizeof buf, "%.17g", c.t);
    f << buf;
    num(c.distance);
    num(c.v_h1);
    vec(c.y);
    vec(c.a_plus);
    vec(c.a_minus);
    f << ',' << (c.status.inside ? 1 : 0) << ',' << to_string(c.status.failed);
    num(c.status.margin);
    for (double x : c.status.ratios) num(x);
    vec(c.M);
    vec(c.E);
    vec(c.H);
    num(c.variation_lhs);
    num(c.variation_rhs);
    f << '\n';
  }
  if (!f) throw Error("cannot write " + (dir / "series.csv").string());
}

}  // namespace gkdv
