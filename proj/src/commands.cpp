#include "gkdv/commands.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <string>

#include "json.hpp"

#include "gkdv/coercivity.hpp"
#include "gkdv/config.hpp"
#include "gkdv/error.hpp"
#include "gkdv/evolver.hpp"
#include "gkdv/linop.hpp"
#include "gkdv/shooting.hpp"
#include "gkdv/snapshot.hpp"
#include "gkdv/soliton.hpp"
#include "gkdv/spectrum_cache.hpp"
#include "gkdv/verify.hpp"

namespace gkdv {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw FormatError("cannot write " + path.string());
  f << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

struct Context {
  RunConfig cfg;
  fs::path dir;
  std::size_t threads;
  std::ostream& out;
};

EdgeSpectrum load_spectrum(const RunConfig& cfg, const Grid1D& grid) {
  if (cfg.cache_dir.empty()) return edge_eigenpair(cfg.p, grid);
  return SpectrumCache(cfg.cache_dir).get_or_compute(cfg.p, grid);
}

int cmd_profile(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const Grid1D grid = cfg.grid.make();
  const Criticality crit = criticality(cfg.p);
  const double mass1 = conserved_quantities(ground_state(cfg.p, 1.0, grid, 0.0), cfg.p).mass;
  json summary;
  summary["p"] = cfg.p;
  summary["mass_exponent"] = crit.exponent;
  summary["criticality"] = crit.sign > 0 ? "subcritical" : crit.sign < 0 ? "supercritical" : "critical";
  for (double c : cfg.profile_c) {
    const Field q = ground_state(cfg.p, c, grid, 0.0);
    const Field qx = derivative(q, 1);
    // Profile equation Q'' = c Q - Q^p.
    Field res = derivative(q, 2);
    for (std::size_t i = 0; i < q.size(); ++i) {
      res.mutable_values()[i] += std::pow(q[i], cfg.p) - c * q[i];
    }
    std::string csv = "x,Q,Q_x\n";
    for (std::size_t i = 0; i < q.size(); ++i) {
      csv += num(grid.x(i)) + "," + num(q[i]) + "," + num(qx[i]) + "\n";
    }
    char name[64];
    std::snprintf(name, sizeof name, "profile_c%g.csv", c);
    write_text(ctx.dir / name, csv);
    const Conserved cq = conserved_quantities(q, cfg.p);
    summary["profiles"].push_back({{"c", c},
                                   {"file", name},
                                   {"mass", cq.mass},
                                   {"energy", cq.energy},
                                   {"mass_ratio", cq.mass / mass1},
                                   {"mass_ratio_scaling", std::pow(c, crit.exponent)},
                                   {"profile_residual", res.max_abs()},
                                   {"tail_extent", tail_extent(cfg.p, c)}});
    ctx.out << "c=" << c << " mass=" << num(cq.mass) << " residual=" << res.max_abs() << "\n";
  }
  write_json(ctx.dir / "profile.json", summary);
  return kExitOk;
}

int cmd_spectrum(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const Grid1D grid = cfg.spectrum_grid.make();
  const EdgeSpectrum s = load_spectrum(cfg, grid);
  const DualResiduals d = dual_residuals(s);
  const Field q = ground_state(cfg.p, 1.0, grid, 0.0);
  Field qpow = q;
  for (double& v : qpow.mutable_values()) v = std::pow(v, 0.5 * (cfg.p + 1));
  const double mu0 = inner_l2(apply_L(qpow, cfg.p), qpow) / inner_l2(qpow, qpow);
  json j = {{"p", cfg.p},
            {"e0", s.e0},
            {"eta0", s.eta0},
            {"grid", {{"L", grid.length()}, {"n", grid.size()}}},
            {"eigen_residual_plus", s.residuals.eigen_plus},
            {"eigen_residual_minus", s.residuals.eigen_minus},
            {"e0_dense", s.residuals.e0_dense},
            {"e0_fine", s.residuals.e0_fine},
            {"eta_left", s.residuals.eta_left},
            {"eta_right", s.residuals.eta_right},
            {"dual_residual_plus", d.r_plus},
            {"dual_residual_minus", d.r_minus},
            {"dual_orthogonality", d.ortho},
            {"gram", d.gram},
            {"gram_determinant", d.gram_det},
            {"mu0", mu0},
            {"mu0_symbolic", mu0_symbolic(cfg.p)}};
  write_json(ctx.dir / "spectrum.json", j);
  std::string csv = "x,Y_plus,Y_minus,Z_plus,Z_minus\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    csv += num(grid.x(i)) + "," + num(s.Yplus[i]) + "," + num(s.Yminus[i]) + "," +
           num(s.Zplus[i]) + "," + num(s.Zminus[i]) + "\n";
  }
  write_text(ctx.dir / "eigenfunctions.csv", csv);
  ctx.out << "p=" << cfg.p << " e0=" << num(s.e0) << " eta0=" << num(s.eta0) << "\n";
  return kExitOk;
}

int cmd_coercivity(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const EdgeSpectrum s = load_spectrum(cfg, cfg.spectrum_grid.make());
  const double c = cfg.coercivity_c;
  std::string csv = "p,constraint_set,lambda_min,n,L\n";
  json rows = json::array();
  for (std::size_t n : cfg.coercivity_n) {
    const Grid1D g(cfg.coercivity_grid.L, n);
    const ConstraintSet sets[] = {dual_constraints(s, c, 0.0, g),
                                  translation_constraint(cfg.p, c, 0.0, g),
                                  power_constraints(cfg.p, c, 0.0, g)};
    for (const ConstraintSet& set : sets) {
      const double lam = constrained_min_rayleigh(cfg.p, c, 0.0, set, g).lambda;
      csv += std::to_string(cfg.p) + ",\"" + set.name() + "\"," + num(lam) + "," + std::to_string(n) +
             "," + num(g.length()) + "\n";
      rows.push_back({{"constraint_set", set.name()}, {"lambda_min", lam}, {"n", n}});
      ctx.out << set.name() << " n=" << n << " lambda_min=" << num(lam) << "\n";
    }
  }
  write_text(ctx.dir / "coercivity.csv", csv);
  write_json(ctx.dir / "coercivity.json", {{"p", cfg.p}, {"c", c}, {"rows", rows}});
  return kExitOk;
}

/// Explicit ensemble, or speeds laid out `separation` apart (30 by default) around 0 at t0.
SolitonEnsemble evolve_ensemble(const RunConfig& cfg) {
  if (!cfg.ensemble.empty()) return SolitonEnsemble(cfg.p, cfg.ensemble);
  const double sep = cfg.separation > 0.0 ? cfg.separation : 30.0;
  const double mid = 0.5 * sep * static_cast<double>(cfg.speeds.size() - 1);
  std::vector<SolitonParams> ps;
  for (std::size_t j = 0; j < cfg.speeds.size(); ++j) {
    const double xj = sep * static_cast<double>(j) - mid;
    ps.push_back({cfg.speeds[j], xj - cfg.speeds[j] * cfg.t0});
  }
  return SolitonEnsemble(cfg.p, ps);
}

int cmd_evolve(Context& ctx) {
  RunConfig& cfg = ctx.cfg;
  const Grid1D grid = cfg.grid.make();
  const SolitonEnsemble ens = evolve_ensemble(cfg);
  cfg.ensemble = ens.params();
  write_json(ctx.dir / "config.resolved.json", to_json(cfg));
  EvolveOptions eo = cfg.evolve;
  if (eo.sample_every == 0) {
    const double h = std::abs(choose_step(ensemble_field(ens, cfg.t0, grid), cfg.p, cfg.t0, cfg.t1, eo));
    eo.sample_every = std::max<std::size_t>(1, static_cast<std::size_t>(0.05 / h));
  }
  const Field u0 = ensemble_field(ens, cfg.t0, grid);
  const Trajectory tr = evolve(u0, cfg.p, cfg.t0, cfg.t1, eo);
  const Conserved c0 = conserved_quantities(u0, cfg.p);
  std::string csv = "t,mass,energy,mass_drift,energy_drift,h1_error_vs_R\n";
  for (const Sample& s : tr.samples) {
    double err = std::nan("");
    try {
      err = norm_h1(s.u - ensemble_field(ens, s.t, grid));
    } catch (const DomainError&) {
      // the reference wraps around the periodic boundary at this time
    }
    csv += num(s.t) + "," + num(s.mass) + "," + num(s.energy) + "," +
           num(std::abs(s.mass - c0.mass) / std::abs(c0.mass)) + "," +
           num(std::abs(s.energy - c0.energy) / std::abs(c0.energy)) + "," + num(err) + "\n";
  }
  write_text(ctx.dir / "trajectory.csv", csv);
  save_snapshot(tr.samples.back().u, tr.samples.back().t, (ctx.dir / "final.snap").string());
  write_json(ctx.dir / "evolve.json", {{"t0", cfg.t0},
                                       {"t1", cfg.t1},
                                       {"dt", tr.dt},
                                       {"steps", tr.steps},
                                       {"max_mass_drift", tr.max_mass_drift},
                                       {"max_energy_drift", tr.max_energy_drift}});
  ctx.out << "steps=" << tr.steps << " dt=" << num(tr.dt) << " mass drift=" << tr.max_mass_drift
          << " energy drift=" << tr.max_energy_drift << "\n";
  return kExitOk;
}

int cmd_construct(Context& ctx) {
  RunConfig& cfg = ctx.cfg;
  const Grid1D grid = cfg.grid.make();
  const EdgeSpectrum s = load_spectrum(cfg, cfg.spectrum_grid.make());

  const SolitonEnsemble probe(cfg.p, [&] {
    std::vector<SolitonParams> ps;
    for (std::size_t j = 0; j < cfg.speeds.size(); ++j) ps.push_back({cfg.speeds[j], 0.0});
    return ps;
  }());
  if (cfg.tube.sigma0 == 0.0) cfg.tube.sigma0 = compute_sigma0(probe, s);
  if (cfg.T0 == 0.0) cfg.T0 = default_T0(cfg.tube.sigma0);
  if (cfg.Sn == 0.0) cfg.Sn = cfg.T0 + cfg.window;
  if (cfg.separation == 0.0) cfg.separation = default_separation(cfg.tube.sigma0);
  const SolitonEnsemble ens = cfg.ensemble.empty()
                                  ? place_ensemble(s, cfg.speeds, grid, cfg.T0, cfg.Sn, cfg.separation)
                                  : SolitonEnsemble(cfg.p, cfg.ensemble);
  cfg.ensemble = ens.params();
  if (cfg.shooting.K == 0.0 && cfg.shooting.diagnostics) {
    cfg.shooting.K = composite_constant(s, cfg.speeds, cfg.K_grid.make());
  }
  cfg.shooting.threads = ctx.threads;
  cfg.shooting.evolve = cfg.evolve;
  TubeSpec tube = cfg.tube;
  tube.T0 = cfg.T0;
  tube.Sn = cfg.Sn;
  const Shooter shooter(ens, s, grid, tube, cfg.shooting);
  cfg.tube.eps = shooter.tube().eps;
  write_json(ctx.dir / "config.resolved.json", to_json(cfg));

  auto report = [&](const ShootResult& r, const fs::path& dir) {
    fs::create_directories(dir);
    write_shoot_result(r, dir);
    if (r.u_final) save_snapshot(*r.u_final, r.T0, (dir / "u_T0.snap").string());
    ctx.out << "Sn=" << num(r.Sn) << " T0=" << num(r.T0) << " a_hat=[";
    for (std::size_t j = 0; j < r.a_hat.size(); ++j) ctx.out << (j ? ", " : "") << num(r.a_hat[j]);
    ctx.out << "] success=" << (r.success ? "yes" : "no") << " runs=" << r.runs << "\n";
  };
  bool ok = true;
  if (cfg.Sn_list.empty()) {
    const ShootResult r = shooter.find_a_hat();
    report(r, ctx.dir);
    ok = r.success;
  } else {
    const std::vector<ShootResult> rs = continuation(shooter, cfg.Sn_list, cfg.fixed_T0);
    for (std::size_t i = 0; i < rs.size(); ++i) {
      report(rs[i], ctx.dir / ("sn_" + std::to_string(i)));
      ok = ok && rs[i].success;
    }
  }
  if (!ok) throw NumericalError("backward run left the tube for the selected a_hat");
  return kExitOk;
}

int cmd_verify(Context& ctx) {
  VerifyOptions vo;
  vo.threads = ctx.threads;
  vo.cache_dir = ctx.cfg.cache_dir;
  vo.on_result = [&](const CriterionResult& r) { ctx.out << format_result(r) << std::endl; };
  const std::vector<CriterionResult> rs = run_acceptance(ctx.cfg.verify_only, vo);
  json j = json::array();
  bool ok = true;
  for (const CriterionResult& r : rs) {
    j.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail},
                 {"seconds", r.seconds}});
    ok = ok && r.passed;
  }
  write_json(ctx.dir / "verify.json", j);
  return ok ? kExitOk : kExitVerifyFailed;
}

void write_diagnostic(const fs::path& dir, const std::string& command, const std::string& kind,
                      const std::string& what, double t) {
  try {
    fs::create_directories(dir);
    json j = {{"command", command}, {"error", kind}, {"message", what}};
    if (!std::isnan(t)) j["time"] = t;
    write_json(dir / "diagnostic.json", j);
  } catch (...) {
    // best effort: the exit code already reports the failure
  }
}

}  // namespace

std::size_t resolve_threads(std::optional<std::size_t> flag, std::size_t configured) {
  if (flag && *flag > 0) return *flag;
  if (const char* env = std::getenv("GKDV_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return configured;
}

int dispatch(const CommandArgs& args, std::ostream& out, std::ostream& err) {
  fs::path dir = args.out.value_or(fs::path("run"));
  try {
    RunConfig cfg = load_config(args.config);
    if (!args.out) dir = cfg.output;
    fs::create_directories(dir);
    Context ctx{cfg, dir, resolve_threads(args.threads, cfg.shooting.threads), out};
    ctx.cfg.shooting.threads = ctx.threads;
    if (args.command != "construct") write_json(dir / "config.resolved.json", to_json(ctx.cfg));
    if (args.command == "profile") return cmd_profile(ctx);
    if (args.command == "spectrum") return cmd_spectrum(ctx);
    if (args.command == "coercivity") return cmd_coercivity(ctx);
    if (args.command == "evolve") return cmd_evolve(ctx);
    if (args.command == "construct") return cmd_construct(ctx);
    if (args.command == "verify") return cmd_verify(ctx);
    throw ConfigError("unknown command " + args.command);
  } catch (const EvolutionError& e) {
    err << "error: " << e.what() << " (t = " << e.time() << ")\n";
    write_diagnostic(dir, args.command, "evolution", e.what(), e.time());
    return kExitNumerical;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    write_diagnostic(dir, args.command, "numerical", e.what(), std::nan(""));
    return kExitNumerical;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const GridError& e) {
    err << "grid error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    write_diagnostic(dir, args.command, "internal", e.what(), std::nan(""));
    return kExitNumerical;
  }
}

}  // namespace gkdv
