#include "gkdv/config.hpp"

#include <fstream>
#include <set>

#include "gkdv/error.hpp"

namespace gkdv {
namespace {

using nlohmann::json;

/// Reads typed members of one JSON object and rejects keys nobody asked for.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where(key) + ": " + e.what());
    }
  }

  bool has(const char* key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }
  Section sub(const char* key) {
    seen_.insert(key);
    return Section(j_.at(key), where(key));
  }
  const json& raw(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }
  std::string where(const std::string& key = "") const {
    return key.empty() ? path_ : path_ + "." + key;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError("unknown key " + where(it.key()));
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_grid(Section& s, const char* key, GridSpec& g) {
  if (!s.has(key)) return;
  Section gs = s.sub(key);
  gs.get("L", g.L);
  gs.get("n", g.n);
  gs.finish();
  if (!(g.L > 0.0)) throw ConfigError(gs.where("L") + " must be positive");
  if (g.n < 16 || (g.n & (g.n - 1)) != 0) {
    throw ConfigError(gs.where("n") + " must be a power of two >= 16");
  }
}

json grid_json(const GridSpec& g) { return {{"L", g.L}, {"n", g.n}}; }

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

RunConfig parse_config(const json& j) {
  RunConfig c;
  Section root(j, "config");
  root.get("p", c.p);
  if (root.has("ensemble")) {
    const json& e = root.raw("ensemble");
    require(e.is_array() && !e.empty(), "config.ensemble must be a non-empty array");
    for (std::size_t i = 0; i < e.size(); ++i) {
      Section s(e[i], "config.ensemble[" + std::to_string(i) + "]");
      SolitonParams sp{0.0, 0.0};
      require(s.has("c"), s.where("c") + " is required");
      s.get("c", sp.c);
      s.get("x0", sp.x0);
      s.finish();
      c.ensemble.push_back(sp);
    }
    c.speeds.clear();
    for (const SolitonParams& sp : c.ensemble) c.speeds.push_back(sp.c);
  }
  root.get("speeds", c.speeds);
  if (!c.ensemble.empty() && c.speeds.size() != c.ensemble.size()) {
    throw ConfigError("config.speeds conflicts with config.ensemble");
  }
  root.get("separation", c.separation);
  read_grid(root, "grid", c.grid);
  read_grid(root, "spectrum_grid", c.spectrum_grid);
  root.get("cache_dir", c.cache_dir);

  if (root.has("window")) {
    Section w = root.sub("window");
    w.get("T0", c.T0);
    w.get("Sn", c.Sn);
    w.get("length", c.window);
    w.get("Sn_list", c.Sn_list);
    w.get("fixed_T0", c.fixed_T0);
    w.finish();
  }
  if (root.has("tube")) {
    Section t = root.sub("tube");
    t.get("sigma0", c.tube.sigma0);
    t.get("eps", c.tube.eps);
    t.get("r_v", c.tube.r_v);
    t.get("r_y", c.tube.r_y);
    t.get("r_am", c.tube.r_am);
    t.get("r_ap", c.tube.r_ap);
    t.finish();
  }
  if (root.has("evolver")) {
    Section e = root.sub("evolver");
    e.get("dt", c.evolve.dt);
    e.get("cfl", c.evolve.cfl);
    e.get("tol_mass", c.evolve.tol_mass);
    e.get("tol_energy", c.evolve.tol_energy);
    e.get("check_conservation", c.evolve.check_conservation);
    e.get("dealias", c.evolve.dealias);
    e.get("tail_guard", c.evolve.tail_guard);
    e.get("max_steps", c.evolve.max_steps);
    e.get("h1_ceiling", c.evolve.h1_ceiling);
    e.get("sample_every", c.evolve.sample_every);
    e.get("t0", c.t0);
    e.get("t1", c.t1);
    e.finish();
  }
  if (root.has("shooting")) {
    Section s = root.sub("shooting");
    s.get("check_interval", c.shooting.check_interval);
    s.get("abort_factor", c.shooting.abort_factor);
    s.get("ball_factor", c.shooting.ball_factor);
    s.get("K", c.shooting.K);
    s.get("diagnostics", c.shooting.diagnostics);
    s.get("max_bisection", c.shooting.max_bisection);
    s.get("max_broyden", c.shooting.max_broyden);
    s.get("broyden_tol", c.shooting.broyden_tol);
    s.get("threads", c.shooting.threads);
    read_grid(s, "K_grid", c.K_grid);
    s.finish();
  }
  if (root.has("coercivity")) {
    Section s = root.sub("coercivity");
    s.get("L", c.coercivity_grid.L);
    s.get("n", c.coercivity_n);
    s.get("c", c.coercivity_c);
    s.finish();
  }
  if (root.has("profile")) {
    Section s = root.sub("profile");
    s.get("c", c.profile_c);
    s.finish();
  }
  root.get("seed", c.seed);
  root.get("output", c.output);
  root.get("verify_only", c.verify_only);
  root.finish();

  require(c.p >= 2, "config.p must be an integer >= 2");
  require(!c.speeds.empty(), "config.speeds must not be empty");
  for (std::size_t k = 0; k < c.speeds.size(); ++k) {
    require(c.speeds[k] > 0.0, "config.speeds must be positive");
    require(k == 0 || c.speeds[k] > c.speeds[k - 1], "config.speeds must be strictly increasing");
  }
  require(c.separation >= 0.0, "config.separation must be non-negative");
  require(c.T0 >= 0.0 && c.Sn >= 0.0, "config.window times must be non-negative");
  require(c.window > 0.0, "config.window.length must be positive");
  require(c.T0 == 0.0 || c.Sn == 0.0 || c.T0 < c.Sn, "config.window needs T0 < Sn");
  for (double s : c.Sn_list) require(s > c.T0, "config.window.Sn_list entries must exceed T0");
  require(c.tube.sigma0 >= 0.0 && c.tube.eps >= 0.0, "config.tube values must be non-negative");
  require(c.tube.r_v > 0.0 && c.tube.r_y > 0.0 && c.tube.r_am > 0.0 && c.tube.r_ap > 0.0,
          "config.tube radii must be positive");
  require(c.evolve.dt > 0.0 && c.evolve.cfl > 0.0, "config.evolver dt and cfl must be positive");
  require(c.t0 != c.t1, "config.evolver needs t0 != t1");
  require(c.shooting.check_interval > 0.0, "config.shooting.check_interval must be positive");
  require(c.shooting.ball_factor >= 1.0, "config.shooting.ball_factor must be >= 1");
  require(c.shooting.K >= 0.0, "config.shooting.K must be non-negative");
  require(c.shooting.threads >= 1, "config.shooting.threads must be >= 1");
  require(c.coercivity_grid.L > 0.0, "config.coercivity.L must be positive");
  require(!c.coercivity_n.empty(), "config.coercivity.n must not be empty");
  for (std::size_t n : c.coercivity_n) {
    require(n >= 16 && (n & (n - 1)) == 0 && n <= 4096,
            "config.coercivity.n entries must be powers of two in [16, 4096]");
  }
  require(c.coercivity_c > 0.0, "config.coercivity.c must be positive");
  for (double v : c.profile_c) require(v > 0.0, "config.profile.c must be positive");
  for (int k : c.verify_only) require(k >= 1 && k <= 12, "config.verify_only entries are 1..12");
  c.coercivity_grid.n = c.coercivity_n.front();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

json to_json(const RunConfig& c) {
  json j;
  j["p"] = c.p;
  if (!c.ensemble.empty()) {
    for (const SolitonParams& s : c.ensemble) j["ensemble"].push_back({{"c", s.c}, {"x0", s.x0}});
  }
  j["speeds"] = c.speeds;
  j["separation"] = c.separation;
  j["grid"] = grid_json(c.grid);
  j["spectrum_grid"] = grid_json(c.spectrum_grid);
  j["cache_dir"] = c.cache_dir;
  j["window"] = {{"T0", c.T0},
                 {"Sn", c.Sn},
                 {"length", c.window},
                 {"Sn_list", c.Sn_list},
                 {"fixed_T0", c.fixed_T0}};
  j["tube"] = {{"sigma0", c.tube.sigma0}, {"eps", c.tube.eps}, {"r_v", c.tube.r_v},
               {"r_y", c.tube.r_y},       {"r_am", c.tube.r_am}, {"r_ap", c.tube.r_ap}};
  j["evolver"] = {{"dt", c.evolve.dt},
                  {"cfl", c.evolve.cfl},
                  {"tol_mass", c.evolve.tol_mass},
                  {"tol_energy", c.evolve.tol_energy},
                  {"check_conservation", c.evolve.check_conservation},
                  {"dealias", c.evolve.dealias},
                  {"tail_guard", c.evolve.tail_guard},
                  {"max_steps", c.evolve.max_steps},
                  {"h1_ceiling", c.evolve.h1_ceiling},
                  {"sample_every", c.evolve.sample_every},
                  {"t0", c.t0},
                  {"t1", c.t1}};
  j["shooting"] = {{"check_interval", c.shooting.check_interval},
                   {"abort_factor", c.shooting.abort_factor},
                   {"ball_factor", c.shooting.ball_factor},
                   {"K", c.shooting.K},
                   {"diagnostics", c.shooting.diagnostics},
                   {"max_bisection", c.shooting.max_bisection},
                   {"max_broyden", c.shooting.max_broyden},
                   {"broyden_tol", c.shooting.broyden_tol},
                   {"threads", c.shooting.threads},
                   {"K_grid", grid_json(c.K_grid)}};
  j["coercivity"] = {{"L", c.coercivity_grid.L}, {"n", c.coercivity_n}, {"c", c.coercivity_c}};
  j["profile"] = {{"c", c.profile_c}};
  j["seed"] = c.seed;
  j["output"] = c.output;
  j["verify_only"] = c.verify_only;
  return j;
}

}  // namespace gkdv
