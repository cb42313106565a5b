#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "gkdv/evolver.hpp"
#include "gkdv/shooting.hpp"
#include "gkdv/soliton.hpp"

namespace gkdv {

struct GridSpec {
  double L = 128.0;
  std::size_t n = 4096;
  Grid1D make() const { return Grid1D(L, n); }
};

/// Run configuration. Every field has a default; zero-valued window and tube
/// entries are resolved from the edge spectrum at run time.
struct RunConfig {
  int p = 6;
  /// Explicit solitons (c, x0). When empty, `speeds` are placed automatically.
  std::vector<SolitonParams> ensemble;
  std::vector<double> speeds{1.0};
  double separation = 0.0;  ///< at Sn; 0 selects 20 / sqrt(sigma0)

  GridSpec grid{128.0, 4096};
  GridSpec spectrum_grid{128.0, 4096};
  std::string cache_dir;  ///< edge-spectrum cache; empty disables it

  double T0 = 0.0;      ///< 0 selects max(4, 2 / sigma0^{3/2})
  double Sn = 0.0;      ///< 0 selects T0 + window
  double window = 8.0;
  std::vector<double> Sn_list;  ///< continuation targets (construct)
  bool fixed_T0 = true;

  TubeSpec tube;                ///< sigma0 / eps of 0 are computed
  EvolveOptions evolve = ShootOptions::default_evolve();
  double t0 = 0.0, t1 = 1.0;    ///< evolve command interval
  ShootOptions shooting;
  GridSpec K_grid{80.0, 512};   ///< grid for the composite constant when shooting.K is 0

  GridSpec coercivity_grid{64.0, 1024};
  std::vector<std::size_t> coercivity_n{1024, 2048};
  double coercivity_c = 1.0;

  std::vector<double> profile_c{0.5, 1.0, 2.0};
  std::uint64_t seed = 1;
  std::string output = "run";
  std::vector<int> verify_only;  ///< acceptance criteria to run (empty: all)
};

/// Throws ConfigError on unknown keys, wrong types or values outside
/// module preconditions.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& c);

}  // namespace gkdv
