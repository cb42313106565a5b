#include "gkdv/spectrum_cache.hpp"

#include <fstream>
#include <sstream>

#include "gkdv/snapshot.hpp"
#include "json.hpp"

namespace gkdv {

using nlohmann::json;

SpectrumCache::SpectrumCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path SpectrumCache::entry(int p, const Grid1D& grid) const {
  std::ostringstream name;
  name.precision(17);
  name << "p" << p << "_L" << grid.length() << "_n" << grid.size();
  return dir_ / name.str();
}

std::optional<EdgeSpectrum> SpectrumCache::load(int p, const Grid1D& grid) const {
  const auto dir = entry(p, grid);
  if (!std::filesystem::exists(dir / "spectrum.json")) return std::nullopt;
  std::ifstream is(dir / "spectrum.json");
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw FormatError("corrupt spectrum sidecar " + (dir / "spectrum.json").string() + ": " +
                      e.what());
  }
  if (j.value("p", 0) != p || j.value("n", std::size_t{0}) != grid.size() ||
      j.value("L", 0.0) != grid.length()) {
    throw FormatError("spectrum sidecar does not match its cache key: " + dir.string());
  }
  auto field = [&](const char* name) {
    Snapshot s = load_snapshot((dir / name).string());
    if (s.field.grid() != grid) throw FormatError("cached field on the wrong grid: " + dir.string());
    return s.field;
  };
  EdgeSpectrum spec{p,
                    j.at("e0").get<double>(),
                    j.at("eta0").get<double>(),
                    field("Yplus.snap"),
                    field("Yminus.snap"),
                    field("Zplus.snap"),
                    field("Zminus.snap"),
                    {}};
  const json& r = j.at("residuals");
  spec.residuals.eigen_plus = r.at("eigen_plus");
  spec.residuals.eigen_minus = r.at("eigen_minus");
  spec.residuals.e0_dense = r.at("e0_dense");
  spec.residuals.e0_fine = r.at("e0_fine");
  spec.residuals.eta_left = r.at("eta_left");
  spec.residuals.eta_right = r.at("eta_right");
  spec.residuals.z_consistency = r.at("z_consistency");
  return spec;
}

void SpectrumCache::store(const EdgeSpectrum& spec) const {
  const auto dir = entry(spec.p, spec.grid());
  std::filesystem::create_directories(dir);
  save_snapshot(spec.Yplus, 0.0, (dir / "Yplus.snap").string());
  save_snapshot(spec.Yminus, 0.0, (dir / "Yminus.snap").string());
  save_snapshot(spec.Zplus, 0.0, (dir / "Zplus.snap").string());
  save_snapshot(spec.Zminus, 0.0, (dir / "Zminus.snap").string());
  const auto d = dual_residuals(spec);
  json j = {{"p", spec.p},
            {"L", spec.grid().length()},
            {"n", spec.grid().size()},
            {"e0", spec.e0},
            {"eta0", spec.eta0},
            {"residuals",
             {{"eigen_plus", spec.residuals.eigen_plus},
              {"eigen_minus", spec.residuals.eigen_minus},
              {"e0_dense", spec.residuals.e0_dense},
              {"e0_fine", spec.residuals.e0_fine},
              {"eta_left", spec.residuals.eta_left},
              {"eta_right", spec.residuals.eta_right},
              {"z_consistency", spec.residuals.z_consistency},
              {"dual_plus", d.r_plus},
              {"dual_minus", d.r_minus},
              {"ortho", d.ortho},
              {"gram", d.gram}}}};
  // Write the sidecar last so a partial entry is never picked up.
  const auto tmp = dir / "spectrum.json.tmp";
  {
    std::ofstream os(tmp);
    os << j.dump(2) << "\n";
  }
  std::filesystem::rename(tmp, dir / "spectrum.json");
}

EdgeSpectrum SpectrumCache::get_or_compute(int p, const Grid1D& grid,
                                           const EdgeOptions& opts) const {
  if (auto cached = load(p, grid)) return *std::move(cached);
  EdgeSpectrum spec = edge_eigenpair(p, grid, opts);
  store(spec);
  return spec;
}

}  // namespace gkdv
