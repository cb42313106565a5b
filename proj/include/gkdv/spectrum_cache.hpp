#pragma once

#include <filesystem>
#include <optional>

#include "gkdv/linop.hpp"

namespace gkdv {

/// On-disk cache of edge spectra keyed by (p, L, n): four snapshots
/// (Y+, Y-, Z+, Z-) plus a JSON sidecar with e0, eta0 and residuals.
class SpectrumCache {
 public:
  explicit SpectrumCache(std::filesystem::path dir);

  std::filesystem::path entry(int p, const Grid1D& grid) const;
  std::optional<EdgeSpectrum> load(int p, const Grid1D& grid) const;
  void store(const EdgeSpectrum& spec) const;
  EdgeSpectrum get_or_compute(int p, const Grid1D& grid, const EdgeOptions& opts = {}) const;

 private:
  std::filesystem::path dir_;
};

}  // namespace gkdv
