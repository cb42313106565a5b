#pragma once

#include <cmath>
#include <array>
#include <random>
#include <vector>

#include "gkdv/linop.hpp"

namespace gkdv::test {

/// p = 6 edge spectrum on (128, 4096), computed once per process.
inline const EdgeSpectrum& spectrum6() {
  static const EdgeSpectrum s = edge_eigenpair(6, Grid1D(128.0, 4096));
  return s;
}

/// Smooth random bump sum: localized, resolved on any grid with dx <= 0.25.
inline Field random_bumps(const Grid1D& g, std::mt19937_64& rng, int count = 6, double spread = 8.0) {
  std::uniform_real_distribution<double> amp(-1.0, 1.0), pos(-spread, spread), width(0.8, 2.0);
  std::vector<std::array<double, 3>> b;
  for (int k = 0; k < count; ++k) b.push_back({amp(rng), pos(rng), width(rng)});
  return Field::from_function(g, [&](double x) {
    double s = 0.0;
    for (const auto& [a, m, w] : b) s += a * std::exp(-(x - m) * (x - m) / (w * w));
    return s;
  });
}

}  // namespace gkdv::test
