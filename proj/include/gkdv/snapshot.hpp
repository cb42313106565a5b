#pragma once

#include <cstdint>
#include <string>

#include "gkdv/grid.hpp"

namespace gkdv {

inline constexpr std::uint32_t kSnapshotVersion = 1;

/// A field together with its time stamp, as stored on disk.
struct Snapshot {
  Field field;
  double t;
};

/// Binary layout (little endian): "GKDV", u32 version, f64 L, u64 n, f64 t, n x f64.
void save_snapshot(const Field& field, double t, const std::string& path);
Snapshot load_snapshot(const std::string& path);

}  // namespace gkdv
