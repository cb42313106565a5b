#include "gkdv/snapshot.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "gkdv/error.hpp"

namespace gkdv {
namespace {

constexpr std::array<char, 4> kMagic = {'G', 'K', 'D', 'V'};

template <class T>
void put(std::ofstream& os, T value) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
  }
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T get(std::ifstream& is, const std::string& path) {
  unsigned char buf[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) {
    throw FormatError("truncated snapshot: " + path);
  }
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
  }
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

}  // namespace

void save_snapshot(const Field& field, double t, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FormatError("cannot open snapshot for writing: " + path);
  os.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(os, kSnapshotVersion);
  put<double>(os, field.grid().length());
  put<std::uint64_t>(os, field.size());
  put<double>(os, t);
  for (double v : field.values()) put<double>(os, v);
  if (!os) throw FormatError("failed writing snapshot: " + path);
}

Snapshot load_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open snapshot: " + path);
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), magic.size())) throw FormatError("truncated snapshot: " + path);
  if (magic != kMagic) throw FormatError("bad snapshot magic: " + path);
  const auto version = get<std::uint32_t>(is, path);
  if (version != kSnapshotVersion) {
    throw FormatError("unsupported snapshot version " + std::to_string(version) + ": " + path);
  }
  const double length = get<double>(is, path);
  const auto n = get<std::uint64_t>(is, path);
  const double t = get<double>(is, path);
  Grid1D grid(length, static_cast<std::size_t>(n));
  RVec values(grid.size());
  for (double& v : values) v = get<double>(is, path);
  return Snapshot{Field(grid, std::move(values)), t};
}

}  // namespace gkdv
