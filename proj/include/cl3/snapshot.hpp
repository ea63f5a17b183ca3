#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "cl3/errors.hpp"
#include "cl3/field.hpp"
#include "cl3/grid.hpp"

// Self-describing binary snapshots: magic, version, grid dims and extents,
// time, then 8 little-endian doubles per point (re/im of the four
// coefficients), row-major with z fastest. Round-trips bit-exactly.

namespace cl3 {

static_assert(std::endian::native == std::endian::little,
              "snapshot format is little-endian");

namespace detail {
inline constexpr char kSnapshotMagic[8] = {'C', 'L', '3', 'S', 'N', 'A', 'P', '\0'};
inline constexpr std::uint32_t kSnapshotVersion = 1;
}  // namespace detail

inline void write_snapshot(const std::string& path, const SpinorField& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("write_snapshot: cannot open " + path);
  out.write(detail::kSnapshotMagic, 8);
  const std::uint32_t version = detail::kSnapshotVersion;
  out.write(reinterpret_cast<const char*>(&version), 4);
  std::int32_t n[3] = {f.grid.n[0], f.grid.n[1], f.grid.n[2]};
  out.write(reinterpret_cast<const char*>(n), sizeof n);
  out.write(reinterpret_cast<const char*>(f.grid.extent.data()), 3 * sizeof(double));
  out.write(reinterpret_cast<const char*>(&f.t), sizeof(double));
  out.write(reinterpret_cast<const char*>(f.data.data()),
            static_cast<std::streamsize>(f.data.size() * sizeof(Paravector)));
  if (!out) throw ConfigError("write_snapshot: short write to " + path);
}

inline SpinorField read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("read_snapshot: cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, detail::kSnapshotMagic, 8) != 0)
    throw ConfigError("read_snapshot: bad magic in " + path);
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), 4);
  if (version != detail::kSnapshotVersion)
    throw ConfigError("read_snapshot: unsupported version in " + path);
  std::int32_t n[3];
  in.read(reinterpret_cast<char*>(n), sizeof n);
  SpinorField f;
  f.grid.n = {n[0], n[1], n[2]};
  in.read(reinterpret_cast<char*>(f.grid.extent.data()), 3 * sizeof(double));
  in.read(reinterpret_cast<char*>(&f.t), sizeof(double));
  f.grid.validate();
  f.data.resize(f.grid.size());
  in.read(reinterpret_cast<char*>(f.data.data()),
          static_cast<std::streamsize>(f.data.size() * sizeof(Paravector)));
  if (!in) throw ConfigError("read_snapshot: truncated file " + path);
  return f;
}

// CSV export for small grids: x,y,z then re/im of the four coefficients.
inline void write_snapshot_csv(const std::string& path, const SpinorField& f) {
  std::ofstream out(path);
  if (!out) throw ConfigError("write_snapshot_csv: cannot open " + path);
  out << "x,y,z,re0,im0,re1,im1,re2,im2,re3,im3\n";
  out.precision(17);
  for (int i = 0; i < f.grid.n[0]; ++i)
    for (int j = 0; j < f.grid.n[1]; ++j)
      for (int k = 0; k < f.grid.n[2]; ++k) {
        const Paravector& p = f.data[f.grid.index(i, j, k)];
        out << f.grid.coord(0, i) << ',' << f.grid.coord(1, j) << ','
            << f.grid.coord(2, k);
        for (int mu = 0; mu < 4; ++mu)
          out << ',' << p.c[mu].real() << ',' << p.c[mu].imag();
        out << '\n';
      }
}

}  // namespace cl3
