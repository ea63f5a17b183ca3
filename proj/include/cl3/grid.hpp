#pragma once

#include <array>
#include <cstddef>

#include "cl3/errors.hpp"

namespace cl3 {

// Periodic box. Data indexed row-major with z fastest:
// index(i,j,k) = (i*ny + j)*nz + k.
struct Grid {
  std::array<int, 3> n{16, 16, 16};
  std::array<double, 3> extent{2.0 * 3.14159265358979323846, 2.0 * 3.14159265358979323846,
                               2.0 * 3.14159265358979323846};

  void validate() const {
    for (int d = 0; d < 3; ++d) {
      if (n[d] < 4) throw ConfigError("Grid: need at least 4 points per axis");
      if (!(extent[d] > 0.0)) throw ConfigError("Grid: extent must be positive");
    }
  }

  double spacing(int d) const { return extent[d] / n[d]; }
  double min_spacing() const {
    return std::min({spacing(0), spacing(1), spacing(2)});
  }
  std::size_t size() const {
    return static_cast<std::size_t>(n[0]) * n[1] * n[2];
  }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * n[1] + j) * n[2] + k;
  }
  std::array<int, 3> unindex(std::size_t idx) const {
    const int k = static_cast<int>(idx % n[2]);
    const int j = static_cast<int>((idx / n[2]) % n[1]);
    const int i = static_cast<int>(idx / (static_cast<std::size_t>(n[1]) * n[2]));
    return {i, j, k};
  }
  double coord(int d, int i) const { return spacing(d) * i; }

  // Signed integer mode for FFT bin m along axis d (m in [0, n)).
  int signed_mode(int d, int m) const { return m <= n[d] / 2 ? m : m - n[d]; }
  // Spectral wavenumber 2 pi m~ / L. The Nyquist bin is zeroed for odd
  // derivatives so the operator stays skew-adjoint on the real lattice.
  double wavenumber(int d, int m) const {
    if (n[d] % 2 == 0 && m == n[d] / 2) return 0.0;
    return 2.0 * 3.14159265358979323846 * signed_mode(d, m) / extent[d];
  }

  bool operator==(const Grid& o) const { return n == o.n && extent == o.extent; }
};

}  // namespace cl3
