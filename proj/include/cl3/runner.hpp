#pragma once

#include <string>

#include "cl3/config.hpp"
#include "cl3/field.hpp"
#include "cl3/snapshot.hpp"

// Glue between RunConfig and the field/potential builders.

namespace cl3 {

inline PlaneWaveSpec plane_wave_from_initial(const InitialSpec& init,
                                             const PhysicsParams& params) {
  (void)params;
  if (init.have_current) {
    const Paravector J{init.current[0], init.current[1], init.current[2],
                       init.current[3]};
    return PlaneWaveSpec::from_NJ(init.n, J, init.phi0);
  }
  return PlaneWaveSpec::from_velocity(init.n, init.velocity, init.phi0);
}

inline SpinorField build_initial(const RunConfig& cfg) {
  switch (cfg.initial.kind) {
    case InitialSpec::Kind::planewave: {
      const PlaneWaveSpec spec = plane_wave_from_initial(cfg.initial, cfg.physics);
      const double off = plane_wave_commensurability(cfg.grid, spec, cfg.physics);
      if (off > 1e-9)
        throw ConfigError(
            "initial plane wave is not commensurate with the grid (m V_k L / 2pi "
            "misses an integer by " +
            std::to_string(off) + ")");
      return plane_wave_field(cfg.grid, spec, cfg.physics, 0.0);
    }
    case InitialSpec::Kind::gaussian: {
      GaussianBumpSpec bump = cfg.initial.bump;
      if (!cfg.initial.center_set)
        for (int d = 0; d < 3; ++d) bump.center[d] = 0.5 * cfg.grid.extent[d];
      return gaussian_bump_field(cfg.grid, bump);
    }
    case InitialSpec::Kind::file: {
      SpinorField f = read_snapshot(cfg.initial.path);
      if (!(f.grid == cfg.grid))
        throw ConfigError("initial file grid does not match the configured grid");
      return f;
    }
  }
  throw ConfigError("build_initial: unreachable");
}

inline PotentialSpec load_potential(const RunConfig& cfg) {
  PotentialSpec A = cfg.potential;
  if (A.kind == PotentialSpec::Kind::sampled) {
    const SpinorField f = read_snapshot(cfg.potential_file);
    if (!(f.grid == cfg.grid))
      throw ConfigError("sampled potential grid does not match the configured grid");
    A.samples.assign(f.data.begin(), f.data.end());
    for (auto& a : A.samples) a = re(a);
  }
  A.validate(cfg.grid.size());
  return A;
}

}  // namespace cl3
