#pragma once

#include <cmath>
#include <vector>

#include "cl3/grid.hpp"
#include "cl3/paravector.hpp"
#include "cl3/physics.hpp"
#include "cl3/random.hpp"

namespace cl3 {

struct SpinorField {
  Grid grid;
  std::vector<Paravector> data;
  double t = 0.0;

  static SpinorField zeros(const Grid& g) {
    SpinorField f;
    f.grid = g;
    f.data.assign(g.size(), Paravector{});
    return f;
  }

  bool all_finite() const {
    for (const auto& p : data)
      if (!cl3::all_finite(p)) return false;
    return true;
  }
};

// Discrete L2 norm, spacing-weighted: ||phi||^2 = sum_p ||phi_p||_F^2 dV.
inline double l2_norm(const SpinorField& f) {
  double s = 0.0;
  for (const auto& p : f.data) s += frobenius_sq(p);
  const double dv = f.grid.spacing(0) * f.grid.spacing(1) * f.grid.spacing(2);
  return std::sqrt(s * dv);
}

template <typename F>
inline SpinorField sample_field(const Grid& g, double t, F&& fn) {
  SpinorField f = SpinorField::zeros(g);
  f.t = t;
  for (int i = 0; i < g.n[0]; ++i)
    for (int j = 0; j < g.n[1]; ++j)
      for (int k = 0; k < g.n[2]; ++k)
        f.data[g.index(i, j, k)] =
            fn(std::array<double, 4>{t, g.coord(0, i), g.coord(1, j), g.coord(2, k)});
  return f;
}

inline SpinorField plane_wave_field(const Grid& g, const PlaneWaveSpec& spec,
                                    const PhysicsParams& params, double t) {
  return sample_field(g, t, [&](const std::array<double, 4>& x) {
    return plane_wave_eval(spec, params, x);
  });
}

// Spatial wave numbers of a plane wave must hit grid modes or the sampled
// field is not periodic. Returns the worst distance to an integer mode.
inline double plane_wave_commensurability(const Grid& g, const PlaneWaveSpec& spec,
                                          const PhysicsParams& params) {
  const Paravector V = spec.V();
  double worst = 0.0;
  for (int d = 0; d < 3; ++d) {
    const double mode = params.m * V.c[d + 1].real() * g.extent[d] / (2.0 * M_PI);
    worst = std::max(worst, std::abs(mode - std::round(mode)));
  }
  return worst;
}

inline SpinorField plane_wave_field_in_potential(const Grid& g,
                                                 const PlaneWaveSpec& spec,
                                                 const PhysicsParams& params,
                                                 const Paravector& A_const, double t) {
  return sample_field(g, t, [&](const std::array<double, 4>& x) {
    return plane_wave_eval_in_potential(spec, params, A_const, x);
  });
}

// Smooth periodic bump: exp(-(L/(pi w))^2 sin^2(pi (x - c)/L)) per axis,
// reducing to a Gaussian of width w near the center.
inline double periodic_bump(double x, double center, double extent, double width) {
  const double s = std::sin(M_PI * (x - center) / extent);
  const double a = extent / (M_PI * width);
  return std::exp(-a * a * s * s);
}

struct GaussianBumpSpec {
  Paravector background = Paravector::scalar(1.0);
  Paravector bump_dir = Paravector::scalar(1.0);
  double amplitude = 0.2;
  double width = 1.0;
  std::array<double, 3> center{};          // box center when empty-config omits it
  std::array<int, 3> carrier{0, 0, 0};     // integer carrier modes of the phase rotor
};

// background + amplitude * G(x) * bump_dir * exp(-i (k_c . x) e_3).
inline SpinorField gaussian_bump_field(const Grid& g, const GaussianBumpSpec& spec,
                                       double t = 0.0) {
  return sample_field(g, t, [&](const std::array<double, 4>& x) {
    double env = spec.amplitude;
    double phase = 0.0;
    for (int d = 0; d < 3; ++d) {
      env *= periodic_bump(x[d + 1], spec.center[d], g.extent[d], spec.width);
      phase += 2.0 * M_PI * spec.carrier[d] * x[d + 1] / g.extent[d];
    }
    return spec.background + env * mul(spec.bump_dir, phase_rotor(phase));
  });
}

// Band-limited random field: constant background plus a few random Fourier
// modes per coefficient, used by the randomized structural-law suites.
inline SpinorField random_smooth_field(const Grid& g, Rng& rng, int max_mode = 2,
                                       double background = 1.0, double amplitude = 0.25,
                                       double t = 0.0) {
  struct Mode {
    std::array<int, 3> k;
    Paravector amp;
  };
  std::vector<Mode> modes;
  std::uniform_int_distribution<int> md(-max_mode, max_mode);
  for (int nmode = 0; nmode < 4; ++nmode) {
    Mode m;
    m.k = {md(rng), md(rng), md(rng)};
    m.amp = amplitude * random_paravector(rng);
    modes.push_back(m);
  }
  const Paravector bg = background * Paravector::scalar(1.0) +
                        0.3 * amplitude * random_paravector(rng);
  return sample_field(g, t, [&](const std::array<double, 4>& x) {
    Paravector v = bg;
    for (const auto& m : modes) {
      double ph = 0.0;
      for (int d = 0; d < 3; ++d) ph += 2.0 * M_PI * m.k[d] * x[d + 1] / g.extent[d];
      v += std::exp(cplx(0.0, ph)) * m.amp;
    }
    return v;
  });
}

}  // namespace cl3
