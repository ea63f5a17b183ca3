#pragma once

#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "cl3/evolution.hpp"
#include "cl3/field.hpp"
#include "cl3/hydro.hpp"

// Convergence studies: temporal order against the closed-form plane wave, and
// simultaneous (dx, dt) refinement of the derived-law residuals on an evolved
// bump. Shared by the `convergence` subcommand and the acceptance suite.

namespace cl3 {

struct TemporalStudy {
  std::vector<double> dts;
  std::vector<double> errors;   // max-norm error vs the closed form at t_end
  std::vector<double> orders;   // log2(e_i / e_{i+1})
  std::vector<double> seconds;  // wall time per run
};

inline TemporalStudy temporal_order_study(const Grid& g, const PlaneWaveSpec& spec,
                                          const PhysicsParams& params, double t_end,
                                          double dt0, int levels = 3) {
  TemporalStudy out;
  for (int lvl = 0; lvl < levels; ++lvl) {
    const double dt = dt0 / std::pow(2.0, lvl);
    SchemeConfig sc;
    sc.mode = Mode::nonlinear_regularized;
    sc.dt = dt;
    sc.t_end = t_end;
    const auto t0 = std::chrono::steady_clock::now();
    SpinorField f = plane_wave_field(g, spec, params, 0.0);
    Stepper st(g, sc, params, PotentialSpec{});
    const long n = std::lround(t_end / dt);
    for (long it = 0; it < n; ++it) st.step(f, dt);
    const SpinorField exact = plane_wave_field(g, spec, params, f.t);
    double err = 0.0;
    for (std::size_t p = 0; p < f.data.size(); ++p)
      for (int mu = 0; mu < 4; ++mu)
        err = std::max(err, std::abs(f.data[p].c[mu] - exact.data[p].c[mu]));
    out.dts.push_back(dt);
    out.errors.push_back(err);
    out.seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  for (std::size_t i = 0; i + 1 < out.errors.size(); ++i)
    out.orders.push_back(std::log2(out.errors[i] / out.errors[i + 1]));
  return out;
}

struct LawSeries {
  std::string law;
  std::string sector;
  std::vector<double> l2;      // one per refinement level
  std::vector<double> orders;  // between consecutive levels

  double min_order() const {
    double m = 1e30;
    for (double o : orders) m = std::min(m, o);
    return m;
  }
  bool at_floor(double floor) const {
    for (double v : l2)
      if (v > floor) return false;
    return true;
  }
};

namespace detail {

struct LevelResiduals {
  std::vector<ResidualStats> all;
};

// Evolve to t_end keeping a rolling 3-snapshot window (spacing dt) and run
// every derived law on the final window.
inline LevelResiduals level_residuals(int n, const GaussianBumpSpec& bump,
                                      const PhysicsParams& params,
                                      const PotentialSpec& A, double t_end,
                                      double cfl) {
  Grid g;
  g.n = {n, n, n};
  GaussianBumpSpec b = bump;
  for (int d = 0; d < 3; ++d) b.center[d] = 0.5 * g.extent[d];

  SchemeConfig sc;
  sc.mode = Mode::nonlinear_regularized;
  sc.dt = cfl * g.min_spacing();
  sc.t_end = t_end;
  const long nsteps = std::max<long>(3, std::lround(std::ceil(t_end / sc.dt)));

  SpinorField f = gaussian_bump_field(g, b);
  Stepper stepper(g, sc, params, A);
  std::vector<SpinorField> window;
  for (long it = 0; it < nsteps; ++it) {
    stepper.step(f, sc.dt);
    window.push_back(f);
    if (window.size() > 3) window.erase(window.begin());
  }
  const auto w = SnapshotWindow::centered(window, 1);

  Differentiator& diff = stepper.differentiator();
  LevelResiduals out;
  for (const auto& r : conservation_residuals(w, diff, A, params, TimeDeriv::window))
    out.all.push_back(r);
  for (const Sector sector : {Sector::right, Sector::left}) {
    for (const auto& r : em_divergence_residuals(w, diff, A, params, sector))
      out.all.push_back(r);
    for (const auto& r : current_evolution_residuals(w, diff, A, params, sector))
      out.all.push_back(r);
    for (const auto& r : hydro_residuals(w, diff, A, params, sector))
      out.all.push_back(r);
    const auto d = field_derivs(*w.mid, diff, A, params);
    const SectorState st = sector_state(*w.mid, d, A, params, sector);
    out.all.push_back(t_expression_residual(st, diff));
    out.all.push_back(quantization_residual_stats(st, diff));
  }
  return out;
}

}  // namespace detail

inline std::vector<LawSeries> refinement_study(const std::vector<int>& levels,
                                               const GaussianBumpSpec& bump,
                                               const PhysicsParams& params,
                                               const PotentialSpec& A, double t_end,
                                               double cfl = 0.25) {
  std::vector<LawSeries> series;
  for (std::size_t lvl = 0; lvl < levels.size(); ++lvl) {
    const auto res = detail::level_residuals(levels[lvl], bump, params, A, t_end, cfl);
    if (series.empty()) {
      for (const auto& r : res.all) {
        LawSeries s;
        s.law = r.law;
        s.sector = r.sector;
        series.push_back(s);
      }
    }
    for (std::size_t i = 0; i < res.all.size(); ++i) series[i].l2.push_back(res.all[i].l2);
  }
  for (auto& s : series)
    for (std::size_t i = 0; i + 1 < s.l2.size(); ++i)
      s.orders.push_back(std::log2(std::max(s.l2[i], 1e-300) /
                                   std::max(s.l2[i + 1], 1e-300)));
  return series;
}

// Every derived law evaluated on analytic plane-wave snapshots; all must sit
// at rounding level. D_1/D_2 conservation uses the equation-consistent time
// derivative (those currents rotate in time and the window differencing on
// them is a discretization check, not a zero check).
inline std::vector<ResidualStats> plane_wave_law_check(const Grid& g,
                                                       const PlaneWaveSpec& spec,
                                                       const PhysicsParams& params,
                                                       double t0, double dt) {
  std::vector<SpinorField> traj;
  for (int it = -1; it <= 1; ++it)
    traj.push_back(plane_wave_field(g, spec, params, t0 + it * dt));
  const auto w = SnapshotWindow::centered(traj, 1);
  Differentiator diff(g, DerivativeKind::spectral);
  const PotentialSpec A;

  std::vector<ResidualStats> out;
  const auto cons_w = conservation_residuals(w, diff, A, params, TimeDeriv::window);
  out.push_back(cons_w[0]);
  out.push_back(cons_w[3]);
  const auto cons_e = conservation_residuals(w, diff, A, params, TimeDeriv::equation);
  out.push_back(cons_e[1]);
  out.push_back(cons_e[2]);
  for (const Sector sector : {Sector::right, Sector::left}) {
    for (const auto& r : em_divergence_residuals(w, diff, A, params, sector))
      out.push_back(r);
    for (const auto& r : current_evolution_residuals(w, diff, A, params, sector))
      out.push_back(r);
    for (const auto& r : hydro_residuals(w, diff, A, params, sector)) out.push_back(r);
    const auto d = field_derivs(*w.mid, diff, A, params);
    const SectorState st = sector_state(*w.mid, d, A, params, sector);
    out.push_back(t_expression_residual(st, diff));
    out.push_back(quantization_residual_stats(st, diff));
    out.push_back(tetrode_trace_residual(st));
    out.push_back(momentum_contraction_residual(st));
    out.push_back(epsilon_convention_residual(st, diff));
  }
  out.push_back(orthogonality_residual(*w.mid));
  return out;
}

}  // namespace cl3
