#include <catch2/catch_amalgamated.hpp>

#include "cl3/hydro.hpp"
#include "cl3/lorentz.hpp"
#include "cl3/random.hpp"

using namespace cl3;

namespace {

Grid cube(int n) {
  Grid g;
  g.n = {n, n, n};
  return g;
}

struct Setup {
  Grid g = cube(16);
  PhysicsParams params;
  PotentialSpec A;
  Mode mode = Mode::nonlinear_regularized;
};

SectorState make_state(const Setup& su, const SpinorField& f, Differentiator& diff,
                       Sector sector) {
  const auto d = field_derivs(f, diff, su.A, su.params);
  return sector_state(f, d, su.A, su.params, sector);
}

SpinorField boosted_plane_wave_field(const Grid& g, const PhysicsParams& params,
                                     double t, PlaneWaveSpec* out_spec = nullptr) {
  // commensurate moving wave: m V_vec = (1, 0, 0) on the 2 pi box
  const auto spec = PlaneWaveSpec::from_velocity(1.0, {1.0 / params.m, 0.0, 0.0}, 0.4);
  if (out_spec) *out_spec = spec;
  REQUIRE(plane_wave_commensurability(g, spec, params) < 1e-12);
  return plane_wave_field(g, spec, params, t);
}

}  // namespace

TEST_CASE("currents: definitions and split") {
  Setup su;
  SpinorField f = sample_field(su.g, 0.0, [](const std::array<double, 4>&) {
    return Paravector::scalar(1.0);
  });
  const CurrentSet cs = currents(f);
  // phi = e0: D_0 = e_0, D_k = e_k
  for (int k = 0; k < 4; ++k)
    for (int mu = 0; mu < 4; ++mu)
      CHECK(cs.D[k][0].c[mu].real() == (mu == k ? 1.0 : 0.0));

  Rng rng(601);
  Differentiator diff(su.g, DerivativeKind::spectral);
  SpinorField rf = random_smooth_field(su.g, rng);
  const CurrentSet rc = currents(rf);
  double worst = 0.0;
  for (std::size_t p = 0; p < rf.data.size(); p += 97) {
    const Paravector jl = re(mul(mul(rf.data[p], projector_P()), dagger(rf.data[p])));
    const Paravector jr = re(mul(mul(rf.data[p], projector_Pbar()), dagger(rf.data[p])));
    for (int mu = 0; mu < 4; ++mu) {
      worst = std::max(worst, std::abs(rc.j_left[p].c[mu] - jl.c[mu]));
      worst = std::max(worst, std::abs(rc.j_right[p].c[mu] - jr.c[mu]));
    }
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("orthogonality and lightlike currents on random smooth fields") {
  Setup su;
  Rng rng(607);
  for (int it = 0; it < 5; ++it) {
    SpinorField f = random_smooth_field(su.g, rng);
    const auto orth = orthogonality_residual(f);
    CHECK(orth.rel < 1e-11);
    for (const Sector s : {Sector::right, Sector::left}) {
      const RField ll = chiral_lightlike_check(f, s);
      double worst = 0.0;
      for (double v : ll) worst = std::max(worst, v);
      CHECK(worst < 1e-12);
    }
  }
  // boosted field stays lightlike
  SpinorField f = random_smooth_field(su.g, rng);
  const auto l = mul(boost({0.3, -0.2, 0.5}).l, rotation({0.1, 0.8, -0.4}).l);
  for (auto& p : f.data) p = mul(l, p);
  const RField ll = chiral_lightlike_check(f, Sector::left);
  double worst = 0.0;
  for (double v : ll) worst = std::max(worst, v);
  CHECK(worst < 1e-12);

  // phi = P: the right current vanishes identically, trivially lightlike
  SpinorField fp = sample_field(su.g, 0.0, [](const std::array<double, 4>&) {
    return projector_P();
  });
  for (double v : chiral_lightlike_check(fp, Sector::right)) CHECK(v == 0.0);
}

TEST_CASE("hydro fields carry a unit velocity where unmasked") {
  Setup su;
  Rng rng(611);
  Differentiator diff(su.g, DerivativeKind::spectral);
  SpinorField f = random_smooth_field(su.g, rng);
  for (const Sector sector : {Sector::right, Sector::left}) {
    const auto hf = hydro_fields(make_state(su, f, diff, sector));
    for (std::size_t p = 0; p < hf.rho.size(); ++p) {
      if (!hf.mask[p]) continue;
      const double vn = std::sqrt(hf.v[0][p] * hf.v[0][p] + hf.v[1][p] * hf.v[1][p] +
                                  hf.v[2][p] * hf.v[2][p]);
      CHECK(std::abs(vn - 1.0) < 1e-10);
      CHECK(std::abs(hf.u_lower[0][p] * hf.rho[p] - hf.p_lower[0][p]) < 1e-12);
    }
  }
}

TEST_CASE("kinematic tensor identities on random smooth fields") {
  Setup su;
  su.params.m = 1.2;
  su.params.q = 0.5;
  su.A.kind = PotentialSpec::Kind::constant;
  su.A.value = Paravector{0.3, 0.1, -0.2, 0.4};
  Differentiator diff(su.g, DerivativeKind::spectral);
  Rng rng(613);
  for (int it = 0; it < 3; ++it) {
    SpinorField f = random_smooth_field(su.g, rng);
    for (const Sector sector : {Sector::right, Sector::left}) {
      const SectorState st = make_state(su, f, diff, sector);
      CHECK(st.masked_fraction < 0.05);
      CHECK(momentum_contraction_residual(st).rel < 1e-10);
      CHECK(t_expression_residual(st, diff).rel < 1e-9);
      CHECK(epsilon_convention_residual(st, diff).rel < 1e-9);
      CHECK(quantization_residual_stats(st, diff).l2 < 1e-8);
    }
  }
}

TEST_CASE("tetrode trace vanishes with the equation-consistent derivative") {
  Setup su;
  su.params.m = 1.0;
  Differentiator diff(su.g, DerivativeKind::spectral);
  SpinorField f = boosted_plane_wave_field(su.g, su.params, 0.3);
  for (const Sector sector : {Sector::right, Sector::left}) {
    const SectorState st = make_state(su, f, diff, sector);
    CHECK(tetrode_trace_residual(st).rel < 1e-10);
  }
  // also on arbitrary smooth fields: the equation supplies the d_0 slice
  Rng rng(617);
  for (int it = 0; it < 3; ++it) {
    SpinorField rf = random_smooth_field(su.g, rng);
    for (const Sector sector : {Sector::right, Sector::left}) {
      const SectorState st = make_state(su, rf, diff, sector);
      CHECK(tetrode_trace_residual(st).rel < 1e-10);
    }
  }
  // a genuinely static (d_0 = 0) constant field is no solution: trace = m/2
  SpinorField cf = sample_field(su.g, 0.0, [](const std::array<double, 4>&) {
    return Paravector::scalar(1.0);
  });
  FieldDerivs d;
  d.d0.assign(cf.data.size(), Paravector{});
  for (auto& dk : d.dk) dk.assign(cf.data.size(), Paravector{});
  const SectorState st = sector_state(cf, d, su.A, su.params, Sector::right);
  double tr = 0.0;
  for (int mu = 0; mu < 4; ++mu) tr += st.T[mu][mu][0];
  CHECK(std::abs(tr - 0.5 * su.params.m) < 1e-12);
}

TEST_CASE("plane wave: tensors constant, window laws vanish") {
  Setup su;
  su.params.m = 1.0;
  Differentiator diff(su.g, DerivativeKind::spectral);
  const double dt = 0.05;
  std::vector<SpinorField> traj;
  for (int it = -1; it <= 1; ++it)
    traj.push_back(boosted_plane_wave_field(su.g, su.params, 0.2 + it * dt));
  const auto w = SnapshotWindow::centered(traj, 1);

  for (const Sector sector : {Sector::right, Sector::left}) {
    for (const auto& r : em_divergence_residuals(w, diff, su.A, su.params, sector))
      CHECK(r.l2 < 1e-10);
    for (const auto& r :
         current_evolution_residuals(w, diff, su.A, su.params, sector))
      CHECK(r.l2 < 1e-10);
    for (const auto& r : hydro_residuals(w, diff, su.A, su.params, sector))
      CHECK(r.l2 < 1e-10);
  }

  // D0 and D3 laws vanish with window differencing; D1 and D2 spin in time, so
  // the equation-consistent derivative is the right check there
  const auto cons_w =
      conservation_residuals(w, diff, su.A, su.params, TimeDeriv::window);
  CHECK(cons_w[0].l2 < 1e-10);
  CHECK(cons_w[3].l2 < 1e-10);
  const auto cons_e =
      conservation_residuals(w, diff, su.A, su.params, TimeDeriv::equation);
  for (const auto& r : cons_e) CHECK(r.l2 < 1e-10);

  // adding a constant potential keeps Gamma constant, so G = 0 and the
  // divergence balance still vanishes on the (stationary-tensor) wave
  Setup sa = su;
  sa.params.q = 0.7;
  sa.A.kind = PotentialSpec::Kind::constant;
  sa.A.value = Paravector{0.4, 0.1, -0.2, 0.3};
  for (const Sector sector : {Sector::right, Sector::left})
    for (const auto& r : em_divergence_residuals(w, diff, sa.A, sa.params, sector))
      CHECK(r.l2 < 1e-10);
}

TEST_CASE("plane wave in a constant potential satisfies every law") {
  Setup su;
  su.params.m = 1.0;
  su.params.q = 0.5;
  su.A.kind = PotentialSpec::Kind::constant;
  su.A.value = Paravector{0.6, 2.0, 0.0, 0.0};  // spatial part shifts the phase modes

  // phase gradient is Gamma = qA + mV; pick V so the combined spatial modes
  // are integers on the 2 pi box
  const auto spec = PlaneWaveSpec::from_velocity(1.0, {1.0, 0.0, 0.0}, 0.2);
  const Paravector gamma = plane_wave_gamma(spec, su.params, su.A.value);
  for (int d = 0; d < 3; ++d) {
    const double mode = gamma.c[d + 1].real() * su.g.extent[d] / (2.0 * M_PI);
    REQUIRE(std::abs(mode - std::round(mode)) < 1e-12);
  }

  const double dt = 0.04;
  std::vector<SpinorField> traj;
  for (int it = -1; it <= 1; ++it)
    traj.push_back(
        plane_wave_field_in_potential(su.g, spec, su.params, su.A.value, 0.3 + it * dt));
  const auto w = SnapshotWindow::centered(traj, 1);
  Differentiator diff(su.g, DerivativeKind::spectral);

  // the residual of the first-order equation itself vanishes pointwise:
  // equation-consistent d_0 must match the analytic time derivative
  const auto d0 = guarded_time_derivative(*w.mid, diff, su.A, su.params);
  double derr = 0.0;
  for (std::size_t p = 0; p < w.mid->data.size(); p += 211) {
    const Paravector analytic =
        cplx(0.0, -gamma.c[0].real()) * mul(w.mid->data[p], e3());
    for (int mu = 0; mu < 4; ++mu)
      derr = std::max(derr, std::abs(d0[p].c[mu] - analytic.c[mu]));
  }
  CHECK(derr < 1e-11);

  const auto cons =
      conservation_residuals(w, diff, su.A, su.params, TimeDeriv::equation);
  for (const auto& r : cons) {
    INFO(r.law);
    CHECK(r.l2 < 1e-10);
  }
  for (const Sector sector : {Sector::right, Sector::left}) {
    for (const auto& r : em_divergence_residuals(w, diff, su.A, su.params, sector))
      CHECK(r.l2 < 1e-10);
    for (const auto& r : current_evolution_residuals(w, diff, su.A, su.params, sector))
      CHECK(r.l2 < 1e-10);
    for (const auto& r : hydro_residuals(w, diff, su.A, su.params, sector))
      CHECK(r.l2 < 1e-10);
    const auto d = field_derivs(*w.mid, diff, su.A, su.params);
    const SectorState st = sector_state(*w.mid, d, su.A, su.params, sector);
    CHECK(tetrode_trace_residual(st).rel < 1e-10);
    CHECK(t_expression_residual(st, diff).rel < 1e-9);
    CHECK(quantization_residual_stats(st, diff).l2 < 1e-10);
  }
}

TEST_CASE("conservation laws hold on evolved generic data") {
  // evolve a perturbed background with the exact nonlinearity and check that
  // every windowed law is small and dominated by the time-differencing error
  Setup su;
  su.params.m = 1.0;
  su.params.lambda = 0.0;
  Grid g = cube(16);
  GaussianBumpSpec bump;
  bump.background = Paravector{1.0, 0.0, 0.0, 0.0};
  bump.amplitude = 0.15;
  bump.width = 1.1;
  bump.center = {M_PI, M_PI, M_PI};
  bump.carrier = {1, 0, 0};
  SpinorField f0 = gaussian_bump_field(g, bump);

  SchemeConfig sc;
  sc.mode = Mode::nonlinear_regularized;
  sc.dt = 0.02;
  sc.t_end = 0.2;
  const auto traj = evolve(f0, su.A, su.params, sc, 1);
  REQUIRE(traj.size() >= 5);
  const auto w = SnapshotWindow::centered(traj, traj.size() / 2);
  Differentiator diff(g, DerivativeKind::spectral);

  const auto cons =
      conservation_residuals(w, diff, su.A, su.params, TimeDeriv::window);
  for (const auto& r : cons) {
    INFO(r.law << " rel=" << r.rel);
    CHECK(r.rel < 5e-3);  // bounded by (w dt)^2-level differencing error
  }
  for (const Sector sector : {Sector::right, Sector::left}) {
    for (const auto& r :
         em_divergence_residuals(w, diff, su.A, su.params, sector)) {
      INFO(r.law << " " << r.sector << " rel=" << r.rel);
      CHECK(r.rel < 5e-3);
    }
    for (const auto& r :
         current_evolution_residuals(w, diff, su.A, su.params, sector)) {
      INFO(r.law << " " << r.sector << " rel=" << r.rel);
      CHECK(r.rel < 5e-3);
    }
    for (const auto& r : hydro_residuals(w, diff, su.A, su.params, sector)) {
      INFO(r.law << " " << r.sector << " rel=" << r.rel);
      CHECK(r.rel < 5e-3);
    }
  }
}

TEST_CASE("windowed laws converge under simultaneous refinement") {
  // halving dx and dt together must shrink the residuals at second order
  // (time differencing dominates; the spectral floor drops faster); a flipped
  // sign in any law would stall the residual at O(1)
  Setup su;
  su.params.m = 1.0;
  su.params.lambda = 0.0;

  auto residuals_at = [&](int n, double dt) {
    Grid g = cube(n);
    GaussianBumpSpec bump;
    bump.background = Paravector{1.0, 0.0, 0.0, 0.0};
    bump.amplitude = 0.12;
    bump.width = 1.2;
    bump.center = {M_PI, M_PI, M_PI};
    bump.carrier = {0, 1, 0};
    SpinorField f0 = gaussian_bump_field(g, bump);
    Differentiator diff(g, DerivativeKind::spectral);
    SchemeConfig sc;
    sc.mode = Mode::nonlinear_regularized;
    sc.dt = dt;
    sc.t_end = 8 * dt;
    const auto traj = evolve(f0, su.A, su.params, sc, 1);
    const auto w = SnapshotWindow::centered(traj, 4);
    std::vector<double> out;
    for (const auto& r :
         conservation_residuals(w, diff, su.A, su.params, TimeDeriv::window))
      out.push_back(r.l2);
    for (const Sector sector : {Sector::right, Sector::left}) {
      for (const auto& r :
           em_divergence_residuals(w, diff, su.A, su.params, sector))
        out.push_back(r.l2);
      for (const auto& r : hydro_residuals(w, diff, su.A, su.params, sector))
        out.push_back(r.l2);
    }
    return out;
  };
  const auto r1 = residuals_at(16, 0.04);
  const auto r2 = residuals_at(32, 0.02);
  REQUIRE(r1.size() == r2.size());
  for (std::size_t i = 0; i < r1.size(); ++i) {
    if (r1[i] < 1e-11) continue;  // already at the floor
    const double order = std::log2(r1[i] / r2[i]);
    INFO("law " << i << " r1=" << r1[i] << " r2=" << r2[i] << " order=" << order);
    CHECK(order > 1.5);
  }
}

TEST_CASE("quantization negative control has power") {
  Grid g = cube(16);
  Differentiator diff(g, DerivativeKind::spectral);
  const std::size_t NP = g.size();
  RField rho(NP, 1.0);
  std::array<RField, 3> j;
  for (auto& c : j) c.assign(NP, 0.0);
  j[2].assign(NP, 1.0);  // v = e_z, constant, |v| = 1
  std::array<RField, 3> wnum;
  for (auto& c : wnum) c.assign(NP, 0.0);
  for (int i = 0; i < g.n[0]; ++i)
    for (int jj = 0; jj < g.n[1]; ++jj)
      for (int k = 0; k < g.n[2]; ++k)
        wnum[1][g.index(i, jj, k)] = std::sin(g.coord(0, i));  // u = (0, sin x, 0)
  std::vector<std::uint8_t> mask(NP, 1);
  const auto q = quantization_residual_fields(g, diff, rho, j, wnum, mask);
  double l2 = 0.0;
  for (int i = 0; i < 3; ++i)
    for (double v : q[i]) l2 += v * v;
  l2 = std::sqrt(l2 * detail::cell_volume(g));
  CHECK(l2 > 1e-1);  // curl u = O(1), far above the spinor-derived floor
}

TEST_CASE("flowlines: straight lines and integrator order") {
  Grid g = cube(8);
  // constant unit v field: straight lines at unit speed
  const std::size_t NP = g.size();
  std::array<RField, 3> v;
  for (auto& c : v) c.assign(NP, 0.0);
  v[0].assign(NP, 1.0);
  GridVelocitySampler sampler(g, v, std::vector<std::uint8_t>(NP, 1));
  const auto line = integrate_flowline(sampler, {0.5, 0.5, 0.5}, 2.0, 0.1);
  const auto& last = line.points.back();
  CHECK(last[0] == Catch::Approx(2.0));
  CHECK(last[1] == Catch::Approx(2.5).margin(1e-12));
  CHECK(last[2] == Catch::Approx(0.5).margin(1e-12));

  // pilot congruence of a plane wave: straight subluminal lines
  PhysicsParams params;
  params.m = 1.0;
  PlaneWaveSpec spec;
  SpinorField f = boosted_plane_wave_field(g, params, 0.0, &spec);
  Differentiator diff(g, DerivativeKind::spectral);
  PotentialSpec A;
  const auto d = field_derivs(f, diff, A, params);
  const SectorState st = sector_state(f, d, A, params, Sector::right);
  const auto lines = flowlines(f, st, {{1.0, 1.0, 1.0}}, 1.0, 0.05);
  const Paravector V = spec.V();
  const double vx = V.c[1].real() / V.c[0].real();
  CHECK(std::abs(vx) < 1.0);
  const auto& plast = lines.pilot[0].points.back();
  CHECK(plast[1] == Catch::Approx(1.0 + vx * 1.0).margin(1e-9));
  // chiral congruence moves at light speed
  const auto& clast = lines.chiral[0].points.back();
  const double dist = std::hypot(clast[1] - 1.0, clast[2] - 1.0, clast[3] - 1.0);
  CHECK(dist == Catch::Approx(1.0).margin(1e-6));

  // RK4 order on an analytic circular field
  auto circular = [](const std::array<double, 3>& x) {
    return std::array<double, 3>{-x[1], x[0], 0.0};
  };
  auto err_at = [&](double h) {
    const auto l = integrate_flowline(circular, {1.0, 0.0, 0.0}, 1.0, h);
    const auto& e = l.points.back();
    return std::hypot(e[1] - std::cos(1.0), e[2] - std::sin(1.0));
  };
  const double p = std::log2(err_at(0.05) / err_at(0.025));
  CHECK(p > 3.7);
  CHECK(p < 4.3);
}

TEST_CASE("time-dependent flowlines across a snapshot sequence") {
  Grid g = cube(8);
  PhysicsParams params;
  params.m = 1.0;
  PotentialSpec A;
  PlaneWaveSpec spec;
  std::vector<SpinorField> traj;
  for (int it = 0; it <= 4; ++it)
    traj.push_back(boosted_plane_wave_field(g, params, 0.1 * it, &spec));
  Differentiator diff(g, DerivativeKind::spectral);
  const auto lines = flowlines_over_trajectory(traj, Sector::right, diff, A, params,
                                               {{1.0, 1.0, 1.0}}, 0.02);
  // the pilot congruence of a plane wave is a straight line with slope V/V0
  const Paravector V = spec.V();
  const double vx = V.c[1].real() / V.c[0].real();
  const auto& last = lines.pilot[0].points.back();
  CHECK(last[0] == Catch::Approx(0.4));
  CHECK(last[1] == Catch::Approx(1.0 + 0.4 * vx).margin(1e-9));
  CHECK(last[2] == Catch::Approx(1.0).margin(1e-9));
  // chiral lines move at unit speed over the same interval
  const auto& clast = lines.chiral[0].points.back();
  const double dist = std::hypot(clast[1] - 1.0, clast[2] - 1.0, clast[3] - 1.0);
  CHECK(dist == Catch::Approx(0.4).margin(1e-6));
}

TEST_CASE("flowline leaves the domain over masked regions") {
  Grid g = cube(8);
  const std::size_t NP = g.size();
  std::array<RField, 3> v;
  for (auto& c : v) c.assign(NP, 0.0);
  v[0].assign(NP, 1.0);
  std::vector<std::uint8_t> mask(NP, 1);
  for (int j = 0; j < g.n[1]; ++j)
    for (int k = 0; k < g.n[2]; ++k) mask[g.index(4, j, k)] = 0;
  GridVelocitySampler sampler(g, v, mask);
  CHECK_THROWS_AS(integrate_flowline(sampler, {0.1, 0.1, 0.1}, 6.0, 0.05), LeftDomain);
}

TEST_CASE("window requires three snapshots") {
  std::vector<SpinorField> traj(2, SpinorField::zeros(cube(4)));
  CHECK_THROWS_AS(SnapshotWindow::centered(traj, 1), InsufficientSnapshots);
}
