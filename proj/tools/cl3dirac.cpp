// Command-line driver: algebra invariant suite, plane-wave checks, evolution
// runs, hydrodynamic diagnostics and the convergence study.
//
// Exit codes: 0 success, 2 validation error, 3 numerical failure,
// 4 diagnostic threshold breach under --strict.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cl3/cl3.hpp"

namespace fs = std::filesystem;
using namespace cl3;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitDiagnostic = 4;

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool strict = false;
  int stride = 0;  // 0: use config
  std::string format;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_config = true) {
  if (with_config) cmd->add_option("--config", opts.config_path, "configuration file");
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--seed", opts.seed, "RNG seed")->each([&](const std::string&) {
    opts.seed_set = true;
  });
  cmd->add_flag("--strict", opts.strict, "nonzero exit on diagnostic threshold breach");
  cmd->add_option("--stride", opts.stride, "snapshot stride");
  cmd->add_option("--format", opts.format, "snapshot format (bin|csv)")
      ->check(CLI::IsMember({"bin", "csv"}));
}

RunConfig load_or_default(const CommonOpts& opts) {
  RunConfig cfg;
  if (!opts.config_path.empty()) cfg = load_config(opts.config_path);
  if (!opts.out_dir.empty()) cfg.output.directory = opts.out_dir;
  if (opts.stride > 0) cfg.output.stride = opts.stride;
  if (!opts.format.empty()) cfg.output.format = opts.format;
  if (opts.seed_set) cfg.seed = opts.seed;
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

std::string snapshot_name(int index, const std::string& format) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snap_%06d.%s", index,
                format == "csv" ? "csv" : "bin");
  return buf;
}

// ---------------------------------------------------------------------------

int cmd_algebra_test(std::size_t cases, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto reports = run_algebra_suite(cases, seed);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%-55s %9s %12s %10s %s\n", "law", "cases", "max_err", "tol", "status");
  bool ok = true;
  for (const auto& r : reports) {
    ok = ok && r.pass();
    std::printf("%-55s %9zu %12.3e %10.1e %s\n", r.law.c_str(), r.cases, r.max_err,
                r.tol, r.pass() ? "ok" : "FAIL");
  }
  std::printf("event=algebra-test cases=%zu seed=%llu laws=%zu elapsed=%.3fs status=%s\n",
              cases, static_cast<unsigned long long>(seed), reports.size(), secs,
              ok ? "pass" : "fail");
  return ok ? 0 : kExitDiagnostic;
}

// ---------------------------------------------------------------------------

struct PlaneWaveOpts {
  double density = 1.0;
  std::vector<double> velocity;
  std::vector<double> current;
  double phase0 = 0.0;
  int check_points = 64;
};

int cmd_planewave(const CommonOpts& common, const PlaneWaveOpts& pw) {
  RunConfig cfg = load_or_default(common);
  InitialSpec init = cfg.initial;
  if (!pw.velocity.empty() || !pw.current.empty() || common.config_path.empty()) {
    init = InitialSpec{};
    init.kind = InitialSpec::Kind::planewave;
    init.n = pw.density;
    init.phi0 = pw.phase0;
    if (!pw.current.empty()) {
      init.have_current = true;
      for (int i = 0; i < 4; ++i) init.current[i] = pw.current[i];
    } else if (!pw.velocity.empty()) {
      for (int i = 0; i < 3; ++i) init.velocity[i] = pw.velocity[i];
    }
  }
  if (init.kind != InitialSpec::Kind::planewave)
    throw ConfigError("planewave: config initial kind is not planewave");

  const PlaneWaveSpec spec = plane_wave_from_initial(init, cfg.physics);
  const Paravector V = spec.V();
  const double detv = det(V).real();
  const double v0id =
      V.c[0].real() - std::sqrt(1.0 + std::norm(V.c[1]) + std::norm(V.c[2]) +
                                std::norm(V.c[3]));

  // residual of the first-order equation with analytic derivatives at sample
  // points of the box
  Rng rng(cfg.seed + 1);
  std::uniform_real_distribution<double> ux(0.0, 1.0);
  double max_res = 0.0;
  for (int it = 0; it < pw.check_points; ++it) {
    std::array<double, 4> x{ux(rng) * 2.0, ux(rng) * cfg.grid.extent[0],
                            ux(rng) * cfg.grid.extent[1], ux(rng) * cfg.grid.extent[2]};
    PhysicsParams p0 = cfg.physics;
    p0.lambda = 0.0;
    const Paravector phi = plane_wave_eval(spec, p0, x);
    const auto dhat = plane_wave_grad_hat(spec, p0, x);
    max_res = std::max(
        max_res, frobenius_norm(nonlinear_residual(phi, dhat, Paravector{}, p0)) /
                     std::max(1.0, frobenius_norm(phi)));
  }

  std::printf("M =");
  for (int mu = 0; mu < 4; ++mu)
    std::printf(" %.12g%+.12gi", spec.M.c[mu].real(), spec.M.c[mu].imag());
  std::printf("\nN = %.12g\n", spec.N());
  std::printf("det(V) - 1      = %.3e\n", detv - 1.0);
  std::printf("V0 - sqrt(1+v2) = %.3e\n", v0id);
  std::printf("max |residual|  = %.3e  (analytic derivatives, %d points)\n", max_res,
              pw.check_points);

  if (!common.out_dir.empty()) {
    const double off = plane_wave_commensurability(cfg.grid, spec, cfg.physics);
    if (off > 1e-9)
      throw ConfigError("plane wave is not commensurate with the grid; cannot sample");
    fs::create_directories(common.out_dir);
    const SpinorField f = plane_wave_field(cfg.grid, spec, cfg.physics, 0.0);
    const fs::path path = fs::path(common.out_dir) / snapshot_name(0, cfg.output.format);
    if (cfg.output.format == "csv")
      write_snapshot_csv(path.string(), f);
    else
      write_snapshot(path.string(), f);
    std::printf("event=snapshot path=%s\n", path.string().c_str());
  }

  const bool ok = std::abs(detv - 1.0) < 1e-12 && std::abs(v0id) < 1e-12 &&
                  max_res < 1e-12;
  std::printf("event=planewave status=%s\n", ok ? "pass" : "fail");
  return ok ? 0 : (common.strict ? kExitDiagnostic : 0);
}

// ---------------------------------------------------------------------------

int cmd_evolve(const CommonOpts& common) {
  if (common.config_path.empty()) throw ConfigError("evolve: --config is required");
  RunConfig cfg = load_or_default(common);

  const SpinorField f0 = build_initial(cfg);
  const PotentialSpec A = load_potential(cfg);
  if (!A.within_selfadjoint_regime(cfg.physics))
    std::printf("event=warning msg=\"|q A_0| > m: outside the self-adjointness "
                "regime of the existence theory\"\n");
  if (cfg.scheme.violates_cfl(cfg.grid))
    std::printf("event=warning msg=\"dt exceeds c_cfl * min_spacing\" dt=%.6g "
                "bound=%.6g\n",
                cfg.scheme.effective_dt(cfg.grid),
                cfg.scheme.c_cfl * cfg.grid.min_spacing());

  fs::create_directories(cfg.output.directory);
  write_text(fs::path(cfg.output.directory) / "config.resolved", save_config(cfg));

  int snap_index = 0;
  std::vector<double> l2_series;
  const auto t0 = std::chrono::steady_clock::now();
  auto observer = [&](const StepEvent& ev) {
    std::printf("event=step step=%ld t=%.9g l2=%.12e h1=%.12e envelope_ratio=%.9f\n",
                ev.step, ev.t, ev.l2, ev.h1, ev.envelope_ratio);
    l2_series.push_back(ev.l2);
  };

  const auto traj = evolve(f0, A, cfg.physics, cfg.scheme, cfg.output.stride, observer);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  for (const auto& snap : traj) {
    const fs::path path =
        fs::path(cfg.output.directory) / snapshot_name(snap_index++, cfg.output.format);
    if (cfg.output.format == "csv")
      write_snapshot_csv(path.string(), snap);
    else
      write_snapshot(path.string(), snap);
  }

  const double drift =
      l2_series.empty() ? 0.0
                        : std::abs(l2_series.back() - l2_series.front()) /
                              std::max(l2_series.front(), 1e-300);
  std::ostringstream summary;
  summary.precision(12);
  summary << "snapshots = " << traj.size() << "\n";
  summary << "t_final = " << traj.back().t << "\n";
  summary << "l2_initial = " << l2_series.front() << "\n";
  summary << "l2_final = " << l2_series.back() << "\n";
  summary << "l2_rel_drift = " << drift << "\n";
  summary << "envelope = ok\n";
  summary << "wall_seconds = " << secs << "\n";
  write_text(fs::path(cfg.output.directory) / "summary.txt", summary.str());
  std::printf("event=done snapshots=%zu t=%.9g l2_rel_drift=%.3e wall=%.3fs out=%s\n",
              traj.size(), traj.back().t, drift, secs, cfg.output.directory.c_str());
  return 0;
}

// ---------------------------------------------------------------------------

std::vector<SpinorField> load_snapshot_dir(const std::string& dir) {
  std::vector<fs::path> files;
  if (fs::exists(dir))
    for (const auto& entry : fs::directory_iterator(dir)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("snap_", 0) == 0 && entry.path().extension() == ".bin")
        files.push_back(entry.path());
    }
  std::sort(files.begin(), files.end());
  std::vector<SpinorField> out;
  for (const auto& p : files) out.push_back(read_snapshot(p.string()));
  return out;
}

void append_rows(std::ostringstream& csv, const std::vector<ResidualStats>& rows) {
  for (const auto& r : rows) {
    csv << r.law << ',' << r.sector << ",l2," << r.l2 << ',' << r.masked_fraction
        << '\n';
    csv << r.law << ',' << r.sector << ",linf," << r.linf << ',' << r.masked_fraction
        << '\n';
    csv << r.law << ',' << r.sector << ",rel," << r.rel << ',' << r.masked_fraction
        << '\n';
  }
}

struct HydroOpts {
  std::string snapshots;
  int window = -1;
  double threshold = 1e-8;
  std::string time_deriv = "window";
  int n_seeds = 4;
};

int cmd_hydro(const CommonOpts& common, const HydroOpts& hy) {
  if (common.config_path.empty()) throw ConfigError("hydro: --config is required");
  RunConfig cfg = load_or_default(common);
  const std::string snapdir =
      hy.snapshots.empty() ? cfg.output.directory : hy.snapshots;
  const std::string outdir = common.out_dir.empty() ? snapdir : common.out_dir;

  const auto traj = load_snapshot_dir(snapdir);
  if (traj.size() < 3)
    throw InsufficientSnapshots("hydro: found " + std::to_string(traj.size()) +
                                " snapshots in " + snapdir + ", need at least 3");
  const std::size_t mid =
      hy.window >= 0 ? static_cast<std::size_t>(hy.window) : traj.size() / 2;
  const auto w = SnapshotWindow::centered(traj, mid);
  Differentiator diff(w.mid->grid, cfg.scheme.derivative);
  const PotentialSpec A = load_potential(cfg);
  const TimeDeriv td =
      hy.time_deriv == "equation" ? TimeDeriv::equation : TimeDeriv::window;

  std::vector<ResidualStats> rows;
  for (const auto& r : conservation_residuals(w, diff, A, cfg.physics, td))
    rows.push_back(r);
  for (const Sector sector : {Sector::right, Sector::left}) {
    for (const auto& r : em_divergence_residuals(w, diff, A, cfg.physics, sector))
      rows.push_back(r);
    for (const auto& r : current_evolution_residuals(w, diff, A, cfg.physics, sector))
      rows.push_back(r);
    for (const auto& r : hydro_residuals(w, diff, A, cfg.physics, sector))
      rows.push_back(r);
    const auto d = field_derivs(*w.mid, diff, A, cfg.physics);
    const SectorState st = sector_state(*w.mid, d, A, cfg.physics, sector);
    rows.push_back(t_expression_residual(st, diff));
    rows.push_back(quantization_residual_stats(st, diff));
    rows.push_back(tetrode_trace_residual(st));
    rows.push_back(momentum_contraction_residual(st));
    rows.push_back(epsilon_convention_residual(st, diff));
  }
  rows.push_back(orthogonality_residual(*w.mid));

  fs::create_directories(outdir);
  std::ostringstream csv;
  csv.precision(12);
  csv << "law,sector,norm_type,value,masked_fraction\n";
  append_rows(csv, rows);
  write_text(fs::path(outdir) / "residuals.csv", csv.str());

  // flowlines for both sectors over the loaded snapshot sequence
  for (const Sector sector : {Sector::right, Sector::left}) {
    const Grid& grid = w.mid->grid;
    std::vector<std::array<double, 3>> seeds;
    for (int i = 0; i < hy.n_seeds; ++i) {
      const double frac = (i + 0.5) / hy.n_seeds;
      seeds.push_back({frac * grid.extent[0], 0.5 * grid.extent[1],
                       0.5 * grid.extent[2]});
    }
    const double span = traj.back().t - traj.front().t;
    const double ds = std::min(0.5 * grid.min_spacing(), std::max(span, 1e-12) / 32.0);
    try {
      const auto lines =
          flowlines_over_trajectory(traj, sector, diff, A, cfg.physics, seeds, ds);
      auto dump = [&](const std::vector<Polyline>& ls, const std::string& name) {
        std::ostringstream fcsv;
        fcsv.precision(12);
        fcsv << "line_id,s,x,y,z\n";
        for (const auto& l : ls)
          for (const auto& pt : l.points)
            fcsv << l.id << ',' << pt[0] << ',' << pt[1] << ',' << pt[2] << ','
                 << pt[3] << '\n';
        write_text(fs::path(outdir) / name, fcsv.str());
      };
      dump(lines.chiral, std::string("flowlines_chiral_") + sector_name(sector) + ".csv");
      dump(lines.pilot, std::string("flowlines_pilot_") + sector_name(sector) + ".csv");
    } catch (const LeftDomain& e) {
      std::printf("event=warning msg=\"flowlines skipped (%s): %s\"\n",
                  sector_name(sector), e.what());
    }
  }

  double worst_rel = 0.0;
  for (const auto& r : rows) worst_rel = std::max(worst_rel, r.rel);
  std::printf("event=hydro window=%zu laws=%zu worst_rel=%.3e out=%s\n", mid,
              rows.size(), worst_rel, outdir.c_str());
  if (common.strict && worst_rel > hy.threshold) {
    std::printf("event=threshold-breach worst_rel=%.3e threshold=%.3e\n", worst_rel,
                hy.threshold);
    return kExitDiagnostic;
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct ConvergenceOpts {
  std::vector<int> levels{16, 32, 64};
  double t_end = 0.4;
  double dt0 = 0.1;
  double floor = 1e-10;
  double nominal = 2.0;
};

int cmd_convergence(const CommonOpts& common, const ConvergenceOpts& co) {
  RunConfig cfg = load_or_default(common);
  PhysicsParams params = cfg.physics;
  params.lambda = 0.0;  // the derived laws hold for the exact nonlinearity

  // temporal study on the closed-form plane wave
  Grid g32;
  g32.n = {32, 32, 32};
  const auto spec = PlaneWaveSpec::from_velocity(1.0, {1.0 / params.m, 0.0, 0.0}, 0.3);
  const auto temporal = temporal_order_study(g32, spec, params, 1.0, co.dt0);

  // simultaneous refinement on an evolved bump over a background
  GaussianBumpSpec bump = cfg.initial.kind == InitialSpec::Kind::gaussian
                              ? cfg.initial.bump
                              : GaussianBumpSpec{};
  if (cfg.initial.kind != InitialSpec::Kind::gaussian) {
    bump.background = Paravector::scalar(1.0);
    bump.amplitude = 0.15;
    bump.width = 1.1;
    bump.carrier = {1, 0, 0};
  }
  const auto series = refinement_study(co.levels, bump, params, PotentialSpec{},
                                       co.t_end, cfg.scheme.c_cfl);

  std::ostringstream csv;
  csv.precision(12);
  csv << "study,law,sector,level,value,order\n";
  for (std::size_t i = 0; i < temporal.dts.size(); ++i)
    csv << "temporal,max-error-vs-closed-form,both," << temporal.dts[i] << ','
        << temporal.errors[i] << ','
        << (i > 0 ? std::to_string(temporal.orders[i - 1]) : "") << '\n';
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.l2.size(); ++i)
      csv << "refinement," << s.law << ',' << s.sector << ',' << co.levels[i] << ','
          << s.l2[i] << ',' << (i > 0 ? std::to_string(s.orders[i - 1]) : "") << '\n';
  const std::string outdir = common.out_dir.empty() ? "out" : common.out_dir;
  fs::create_directories(outdir);
  write_text(fs::path(outdir) / "convergence.csv", csv.str());

  bool ok = true;
  for (double o : temporal.orders) ok = ok && std::abs(o - co.nominal) <= 0.3;
  std::printf("temporal orders:");
  for (double o : temporal.orders) std::printf(" %.3f", o);
  std::printf(" (nominal %.1f)\n", co.nominal);
  for (const auto& s : series) {
    const bool floored = s.at_floor(co.floor);
    const bool pass = floored || s.min_order() >= co.nominal - 0.3;
    ok = ok && pass;
    std::printf("%-32s %-6s l2:", s.law.c_str(), s.sector.c_str());
    for (double v : s.l2) std::printf(" %.3e", v);
    std::printf("  min_order=%s%s\n",
                floored ? "(floor)" : std::to_string(s.min_order()).c_str(),
                pass ? "" : "  BELOW NOMINAL");
  }
  std::printf("event=convergence status=%s out=%s\n", ok ? "pass" : "fail",
              outdir.c_str());
  if (!ok && common.strict) return kExitDiagnostic;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cl(3) nonlinear Dirac evolution and hydrodynamic diagnostics"};
  app.require_subcommand(1);

  CommonOpts alg_common, pw_common, ev_common, hy_common, cv_common;

  auto* alg = app.add_subcommand("algebra-test", "run the algebra invariant suite");
  alg->group("");  // hidden
  std::size_t alg_cases = 10000;
  std::uint64_t alg_seed = 20240915;
  alg->add_option("--cases", alg_cases, "random cases per law");
  alg->add_option("--seed", alg_seed, "RNG seed");

  auto* pw = app.add_subcommand("planewave", "reconstruct and verify a plane wave");
  PlaneWaveOpts pw_opts;
  add_common(pw, pw_common);
  pw->add_option("--density", pw_opts.density, "nonlinearity N");
  pw->add_option("--velocity", pw_opts.velocity, "spatial velocity V^k")->expected(3);
  pw->add_option("--current", pw_opts.current, "Dirac current J^mu")->expected(4);
  pw->add_option("--phase0", pw_opts.phase0, "phase offset");
  pw->add_option("--check-points", pw_opts.check_points, "residual sample count");

  auto* ev = app.add_subcommand("evolve", "run the time evolution");
  add_common(ev, ev_common);

  auto* hy = app.add_subcommand("hydro", "hydrodynamic diagnostics on snapshots");
  HydroOpts hy_opts;
  add_common(hy, hy_common);
  hy->add_option("--snapshots", hy_opts.snapshots, "snapshot directory");
  hy->add_option("--window", hy_opts.window, "center snapshot index");
  hy->add_option("--threshold", hy_opts.threshold, "strict-mode rel threshold");
  hy->add_option("--time-deriv", hy_opts.time_deriv, "window|equation")
      ->check(CLI::IsMember({"window", "equation"}));
  hy->add_option("--seeds", hy_opts.n_seeds, "flowline seed count");

  auto* cv = app.add_subcommand("convergence", "refinement study of the derived laws");
  ConvergenceOpts cv_opts;
  add_common(cv, cv_common);
  cv->add_option("--levels", cv_opts.levels, "grid resolutions")->expected(-1);
  cv->add_option("--t-end", cv_opts.t_end, "study end time");
  cv->add_option("--dt0", cv_opts.dt0, "coarsest dt of the temporal study");

  CLI11_PARSE(app, argc, argv);

  try {
    if (alg->parsed()) return cmd_algebra_test(alg_cases, alg_seed);
    if (pw->parsed()) return cmd_planewave(pw_common, pw_opts);
    if (ev->parsed()) return cmd_evolve(ev_common);
    if (hy->parsed()) return cmd_hydro(hy_common, hy_opts);
    if (cv->parsed()) return cmd_convergence(cv_common, cv_opts);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const InconsistentPair& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const InsufficientSnapshots& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const DegenerateJ& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::runtime_error& e) {
    // BlowUp, GrowthViolation, NodalPoint, NullElement, DegenerateFactor, LeftDomain
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  }
  return 0;
}
