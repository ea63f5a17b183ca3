#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cl3/derivative.hpp"
#include "cl3/errors.hpp"
#include "cl3/evolution.hpp"
#include "cl3/field.hpp"
#include "cl3/physics.hpp"

// Currents, the Tetrode energy-momentum tensor, hydrodynamic fields and the
// residuals of the derived laws, computed from spinor-field snapshots.
//
// Sector bookkeeping (one definition site):
//   right sector: T sandwiched with P,    current j_R = phi Pbar phi^dagger, s = +1
//   left  sector: T sandwiched with Pbar, current j_L = phi P phi^dagger,    s = -1
// The sector tensor is T_nu^mu = (derivative part) + s Gamma_nu j^mu; then
//   d_mu T_nu^mu = s G_{mu nu} j^mu,   trace T_mu^mu = 0 on solutions,
//   d_0 p_n + div(p_n v) = -1/2 div(rho v x d_n v) - s rho G_{n kappa} v^kappa,
//   eps^{imn} ( d_m (u_n - s Gamma_n) + 1/4 v.(d_m v x d_n v) ) = 0.
// Spatial derivatives of quotient fields (v = j/rho, u = p/rho, V = J/N) are
// expanded by the quotient rule over derivatives of the smooth polynomial
// numerators, so the spectral engine never differentiates a rough quotient.

namespace cl3 {

enum class Sector { right, left };

inline int sector_sign(Sector s) { return s == Sector::right ? +1 : -1; }
inline const char* sector_name(Sector s) { return s == Sector::right ? "right" : "left"; }
inline Paravector sandwich_projector(Sector s) {
  return s == Sector::right ? projector_P() : projector_Pbar();
}
inline Paravector current_projector(Sector s) {
  return s == Sector::right ? projector_Pbar() : projector_P();
}

using RField = std::vector<double>;

// ---------------------------------------------------------------------------
// currents

struct CurrentSet {
  std::array<std::vector<Paravector>, 4> D;  // D_kappa = phi e_kappa phi^dagger
  std::vector<Paravector> j_left, j_right;   // phi P phi^+, phi Pbar phi^+
};

inline CurrentSet currents(const SpinorField& f) {
  CurrentSet out;
  const std::size_t N = f.data.size();
  for (auto& d : out.D) d.resize(N);
  out.j_left.resize(N);
  out.j_right.resize(N);
  for (std::size_t p = 0; p < N; ++p) {
    const Paravector dag = dagger(f.data[p]);
    for (int k = 0; k < 4; ++k)
      out.D[k][p] = re(mul(mul(f.data[p], Paravector::basis(k)), dag));
    out.j_left[p] = 0.5 * (out.D[0][p] + out.D[3][p]);
    out.j_right[p] = 0.5 * (out.D[0][p] - out.D[3][p]);
  }
  return out;
}

// |j_mu j^mu| / (j^0)^2 per point for one sector; lightlike for any phi.
inline RField chiral_lightlike_check(const SpinorField& f, Sector sector,
                                     double eps_rel = 1e-12) {
  const Paravector proj = current_projector(sector);
  RField out(f.data.size(), 0.0);
  double mean = 0.0;
  std::vector<double> rho(f.data.size());
  for (std::size_t p = 0; p < f.data.size(); ++p) {
    const Paravector j = re(mul(mul(f.data[p], proj), dagger(f.data[p])));
    rho[p] = j.c[0].real();
    mean += rho[p];
    out[p] = std::abs(scalar_product(j, j));
  }
  mean /= std::max<std::size_t>(1, f.data.size());
  for (std::size_t p = 0; p < f.data.size(); ++p) {
    const double r = rho[p];
    out[p] = r > eps_rel * mean ? out[p] / (r * r) : 0.0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// per-snapshot derivative bundle and sector state

struct FieldDerivs {
  std::vector<Paravector> d0;                 // equation-consistent d_0 phi
  std::array<std::vector<Paravector>, 3> dk;  // spatial d_k phi
};

// d_0 phi from the exact first-order equation (the laws of this module are
// statements about it, whatever lambda produced the snapshot). At nodal
// points the exact phase multiplier is undefined; those points get a zero
// multiplier and are masked downstream.
inline std::vector<Paravector> guarded_time_derivative(const SpinorField& f,
                                                       Differentiator& diff,
                                                       const PotentialSpec& A,
                                                       const PhysicsParams& params,
                                                       double eps_rel = 1e-12) {
  const cplx i(0.0, 1.0);
  const std::size_t NP = f.data.size();
  std::vector<Paravector> s(NP), out;
  for (std::size_t p = 0; p < NP; ++p) s[p] = hat(f.data[p]);
  out.assign(NP, Paravector{});
  for (int axis = 0; axis < 3; ++axis) {
    const auto d = diff.derivative(s, axis);
    const Paravector el = -1.0 * Paravector::basis(axis + 1);
    for (std::size_t p = 0; p < NP; ++p) out[p] -= mul(el, d[p]);
  }
  for (std::size_t p = 0; p < NP; ++p) {
    if (params.q != 0.0 && !A.is_zero())
      out[p] -= i * params.q * mul(mul(A.at(p), s[p]), e3());
    const Paravector& phi = f.data[p];
    const cplx d = det(phi);
    const double n = std::abs(d);
    const cplx c = n > nodal_threshold(phi, eps_rel) ? std::conj(d) / n : cplx(0.0);
    out[p] -= (i * params.m * c) * mul(hat(s[p]), e3());
  }
  for (auto& p : out) p = hat(p);
  return out;
}

inline FieldDerivs field_derivs(const SpinorField& f, Differentiator& diff,
                                const PotentialSpec& A, const PhysicsParams& params) {
  FieldDerivs d;
  d.d0 = guarded_time_derivative(f, diff, A, params);
  for (int axis = 0; axis < 3; ++axis) d.dk[axis] = diff.derivative(f.data, axis);
  return d;
}

struct SectorState {
  Sector sector = Sector::right;
  Grid grid;
  double t = 0.0;
  RField rho;                             // j^0
  std::array<RField, 3> j;                // j^k (upper)
  std::array<std::array<RField, 4>, 4> T; // T[nu][mu], nu lower, mu upper
  std::array<std::array<RField, 4>, 4> Tderiv;  // T - s Gamma_nu j^mu
  std::array<RField, 4> Gamma;            // Gamma^mu (upper components)
  RField N;                               // |det phi|
  std::vector<std::uint8_t> mask;         // 1 = rho and N above thresholds
  double masked_fraction = 0.0;

  double gamma_lower(int nu, std::size_t p) const {
    return nu == 0 ? Gamma[0][p] : -Gamma[nu][p];
  }
  double p_lower(int n, std::size_t p) const { return T[n][0][p]; }  // p_n = T_n^0
};

// Assembles currents, Gamma and the Tetrode tensor for one sector at one
// snapshot. eps_hydro masks rho <= eps_rel * mean(rho); nodal points of N are
// masked as well (V undefined there).
inline SectorState sector_state(const SpinorField& f, const FieldDerivs& d,
                                const PotentialSpec& A, const PhysicsParams& params,
                                Sector sector, double eps_rel = 1e-10) {
  const std::size_t NP = f.data.size();
  SectorState st;
  st.sector = sector;
  st.grid = f.grid;
  st.t = f.t;
  st.rho.resize(NP);
  for (auto& v : st.j) v.resize(NP);
  for (auto& row : st.T)
    for (auto& c : row) c.resize(NP);
  for (auto& row : st.Tderiv)
    for (auto& c : row) c.resize(NP);
  for (auto& v : st.Gamma) v.resize(NP);
  st.N.resize(NP);
  st.mask.assign(NP, 1);

  const Paravector Ps = sandwich_projector(sector);
  const Paravector Pj = current_projector(sector);
  const int s = sector_sign(sector);
  const cplx mihalf(0.0, -0.5);

  double mean_rho = 0.0, mean_N = 0.0;
  for (std::size_t p = 0; p < NP; ++p) {
    const Paravector& phi = f.data[p];
    const Paravector j = re(mul(mul(phi, Pj), dagger(phi)));
    st.rho[p] = j.c[0].real();
    for (int k = 0; k < 3; ++k) st.j[k][p] = j.c[k + 1].real();
    st.N[p] = nonlinearity(phi);
    mean_rho += st.rho[p];
    mean_N += st.N[p];

    // Gamma^mu = q A^mu + m J^mu / N (guarded; masked below if N tiny)
    const Paravector J = dirac_current(phi);
    const double n_safe = std::max(st.N[p], 1e-300);
    for (int mu = 0; mu < 4; ++mu)
      st.Gamma[mu][p] = params.q * A.at(p).c[mu].real() +
                        params.m * J.c[mu].real() / n_safe;

    // derivative part of T_nu^mu
    const Paravector barphi = bar(phi);
    const Paravector hatphi = hat(phi);
    const Paravector hatphi_Ps = mul(hatphi, Ps);
    for (int nu = 0; nu < 4; ++nu) {
      const Paravector& dnu = nu == 0 ? d.d0[p] : d.dk[nu - 1][p];
      const Paravector t1 = mul(mul(hat(dnu), Ps), barphi);
      const Paravector t2 = mul(hatphi_Ps, bar(dnu));
      const Paravector diff_term = t1 - t2;
      for (int mu = 0; mu < 4; ++mu) {
        const Paravector emu_up = (mu == 0 ? 1.0 : -1.0) * Paravector::basis(mu);
        const double deriv = (mihalf * scalar_part(mul(emu_up, diff_term))).real();
        st.Tderiv[nu][mu][p] = deriv;
        const double jmu = mu == 0 ? st.rho[p] : st.j[mu - 1][p];
        const double gl = nu == 0 ? st.Gamma[0][p] : -st.Gamma[nu][p];
        st.T[nu][mu][p] = deriv + s * gl * jmu;
      }
    }
  }
  mean_rho /= NP;
  mean_N /= NP;
  std::size_t masked = 0;
  for (std::size_t p = 0; p < NP; ++p) {
    if (st.rho[p] <= eps_rel * mean_rho || st.N[p] <= eps_rel * mean_N) {
      st.mask[p] = 0;
      ++masked;
    }
  }
  st.masked_fraction = static_cast<double>(masked) / NP;
  return st;
}

// Materialized hydrodynamic fields of one sector: density, unit 3-velocity,
// momentum covector p_n = T_n^0 and u = p/rho, defined where unmasked.
struct HydroFields {
  RField rho;
  std::array<RField, 3> v;        // j^k / rho (upper components), |v| = 1
  std::array<RField, 3> p_lower;  // p_n
  std::array<RField, 3> u_lower;  // p_n / rho
  std::vector<std::uint8_t> mask;
  double masked_fraction = 0.0;
};

inline HydroFields hydro_fields(const SectorState& st) {
  HydroFields out;
  const std::size_t NP = st.rho.size();
  out.rho = st.rho;
  out.mask = st.mask;
  out.masked_fraction = st.masked_fraction;
  for (int k = 0; k < 3; ++k) {
    out.v[k].assign(NP, 0.0);
    out.p_lower[k] = st.T[k + 1][0];
    out.u_lower[k].assign(NP, 0.0);
  }
  for (std::size_t p = 0; p < NP; ++p) {
    if (!st.mask[p]) continue;
    for (int k = 0; k < 3; ++k) {
      out.v[k][p] = st.j[k][p] / st.rho[p];
      out.u_lower[k][p] = out.p_lower[k][p] / st.rho[p];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// pointwise structural checks

struct ResidualStats {
  std::string law;
  std::string sector;
  double l2 = 0.0;    // spacing-weighted L2 norm of the residual over unmasked points
  double linf = 0.0;
  double rel = 0.0;   // l2 / scale of the largest constituent term
  double masked_fraction = 0.0;
};

namespace detail {

class StatsAccum {
 public:
  StatsAccum(std::string law, std::string sector, double dv)
      : law_(std::move(law)), sector_(std::move(sector)), dv_(dv) {}
  void add(double residual, double scale) {
    r2_ += residual * residual;
    s2_ += scale * scale;
    linf_ = std::max(linf_, std::abs(residual));
    ++count_;
  }
  void skip() { ++skipped_; ++count_; }
  ResidualStats finish() const {
    ResidualStats out;
    out.law = law_;
    out.sector = sector_;
    out.l2 = std::sqrt(r2_ * dv_);
    const double s = std::sqrt(s2_ * dv_);
    out.rel = s > 0.0 ? out.l2 / s : out.l2;
    out.linf = linf_;
    out.masked_fraction = count_ ? static_cast<double>(skipped_) / count_ : 0.0;
    return out;
  }

 private:
  std::string law_, sector_;
  double dv_;
  double r2_ = 0.0, s2_ = 0.0, linf_ = 0.0;
  std::size_t count_ = 0, skipped_ = 0;
};

inline double cell_volume(const Grid& g) {
  return g.spacing(0) * g.spacing(1) * g.spacing(2);
}

}  // namespace detail

// <D_mu, D_nu> = N^2 eta_mu_nu, pointwise, relative to N^2.
inline ResidualStats orthogonality_residual(const SpinorField& f) {
  detail::StatsAccum acc("orthogonality", "both", detail::cell_volume(f.grid));
  const CurrentSet cs = currents(f);
  for (std::size_t p = 0; p < f.data.size(); ++p) {
    const double n2 = nonlinearity(f.data[p]);
    double worst = 0.0;
    for (int mu = 0; mu < 4; ++mu)
      for (int nu = mu; nu < 4; ++nu) {
        const double eta = mu != nu ? 0.0 : (mu == 0 ? 1.0 : -1.0);
        worst = std::max(worst,
                         std::abs(scalar_product(cs.D[mu][p], cs.D[nu][p]).real() -
                                  n2 * n2 * eta));
      }
    acc.add(worst, std::max(n2 * n2, 1e-300));
  }
  return acc.finish();
}

// trace T_mu^mu; zero when the supplied time derivative solves the equation
// (the equation-consistent d_0 makes this hold for any snapshot).
inline ResidualStats tetrode_trace_residual(const SectorState& st) {
  detail::StatsAccum acc("tetrode-trace", sector_name(st.sector),
                         detail::cell_volume(st.grid));
  for (std::size_t p = 0; p < st.rho.size(); ++p) {
    if (!st.mask[p]) {
      acc.skip();
      continue;
    }
    double tr = 0.0, scale = std::abs(st.Gamma[0][p]) * st.rho[p];
    for (int mu = 0; mu < 4; ++mu) {
      tr += st.T[mu][mu][p];
      scale = std::max(scale, std::abs(st.T[mu][mu][p]));
    }
    acc.add(tr, std::max(scale, 1e-300));
  }
  return acc.finish();
}

// -p_n = v_k T_n^k, i.e. p_n = sum_k v^k T_n^k; kinematic.
inline ResidualStats momentum_contraction_residual(const SectorState& st) {
  detail::StatsAccum acc("momentum-contraction", sector_name(st.sector),
                         detail::cell_volume(st.grid));
  for (std::size_t p = 0; p < st.rho.size(); ++p) {
    if (!st.mask[p]) {
      acc.skip();
      continue;
    }
    for (int n = 1; n <= 3; ++n) {
      double sum = 0.0;
      double scale = std::abs(st.Gamma[0][p]) * st.rho[p];  // energy-density scale
      for (int k = 1; k <= 3; ++k) {
        sum += st.j[k - 1][p] / st.rho[p] * st.T[n][k][p];
        scale = std::max(scale, std::abs(st.T[n][k][p]));
      }
      scale = std::max({scale, std::abs(st.p_lower(n, p)), 1e-300});
      acc.add(st.p_lower(n, p) - sum, scale);
    }
  }
  return acc.finish();
}

// Index-convention guard: 2 eps^{kl}_n T_l^n computed directly must equal
// -2 (p x v)^k - rho ((v.grad) v^k - v^k (div v)), with p^l = -T_l^0 and the
// standard cross product. Needs spatial derivatives of v (quotient rule).
inline ResidualStats epsilon_convention_residual(const SectorState& st,
                                                 Differentiator& diff) {
  detail::StatsAccum acc("epsilon-convention", sector_name(st.sector),
                         detail::cell_volume(st.grid));
  const std::size_t NP = st.rho.size();
  const RField& rho = st.rho;
  std::array<RField, 3> drho;
  std::array<std::array<RField, 3>, 3> dj;  // dj[a][k] = d_a j^k
  for (int a = 0; a < 3; ++a) {
    drho[a] = diff.derivative_real(rho, a);
    for (int k = 0; k < 3; ++k) dj[a][k] = diff.derivative_real(st.j[k], a);
  }
  for (std::size_t p = 0; p < NP; ++p) {
    if (!st.mask[p]) {
      acc.skip();
      continue;
    }
    const double r = rho[p];
    std::array<double, 3> v, pvec;
    for (int k = 0; k < 3; ++k) {
      v[k] = st.j[k][p] / r;
      pvec[k] = -st.T[k + 1][0][p];  // p^k = -p_k
    }
    // d_a v^k by the quotient rule
    double dv[3][3];
    for (int a = 0; a < 3; ++a)
      for (int k = 0; k < 3; ++k)
        dv[a][k] = (dj[a][k][p] * r - st.j[k][p] * drho[a][p]) / (r * r);
    for (int k = 0; k < 3; ++k) {
      double lhs = 0.0;
      for (int l = 1; l <= 3; ++l)
        for (int n = 1; n <= 3; ++n)
          lhs += 2.0 * levi_civita(k, l - 1, n - 1) * st.T[l][n][p];
      double pxv = 0.0, vgradvk = 0.0, divv = 0.0;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) pxv += levi_civita(k, a, b) * pvec[a] * v[b];
      for (int a = 0; a < 3; ++a) {
        vgradvk += v[a] * dv[a][k];
        divv += dv[a][a];
      }
      const double rhs = -2.0 * pxv - r * (vgradvk - v[k] * divv);
      const double scale =
          std::max({std::abs(lhs), std::abs(rhs), std::abs(st.Gamma[0][p]) * r, 1e-300});
      acc.add(lhs - rhs, scale);
    }
  }
  return acc.finish();
}

// T_n^l = p_n v^l + 1/2 rho (v x d_n v)^l  (E-form of the printed expression
// after reducing the raised-index epsilon to the standard symbol); kinematic.
inline ResidualStats t_expression_residual(const SectorState& st, Differentiator& diff) {
  detail::StatsAccum acc("t-expression", sector_name(st.sector),
                         detail::cell_volume(st.grid));
  std::array<RField, 3> drho;
  std::array<std::array<RField, 3>, 3> dj;
  for (int a = 0; a < 3; ++a) {
    drho[a] = diff.derivative_real(st.rho, a);
    for (int k = 0; k < 3; ++k) dj[a][k] = diff.derivative_real(st.j[k], a);
  }
  for (std::size_t p = 0; p < st.rho.size(); ++p) {
    if (!st.mask[p]) {
      acc.skip();
      continue;
    }
    const double r = st.rho[p];
    std::array<double, 3> v;
    for (int k = 0; k < 3; ++k) v[k] = st.j[k][p] / r;
    double dv[3][3];
    for (int a = 0; a < 3; ++a)
      for (int k = 0; k < 3; ++k)
        dv[a][k] = (dj[a][k][p] * r - st.j[k][p] * drho[a][p]) / (r * r);
    for (int n = 1; n <= 3; ++n)
      for (int l = 1; l <= 3; ++l) {
        double cross = 0.0;  // (v x d_n v)^l
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b)
            cross += levi_civita(l - 1, a, b) * v[a] * dv[n - 1][b];
        const double rhs = st.p_lower(n, p) * v[l - 1] + 0.5 * r * cross;
        const double scale = std::max({std::abs(st.T[n][l][p]), std::abs(rhs),
                                       std::abs(st.Gamma[0][p]) * r, 1e-300});
        acc.add(st.T[n][l][p] - rhs, scale);
      }
  }
  return acc.finish();
}

// eps^{imn} ( d_m w_n + 1/4 v.(d_m v x d_n v) ) with w_n = u_n - s Gamma_n.
// Low-level form on hydro fields; w and v are supplied directly so synthetic
// (non-spinor) states can be checked as a negative control.
inline std::array<RField, 3> quantization_residual_fields(
    const Grid&, Differentiator& diff, const RField& rho,
    const std::array<RField, 3>& jvec, const std::array<RField, 3>& w_numerator,
    const std::vector<std::uint8_t>& mask) {
  // w_n = w_numerator_n / rho ; d_m w_n by the quotient rule
  const std::size_t NP = rho.size();
  std::array<RField, 3> out;
  for (auto& o : out) o.assign(NP, 0.0);
  std::array<RField, 3> drho;
  std::array<std::array<RField, 3>, 3> dj, dwnum;
  for (int a = 0; a < 3; ++a) {
    drho[a] = diff.derivative_real(rho, a);
    for (int k = 0; k < 3; ++k) {
      dj[a][k] = diff.derivative_real(jvec[k], a);
      dwnum[a][k] = diff.derivative_real(w_numerator[k], a);
    }
  }
  for (std::size_t p = 0; p < NP; ++p) {
    if (!mask[p]) continue;
    const double r = rho[p];
    double dv[3][3], dw[3][3];
    std::array<double, 3> v;
    for (int k = 0; k < 3; ++k) v[k] = jvec[k][p] / r;
    for (int a = 0; a < 3; ++a)
      for (int k = 0; k < 3; ++k) {
        dv[a][k] = (dj[a][k][p] * r - jvec[k][p] * drho[a][p]) / (r * r);
        dw[a][k] = (dwnum[a][k][p] * r - w_numerator[k][p] * drho[a][p]) / (r * r);
      }
    for (int i = 0; i < 3; ++i) {
      double q = 0.0;
      for (int m = 0; m < 3; ++m)
        for (int n = 0; n < 3; ++n) {
          const int eps = levi_civita(i, m, n);
          if (eps == 0) continue;
          double triple = 0.0;  // v . (d_m v x d_n v)
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
              for (int c = 0; c < 3; ++c)
                triple += levi_civita(a, b, c) * v[a] * dv[m][b] * dv[n][c];
          q += eps * (dw[m][n] + 0.25 * triple);
        }
      out[i][p] = q;
    }
  }
  return out;
}

// Spinor-field wrapper: w_n = u_n - s Gamma_n = Tderiv_n^0 / rho, so the
// numerator is the Gamma-free derivative part of the momentum.
inline std::array<RField, 3> quantization_residual(const SectorState& st,
                                                   Differentiator& diff) {
  std::array<RField, 3> wnum;
  for (int n = 0; n < 3; ++n) wnum[n] = st.Tderiv[n + 1][0];
  return quantization_residual_fields(st.grid, diff, st.rho, st.j, wnum, st.mask);
}

inline ResidualStats quantization_residual_stats(const SectorState& st,
                                                 Differentiator& diff) {
  const auto q = quantization_residual(st, diff);
  detail::StatsAccum acc("quantization", sector_name(st.sector),
                         detail::cell_volume(st.grid));
  for (std::size_t p = 0; p < st.rho.size(); ++p) {
    if (!st.mask[p]) {
      acc.skip();
      continue;
    }
    for (int i = 0; i < 3; ++i)
      acc.add(q[i][p], std::max(std::abs(st.Tderiv[i + 1][0][p] / st.rho[p]), 1.0));
  }
  return acc.finish();
}

// ---------------------------------------------------------------------------
// snapshot-window laws (2nd-order central time differencing)

enum class TimeDeriv { window, equation };

struct SnapshotWindow {
  const SpinorField* prev = nullptr;
  const SpinorField* mid = nullptr;
  const SpinorField* next = nullptr;
  double dt = 0.0;  // spacing between consecutive snapshots

  static SnapshotWindow centered(const std::vector<SpinorField>& traj, std::size_t mid) {
    if (traj.size() < 3 || mid == 0 || mid + 1 >= traj.size())
      throw InsufficientSnapshots("need three consecutive snapshots");
    SnapshotWindow w;
    w.prev = &traj[mid - 1];
    w.mid = &traj[mid];
    w.next = &traj[mid + 1];
    w.dt = 0.5 * (traj[mid + 1].t - traj[mid - 1].t);
    if (!(w.dt > 0.0)) throw InsufficientSnapshots("snapshots not time-ordered");
    return w;
  }
};

// Conservation laws of the currents D_kappa:
//   d_mu D_0^mu = 0, d_mu D_3^mu = 0,
//   d_mu D_1^mu = +2 <Gamma, D_2>, d_mu D_2^mu = -2 <Gamma, D_1>.
inline std::vector<ResidualStats> conservation_residuals(
    const SnapshotWindow& w, Differentiator& diff, const PotentialSpec& A,
    const PhysicsParams& params, TimeDeriv td = TimeDeriv::window,
    double eps_rel = 1e-10) {
  const SpinorField& f = *w.mid;
  const std::size_t NP = f.data.size();
  const CurrentSet mid = currents(f);

  // time derivative of D_kappa^0
  std::array<RField, 4> dD0;
  for (auto& d : dD0) d.resize(NP);
  if (td == TimeDeriv::window) {
    const CurrentSet prev = currents(*w.prev), next = currents(*w.next);
    for (int kpp = 0; kpp < 4; ++kpp)
      for (std::size_t p = 0; p < NP; ++p)
        dD0[kpp][p] =
            (next.D[kpp][p].c[0].real() - prev.D[kpp][p].c[0].real()) / (2.0 * w.dt);
  } else {
    const auto dphi = guarded_time_derivative(f, diff, A, params);
    for (std::size_t p = 0; p < NP; ++p) {
      const Paravector dp = dphi[p];
      for (int kpp = 0; kpp < 4; ++kpp) {
        const Paravector ek = Paravector::basis(kpp);
        const Paravector d =
            re(mul(mul(dp, ek), dagger(f.data[p])) + mul(mul(f.data[p], ek), dagger(dp)));
        dD0[kpp][p] = d.c[0].real();
      }
    }
  }

  // spatial divergence of D_kappa^l
  std::array<RField, 4> divD;
  for (int kpp = 0; kpp < 4; ++kpp) {
    divD[kpp].assign(NP, 0.0);
    for (int l = 1; l <= 3; ++l) {
      RField comp(NP);
      for (std::size_t p = 0; p < NP; ++p) comp[p] = mid.D[kpp][p].c[l].real();
      const RField d = diff.derivative_real(comp, l - 1);
      for (std::size_t p = 0; p < NP; ++p) divD[kpp][p] += d[p];
    }
  }

  // Gamma and the nonlinearity mask
  RField Nfield(NP);
  double meanN = 0.0;
  std::vector<Paravector> Gamma(NP);
  for (std::size_t p = 0; p < NP; ++p) {
    Nfield[p] = nonlinearity(f.data[p]);
    meanN += Nfield[p];
    const double n_safe = std::max(Nfield[p], 1e-300);
    Gamma[p] = re(params.q * A.at(p) + (params.m / n_safe) * dirac_current(f.data[p]));
  }
  meanN /= NP;

  const double dv = detail::cell_volume(f.grid);
  std::vector<ResidualStats> out;
  for (int kpp = 0; kpp < 4; ++kpp) {
    detail::StatsAccum acc("conservation-D" + std::to_string(kpp), "both", dv);
    for (std::size_t p = 0; p < NP; ++p) {
      double rhs = 0.0;
      bool masked = false;
      if (kpp == 1 || kpp == 2) {
        if (Nfield[p] <= eps_rel * meanN) masked = true;
        const int other = kpp == 1 ? 2 : 1;
        const double sign = kpp == 1 ? 2.0 : -2.0;
        rhs = sign * scalar_product(Gamma[p], mid.D[other][p]).real();
      }
      if (masked) {
        acc.skip();
        continue;
      }
      const double lhs = dD0[kpp][p] + divD[kpp][p];
      acc.add(lhs - rhs, std::max({std::abs(dD0[kpp][p]), std::abs(divD[kpp][p]),
                                   std::abs(rhs), 1e-300}));
    }
    out.push_back(acc.finish());
  }
  return out;
}

namespace detail {

// d_a Gamma_nu(lower) for a sector state, quotient rule through V = J/N.
// Returns dG[a][nu] with a = 0 the central time difference (needs the window)
// and a = 1..3 spatial.
struct GammaDerivs {
  std::array<std::array<RField, 4>, 4> d;  // d[a][nu], lower nu
};

inline GammaDerivs gamma_derivs(const SnapshotWindow& w, const SectorState& prev,
                                const SectorState& mid, const SectorState& next,
                                Differentiator& diff) {
  GammaDerivs out;
  const std::size_t NP = mid.rho.size();
  for (auto& row : out.d)
    for (auto& c : row) c.assign(NP, 0.0);
  for (int nu = 0; nu < 4; ++nu) {
    for (std::size_t p = 0; p < NP; ++p)
      out.d[0][nu][p] = (next.gamma_lower(nu, p) - prev.gamma_lower(nu, p)) / (2.0 * w.dt);
    RField g(NP);
    for (std::size_t p = 0; p < NP; ++p) g[p] = mid.gamma_lower(nu, p);
    for (int a = 1; a <= 3; ++a) out.d[a][nu] = diff.derivative_real(g, a - 1);
  }
  return out;
}

}  // namespace detail

// Lemma balance d_mu T_nu^mu = s G_{mu nu} j^mu per sector.
inline std::vector<ResidualStats> em_divergence_residuals(
    const SnapshotWindow& w, Differentiator& diff, const PotentialSpec& A,
    const PhysicsParams& params, Sector sector, double eps_rel = 1e-10) {
  const auto dp = field_derivs(*w.prev, diff, A, params);
  const auto dm = field_derivs(*w.mid, diff, A, params);
  const auto dn = field_derivs(*w.next, diff, A, params);
  const SectorState sp = sector_state(*w.prev, dp, A, params, sector, eps_rel);
  const SectorState sm = sector_state(*w.mid, dm, A, params, sector, eps_rel);
  const SectorState sn = sector_state(*w.next, dn, A, params, sector, eps_rel);
  const std::size_t NP = sm.rho.size();
  const int s = sector_sign(sector);

  const auto dGamma = detail::gamma_derivs(w, sp, sm, sn, diff);

  // spatial divergence sum_l d_l T_nu^l = d_l Tderiv_nu^l + s d_l(Gamma_nu j^l)
  std::array<RField, 4> divT;
  for (int nu = 0; nu < 4; ++nu) {
    divT[nu].assign(NP, 0.0);
    for (int l = 1; l <= 3; ++l) {
      const RField d = diff.derivative_real(sm.Tderiv[nu][l], l - 1);
      RField jl = sm.j[l - 1];
      const RField djl = diff.derivative_real(jl, l - 1);
      for (std::size_t p = 0; p < NP; ++p) {
        divT[nu][p] += d[p];
        divT[nu][p] += s * (dGamma.d[l][nu][p] * sm.j[l - 1][p] +
                            sm.gamma_lower(nu, p) * djl[p]);
      }
    }
  }

  const double dv = detail::cell_volume(sm.grid);
  std::vector<ResidualStats> out;
  for (int nu = 0; nu < 4; ++nu) {
    detail::StatsAccum acc("em-divergence-nu" + std::to_string(nu), sector_name(sector),
                           dv);
    for (std::size_t p = 0; p < NP; ++p) {
      if (!sm.mask[p] || !sp.mask[p] || !sn.mask[p]) {
        acc.skip();
        continue;
      }
      const double dT0 = (sn.T[nu][0][p] - sp.T[nu][0][p]) / (2.0 * w.dt);
      // s G_{mu nu} j^mu = s sum_mu (d_mu Gamma_nu - d_nu Gamma_mu) j^mu
      double rhs = 0.0;
      for (int mu = 0; mu < 4; ++mu) {
        const double jmu = mu == 0 ? sm.rho[p] : sm.j[mu - 1][p];
        rhs += (dGamma.d[mu][nu][p] - dGamma.d[nu][mu][p]) * jmu;
      }
      rhs *= s;
      const double lhs = dT0 + divT[nu][p];
      acc.add(lhs - rhs,
              std::max({std::abs(dT0), std::abs(divT[nu][p]), std::abs(rhs), 1e-300}));
    }
    out.push_back(acc.finish());
  }
  return out;
}

// d_0 j^k + d_k j^0 + 2 eps^{kl}_n T_l^n = 0 per sector (eps^{kl}_n = eps_kln).
inline std::vector<ResidualStats> current_evolution_residuals(
    const SnapshotWindow& w, Differentiator& diff, const PotentialSpec& A,
    const PhysicsParams& params, Sector sector, double eps_rel = 1e-10) {
  const auto dp = field_derivs(*w.prev, diff, A, params);
  const auto dm = field_derivs(*w.mid, diff, A, params);
  const auto dn = field_derivs(*w.next, diff, A, params);
  const SectorState sp = sector_state(*w.prev, dp, A, params, sector, eps_rel);
  const SectorState sm = sector_state(*w.mid, dm, A, params, sector, eps_rel);
  const SectorState sn = sector_state(*w.next, dn, A, params, sector, eps_rel);
  const std::size_t NP = sm.rho.size();

  const RField drho[3] = {diff.derivative_real(sm.rho, 0), diff.derivative_real(sm.rho, 1),
                          diff.derivative_real(sm.rho, 2)};
  const double dv = detail::cell_volume(sm.grid);
  std::vector<ResidualStats> out;
  for (int k = 1; k <= 3; ++k) {
    detail::StatsAccum acc("current-evolution-k" + std::to_string(k),
                           sector_name(sector), dv);
    for (std::size_t p = 0; p < NP; ++p) {
      if (!sm.mask[p] || !sp.mask[p] || !sn.mask[p]) {
        acc.skip();
        continue;
      }
      const double dj = (sn.j[k - 1][p] - sp.j[k - 1][p]) / (2.0 * w.dt);
      double epsT = 0.0;
      for (int l = 1; l <= 3; ++l)
        for (int n = 1; n <= 3; ++n)
          epsT += 2.0 * levi_civita(k - 1, l - 1, n - 1) * sm.T[l][n][p];
      const double r = dj + drho[k - 1][p] + epsT;
      acc.add(r, std::max({std::abs(dj), std::abs(drho[k - 1][p]), std::abs(epsT),
                           1e-300}));
    }
    out.push_back(acc.finish());
  }
  return out;
}

// The hydrodynamic system per sector:
//   (1) d_0 rho + div(rho v) = 0
//   (2) d_0(rho v) + div(rho v (x) v) = v x (v x grad rho) + 2 (p + rho curl v) x v
//   (3) d_0 p_n + div(p_n v) = -1/2 div(rho v x d_n v) - s rho G_{n kappa} v^kappa
// with p^k = -T_k^0 raised in (2) and p_n = T_n^0 in (3).
inline std::vector<ResidualStats> hydro_residuals(const SnapshotWindow& w,
                                                  Differentiator& diff,
                                                  const PotentialSpec& A,
                                                  const PhysicsParams& params,
                                                  Sector sector, double eps_rel = 1e-10) {
  const auto dp_ = field_derivs(*w.prev, diff, A, params);
  const auto dm_ = field_derivs(*w.mid, diff, A, params);
  const auto dn_ = field_derivs(*w.next, diff, A, params);
  const SectorState sp = sector_state(*w.prev, dp_, A, params, sector, eps_rel);
  const SectorState sm = sector_state(*w.mid, dm_, A, params, sector, eps_rel);
  const SectorState sn = sector_state(*w.next, dn_, A, params, sector, eps_rel);
  const std::size_t NP = sm.rho.size();
  const int s = sector_sign(sector);
  const double dv = detail::cell_volume(sm.grid);

  const auto dGamma = detail::gamma_derivs(w, sp, sm, sn, diff);

  // first derivatives of rho and j
  std::array<RField, 3> drho;
  std::array<std::array<RField, 3>, 3> dj;  // dj[a][k] = d_a j^k
  for (int a = 0; a < 3; ++a) {
    drho[a] = diff.derivative_real(sm.rho, a);
    for (int k = 0; k < 3; ++k) dj[a][k] = diff.derivative_real(sm.j[k], a);
  }

  std::vector<ResidualStats> out;

  // (1) continuity: d_0 j^0 + div j
  {
    detail::StatsAccum acc("hydro-continuity", sector_name(sector), dv);
    for (std::size_t p = 0; p < NP; ++p) {
      if (!sm.mask[p] || !sp.mask[p] || !sn.mask[p]) {
        acc.skip();
        continue;
      }
      const double d0 = (sn.rho[p] - sp.rho[p]) / (2.0 * w.dt);
      const double div = dj[0][0][p] + dj[1][1][p] + dj[2][2][p];
      acc.add(d0 + div, std::max({std::abs(d0), std::abs(div), 1e-300}));
    }
    out.push_back(acc.finish());
  }

  // (2) momentum direction: working with j = rho v throughout;
  // div(rho v (x) v)^k = sum_l d_l (j^k j^l / rho), quotient rule
  {
    // assemble numerators j^k j^l and their derivatives
    std::array<std::array<RField, 3>, 3> djj;  // d_l (j^k j^l) for fixed k: sum over l
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 3; ++l) {
        RField prod(NP);
        for (std::size_t p = 0; p < NP; ++p) prod[p] = sm.j[k][p] * sm.j[l][p];
        djj[k][l] = diff.derivative_real(prod, l);
      }
    detail::StatsAccum acc("hydro-momentum", sector_name(sector), dv);
    for (std::size_t p = 0; p < NP; ++p) {
      if (!sm.mask[p] || !sp.mask[p] || !sn.mask[p]) {
        acc.skip();
        continue;
      }
      const double r = sm.rho[p];
      std::array<double, 3> v, pvec, gradrho, curlv;
      for (int k = 0; k < 3; ++k) {
        v[k] = sm.j[k][p] / r;
        pvec[k] = -sm.T[k + 1][0][p];
        gradrho[k] = drho[k][p];
      }
      double dvm[3][3];
      for (int a = 0; a < 3; ++a)
        for (int k = 0; k < 3; ++k)
          dvm[a][k] = (dj[a][k][p] * r - sm.j[k][p] * drho[a][p]) / (r * r);
      for (int i = 0; i < 3; ++i) {
        curlv[i] = 0.0;
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) curlv[i] += levi_civita(i, a, b) * dvm[a][b];
      }
      for (int k = 0; k < 3; ++k) {
        const double d0 = (sn.j[k][p] - sp.j[k][p]) / (2.0 * w.dt);
        double conv = 0.0;
        for (int l = 0; l < 3; ++l)
          conv += (djj[k][l][p] * r - sm.j[k][p] * sm.j[l][p] * drho[l][p]) / (r * r);
        // v x (v x grad rho)
        std::array<double, 3> vxg{}, rhs1{};
        for (int i = 0; i < 3; ++i)
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
              vxg[i] += levi_civita(i, a, b) * v[a] * gradrho[b];
        for (int i = 0; i < 3; ++i)
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
              rhs1[i] += levi_civita(i, a, b) * v[a] * vxg[b];
        // 2 (p + rho curl v) x v
        std::array<double, 3> q;
        for (int i = 0; i < 3; ++i) q[i] = pvec[i] + r * curlv[i];
        double rhs2 = 0.0;
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) rhs2 += 2.0 * levi_civita(k, a, b) * q[a] * v[b];
        const double lhs = d0 + conv;
        const double rhs = rhs1[k] + rhs2;
        acc.add(lhs - rhs, std::max({std::abs(d0), std::abs(conv), std::abs(rhs), 1e-300}));
      }
    }
    out.push_back(acc.finish());
  }

  // (3) momentum magnitude per component n
  {
    // div(p_n v): p_n v^l = Tderiv_n^0 j^l / rho + s Gamma_n j^l
    // div(rho v x d_n v) = sum_l d_l [ (j x d_n j)^l / rho ]
    std::array<std::array<RField, 3>, 3> dnum;      // d_l of Tderiv_n^0 j^l, [n][l]
    std::array<std::array<RField, 3>, 3> dcrossnum; // d_l of (j x d_n j)^l, [n][l]
    for (int n = 0; n < 3; ++n) {
      for (int l = 0; l < 3; ++l) {
        RField num(NP);
        for (std::size_t p = 0; p < NP; ++p)
          num[p] = sm.Tderiv[n + 1][0][p] * sm.j[l][p];
        dnum[n][l] = diff.derivative_real(num, l);
        RField crossnum(NP);
        for (std::size_t p = 0; p < NP; ++p) {
          double c = 0.0;
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
              c += levi_civita(l, a, b) * sm.j[a][p] * dj[n][b][p];
          crossnum[p] = c;
        }
        dcrossnum[n][l] = diff.derivative_real(crossnum, l);
      }
    }
    // recompute (j x d_n j)^l pointwise for the quotient-rule correction
    for (int n = 1; n <= 3; ++n) {
      detail::StatsAccum acc("hydro-momentum-balance-n" + std::to_string(n),
                             sector_name(sector), dv);
      for (std::size_t p = 0; p < NP; ++p) {
        if (!sm.mask[p] || !sp.mask[p] || !sn.mask[p]) {
          acc.skip();
          continue;
        }
        const double r = sm.rho[p];
        const double d0 = (sn.T[n][0][p] - sp.T[n][0][p]) / (2.0 * w.dt);
        double divpv = 0.0, divcross = 0.0, gterm = 0.0;
        for (int l = 0; l < 3; ++l) {
          // d_l (Tderiv_n^0 j^l / rho)
          const double num = sm.Tderiv[n][0][p] * sm.j[l][p];
          divpv += (dnum[n - 1][l][p] * r - num * drho[l][p]) / (r * r);
          // s d_l(Gamma_n j^l)
          divpv += s * (dGamma.d[l + 1][n][p] * sm.j[l][p] +
                        sm.gamma_lower(n, p) * dj[l][l][p]);
          // d_l [ (j x d_n j)^l / rho ]
          double cr = 0.0;
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
              cr += levi_civita(l, a, b) * sm.j[a][p] * dj[n - 1][b][p];
          divcross += (dcrossnum[n - 1][l][p] * r - cr * drho[l][p]) / (r * r);
        }
        // s rho G_{n kappa} v^kappa = s [ rho (d_n Gamma_0 - d_0 Gamma_n)
        //                                + sum_k (d_n Gamma_k - d_k Gamma_n) j^k ]
        gterm = r * (dGamma.d[n][0][p] - dGamma.d[0][n][p]);
        for (int k = 1; k <= 3; ++k)
          gterm += (dGamma.d[n][k][p] - dGamma.d[k][n][p]) * sm.j[k - 1][p];
        gterm *= s;
        const double lhs = d0 + divpv;
        const double rhs = -0.5 * divcross - gterm;
        acc.add(lhs - rhs, std::max({std::abs(d0), std::abs(divpv), std::abs(rhs),
                                     1e-300}));
      }
      out.push_back(acc.finish());
    }
  }

  return out;
}

// ---------------------------------------------------------------------------
// flowlines

struct Polyline {
  int id = 0;
  std::vector<std::array<double, 4>> points;  // (s, x, y, z)
};

// Periodic trilinear interpolation of a per-point 3-vector field.
class GridVelocitySampler {
 public:
  GridVelocitySampler(const Grid& g, std::array<RField, 3> v,
                      std::vector<std::uint8_t> mask)
      : grid_(g), v_(std::move(v)), mask_(std::move(mask)) {}

  std::array<double, 3> operator()(const std::array<double, 3>& x) const {
    std::array<double, 3> out{};
    double w[3][2];
    int i0[3], i1[3];
    for (int d = 0; d < 3; ++d) {
      const double h = grid_.spacing(d);
      double u = x[d] / h;
      u -= std::floor(u / grid_.n[d]) * grid_.n[d];
      i0[d] = static_cast<int>(std::floor(u)) % grid_.n[d];
      i1[d] = (i0[d] + 1) % grid_.n[d];
      const double frac = u - std::floor(u);
      w[d][0] = 1.0 - frac;
      w[d][1] = frac;
    }
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c) {
          const std::size_t idx = grid_.index(a ? i1[0] : i0[0], b ? i1[1] : i0[1],
                                              c ? i1[2] : i0[2]);
          if (!mask_.empty() && !mask_[idx])
            throw LeftDomain("flowline entered a masked region");
          const double ww = w[0][a] * w[1][b] * w[2][c];
          for (int d = 0; d < 3; ++d) out[d] += ww * v_[d][idx];
        }
    return out;
  }

 private:
  Grid grid_;
  std::array<RField, 3> v_;
  std::vector<std::uint8_t> mask_;
};

// RK4 integration of gamma' = vel(gamma) for an autonomous sampler.
template <typename Vel>
Polyline integrate_flowline(Vel&& vel, const std::array<double, 3>& seed, double s_end,
                            double ds, int id = 0) {
  Polyline line;
  line.id = id;
  std::array<double, 3> x = seed;
  const long n = std::lround(std::ceil(s_end / ds - 1e-12));
  line.points.push_back({0.0, x[0], x[1], x[2]});
  for (long it = 0; it < n; ++it) {
    const double h = std::min(ds, s_end - it * ds);
    const auto k1 = vel(x);
    std::array<double, 3> x2, x3, x4;
    for (int d = 0; d < 3; ++d) x2[d] = x[d] + 0.5 * h * k1[d];
    const auto k2 = vel(x2);
    for (int d = 0; d < 3; ++d) x3[d] = x[d] + 0.5 * h * k2[d];
    const auto k3 = vel(x3);
    for (int d = 0; d < 3; ++d) x4[d] = x[d] + h * k3[d];
    const auto k4 = vel(x4);
    for (int d = 0; d < 3; ++d)
      x[d] += h / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
    line.points.push_back({(it + 1) * ds, x[0], x[1], x[2]});
  }
  return line;
}

// Velocity field linearly interpolated in time across a snapshot sequence;
// spatial sampling is periodic trilinear per snapshot.
class TrajectoryVelocitySampler {
 public:
  TrajectoryVelocitySampler(Grid g, std::vector<double> times,
                            std::vector<GridVelocitySampler> frames)
      : grid_(std::move(g)), times_(std::move(times)), frames_(std::move(frames)) {
    if (times_.size() != frames_.size() || times_.empty())
      throw InsufficientSnapshots("TrajectoryVelocitySampler: empty sequence");
  }

  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }

  std::array<double, 3> operator()(double t, const std::array<double, 3>& x) const {
    if (frames_.size() == 1) return frames_[0](x);
    std::size_t hi = 1;
    while (hi + 1 < times_.size() && times_[hi] < t) ++hi;
    const std::size_t lo = hi - 1;
    const double span = times_[hi] - times_[lo];
    const double w = span > 0.0 ? std::clamp((t - times_[lo]) / span, 0.0, 1.0) : 0.0;
    const auto a = frames_[lo](x);
    const auto b = frames_[hi](x);
    return {(1.0 - w) * a[0] + w * b[0], (1.0 - w) * a[1] + w * b[1],
            (1.0 - w) * a[2] + w * b[2]};
  }

 private:
  Grid grid_;
  std::vector<double> times_;
  std::vector<GridVelocitySampler> frames_;
};

// RK4 in time for gamma'(t) = vel(t, gamma); the linear-in-time snapshot
// interpolation limits the overall accuracy to second order between frames.
template <typename Vel>
Polyline integrate_flowline_time(Vel&& vel, const std::array<double, 3>& seed,
                                 double t0, double t1, double dt, int id = 0) {
  Polyline line;
  line.id = id;
  std::array<double, 3> x = seed;
  const long n = std::lround(std::ceil((t1 - t0) / dt - 1e-12));
  line.points.push_back({t0, x[0], x[1], x[2]});
  double t = t0;
  for (long it = 0; it < n; ++it) {
    const double h = std::min(dt, t1 - t);
    const auto k1 = vel(t, x);
    std::array<double, 3> x2, x3, x4;
    for (int d = 0; d < 3; ++d) x2[d] = x[d] + 0.5 * h * k1[d];
    const auto k2 = vel(t + 0.5 * h, x2);
    for (int d = 0; d < 3; ++d) x3[d] = x[d] + 0.5 * h * k2[d];
    const auto k3 = vel(t + 0.5 * h, x3);
    for (int d = 0; d < 3; ++d) x4[d] = x[d] + h * k3[d];
    const auto k4 = vel(t + h, x4);
    for (int d = 0; d < 3; ++d)
      x[d] += h / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
    t += h;
    line.points.push_back({t, x[0], x[1], x[2]});
  }
  return line;
}

// Both congruences from one sector state: the unit chiral velocity v = j/rho
// and the pilot velocity V_vec/V_0 of the Dirac current.
struct FlowlineSet {
  std::vector<Polyline> chiral;  // gamma' = v
  std::vector<Polyline> pilot;   // gamma' = V (spatial part over V^0)
};

namespace detail {

// per-snapshot sector velocity and pilot-velocity samplers
inline std::pair<GridVelocitySampler, GridVelocitySampler> sector_samplers(
    const SpinorField& f, const SectorState& st) {
  std::array<RField, 3> vfield, pfield;
  const std::size_t NP = st.rho.size();
  for (int d = 0; d < 3; ++d) {
    vfield[d].assign(NP, 0.0);
    pfield[d].assign(NP, 0.0);
  }
  for (std::size_t p = 0; p < NP; ++p) {
    if (!st.mask[p]) continue;
    for (int d = 0; d < 3; ++d) vfield[d][p] = st.j[d][p] / st.rho[p];
    const Paravector J = dirac_current(f.data[p]);
    const double j0 = J.c[0].real();
    if (j0 > 0.0)
      for (int d = 0; d < 3; ++d) pfield[d][p] = J.c[d + 1].real() / j0;
  }
  return {GridVelocitySampler(st.grid, vfield, std::vector<std::uint8_t>(st.mask)),
          GridVelocitySampler(st.grid, pfield, std::vector<std::uint8_t>(st.mask))};
}

}  // namespace detail

// Flowlines across a snapshot sequence: gamma' = v(t, gamma) (chiral) and
// gamma' = V(t, gamma) (pilot), integrated over [t_first, t_last].
inline FlowlineSet flowlines_over_trajectory(
    const std::vector<SpinorField>& traj, Sector sector, Differentiator& diff,
    const PotentialSpec& A, const PhysicsParams& params,
    const std::vector<std::array<double, 3>>& seeds, double dt) {
  if (traj.empty()) throw InsufficientSnapshots("flowlines: empty trajectory");
  std::vector<double> times;
  std::vector<GridVelocitySampler> vframes, pframes;
  for (const auto& f : traj) {
    const auto d = field_derivs(f, diff, A, params);
    const SectorState st = sector_state(f, d, A, params, sector);
    auto [vs, ps] = detail::sector_samplers(f, st);
    times.push_back(f.t);
    vframes.push_back(std::move(vs));
    pframes.push_back(std::move(ps));
  }
  const TrajectoryVelocitySampler vs(traj.front().grid, times, std::move(vframes));
  const TrajectoryVelocitySampler ps(traj.front().grid, times, std::move(pframes));
  FlowlineSet out;
  int id = 0;
  const double t0 = times.front(), t1 = times.back();
  for (const auto& seed : seeds) {
    out.chiral.push_back(integrate_flowline_time(vs, seed, t0, t1, dt, id));
    out.pilot.push_back(integrate_flowline_time(ps, seed, t0, t1, dt, id));
    ++id;
  }
  return out;
}

inline FlowlineSet flowlines(const SpinorField& f, const SectorState& st,
                             const std::vector<std::array<double, 3>>& seeds,
                             double s_end, double ds) {
  auto [vs, ps] = detail::sector_samplers(f, st);
  FlowlineSet out;
  int id = 0;
  for (const auto& seed : seeds) {
    out.chiral.push_back(integrate_flowline(vs, seed, s_end, ds, id));
    out.pilot.push_back(integrate_flowline(ps, seed, s_end, ds, id));
    ++id;
  }
  return out;
}

}  // namespace cl3
