#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "cl3/errors.hpp"
#include "cl3/paravector.hpp"

// Pointwise physics of the nonlinear Dirac equation: the U(1)-invariant
// nonlinearity N = |det(phi)|, the Dirac current J = phi phi^dagger and its
// pilot velocity V = J/N, the Lipschitz regularization V_lambda/F_lambda,
// plane waves phi = M exp(-i varphi e_3), and the prefactor reconstruction
// from (N, J).

namespace cl3 {

struct PhysicsParams {
  double m = 1.0;       // reduced mass m0 c / hbar
  double q = 0.0;       // reduced charge e / (hbar c)
  double lambda = 0.0;  // regularization strength; 0 selects the exact nonlinearity
};

// External electromagnetic paravector potential A = A_0 + A_vec, real
// coefficients, time-independent. Sampled potentials are per-grid-point.
struct PotentialSpec {
  enum class Kind { zero, constant, sampled };
  Kind kind = Kind::zero;
  Paravector value{};                // constant
  std::vector<Paravector> samples;   // sampled, flat grid index

  const Paravector& at(std::size_t idx) const {
    static const Paravector null{};
    switch (kind) {
      case Kind::zero: return null;
      case Kind::constant: return value;
      case Kind::sampled: return samples[idx];
    }
    return null;
  }
  bool is_zero() const { return kind == Kind::zero; }

  void validate(std::size_t grid_size) const {
    if (kind == Kind::sampled && samples.size() != grid_size)
      throw ConfigError("PotentialSpec: sample count does not match grid");
    auto check_real = [](const Paravector& a) {
      if (!is_real(a)) throw ConfigError("PotentialSpec: coefficients must be real");
      if (!all_finite(a)) throw ConfigError("PotentialSpec: coefficients must be finite");
    };
    if (kind == Kind::constant) check_real(value);
    if (kind == Kind::sampled)
      for (const auto& a : samples) check_real(a);
  }

  // Self-adjointness regime of the existence theory: |q A_0| <= m pointwise.
  bool within_selfadjoint_regime(const PhysicsParams& p) const {
    auto ok = [&](const Paravector& a) {
      return std::abs(p.q * a.c[0].real()) <= p.m + 1e-14;
    };
    if (kind == Kind::zero) return true;
    if (kind == Kind::constant) return ok(value);
    for (const auto& a : samples)
      if (!ok(a)) return false;
    return true;
  }
};

inline double nodal_threshold(const Paravector& phi, double eps_rel = 1e-12) {
  return eps_rel * frobenius_sq(phi);
}

// N = |det(phi)|, invariant under phi -> e^{i beta/2} phi.
inline double nonlinearity(const Paravector& phi) { return std::abs(det(phi)); }

// J = phi phi^dagger: Hermitian psd, so real coefficients with J^0 >= ||J_vec||.
inline Paravector dirac_current(const Paravector& phi) {
  return re(mul(phi, dagger(phi)));
}

// V = J/N with det(V) = 1; singular at nodal points.
inline Paravector pilot_velocity(const Paravector& phi, double eps_rel = 1e-12) {
  const double n = nonlinearity(phi);
  if (n <= nodal_threshold(phi, eps_rel))
    throw NodalPoint("pilot_velocity: |det(phi)| at or below nodal threshold");
  return (1.0 / n) * dirac_current(phi);
}

// Gamma = qA + mV, real coefficients.
inline Paravector gamma_field(const Paravector& A, const Paravector& V,
                              const PhysicsParams& p) {
  return re(p.q * A + p.m * V);
}

// Exact nonlinear multiplier: V phi_hat = (det(phi)^*/N) phi.
inline cplx exact_velocity_scalar(const Paravector& phi, double eps_rel = 1e-12) {
  const cplx d = det(phi);
  const double n = std::abs(d);
  if (n <= nodal_threshold(phi, eps_rel))
    throw NodalPoint("exact_velocity_scalar: nodal point");
  return std::conj(d) / n;
}

// V_lambda(phi) = det(phi)^* / (N + lambda ||phi||^2); V_lambda(0) := 0.
// ||.|| is the Frobenius norm of the matrix representation.
inline cplx reg_velocity(const Paravector& phi, double lambda) {
  const cplx d = det(phi);
  const double denom = std::abs(d) + lambda * frobenius_sq(phi);
  if (denom == 0.0) return 0.0;
  return std::conj(d) / denom;
}

// F_lambda(phi) = (V_lambda(phi) - 1) phi; ||F_lambda(phi)|| <= 2 ||phi||.
inline Paravector reg_source(const Paravector& phi, double lambda) {
  return (reg_velocity(phi, lambda) - 1.0) * phi;
}

// Scalar multiplier used by the nonlinear evolution: V_lambda for lambda > 0,
// the exact det(phi)^*/N for lambda = 0 (nodal guard applies).
inline cplx nonlinear_multiplier(const Paravector& phi, double lambda,
                                 double eps_rel = 1e-12) {
  return lambda > 0.0 ? reg_velocity(phi, lambda) : exact_velocity_scalar(phi, eps_rel);
}

// Residual of the first-order equation at a point, given the four derivatives
// d_mu(phi_hat):  sum_mu e^mu d_mu(phi_hat) + i q A phi_hat e_3 + i m nl e_3,
// where nl = V phi_hat (exact, V recomputed from phi) or V_lambda(phi) phi.
inline Paravector nonlinear_residual(const Paravector& phi,
                                     const std::array<Paravector, 4>& dphi_hat,
                                     const Paravector& A, const PhysicsParams& p,
                                     double eps_rel = 1e-12) {
  const cplx i(0.0, 1.0);
  Paravector grad = dphi_hat[0];
  for (int k = 1; k <= 3; ++k) grad += -1.0 * mul(Paravector::basis(k), dphi_hat[k]);
  const Paravector phihat = hat(phi);
  const cplx c = nonlinear_multiplier(phi, p.lambda, eps_rel);
  Paravector r = grad;
  r += i * mul(mul(A, phihat), e3()) * p.q;
  r += (i * p.m * c) * mul(phi, e3());
  return r;
}

// Residual of the classical (linear) equation: nabla phi_hat + iqA phi_hat e3 + im phi e3.
inline Paravector linear_residual(const Paravector& phi,
                                  const std::array<Paravector, 4>& dphi_hat,
                                  const Paravector& A, const PhysicsParams& p) {
  const cplx i(0.0, 1.0);
  Paravector grad = dphi_hat[0];
  for (int k = 1; k <= 3; ++k) grad += -1.0 * mul(Paravector::basis(k), dphi_hat[k]);
  Paravector r = grad;
  r += i * mul(mul(A, hat(phi)), e3()) * p.q;
  r += (i * p.m) * mul(phi, e3());
  return r;
}

// --- Plane waves phi(x) = M exp(-i varphi(x) e_3), varphi = m V_mu x^mu + phi0 ---

// Hermitian psd prefactor from (N, J): M^0 = sqrt((J^0+N)/2), M^k = J^k/(2 M^0).
// Pre: J real psd with det(J) = N^2 (relative tolerance) and J^0 >= N >= 0.
inline Paravector reconstruct_prefactor(double N, const Paravector& J,
                                        double tol = 1e-10) {
  const double j0 = J.c[0].real();
  const double detj = det(re(J)).real();
  const double scale = std::max({N * N, detj, j0 * j0, 1e-300});
  if (std::abs(detj - N * N) > tol * scale)
    throw InconsistentPair("reconstruct_prefactor: det(J) != N^2");
  if (N < 0.0 || j0 < N * (1.0 - 1e-12))
    throw InconsistentPair("reconstruct_prefactor: need J^0 >= N >= 0");
  const double m0sq = 0.5 * (j0 + N);
  if (m0sq <= 0.0) {
    if (frobenius_sq(J) == 0.0) return Paravector{};
    throw DegenerateJ("reconstruct_prefactor: J^0 + N = 0 with J != 0");
  }
  const double m0 = std::sqrt(m0sq);
  return {m0, J.c[1].real() / (2.0 * m0), J.c[2].real() / (2.0 * m0),
          J.c[3].real() / (2.0 * m0)};
}

struct PlaneWaveSpec {
  Paravector M;        // Hermitian psd prefactor
  double phi0 = 0.0;   // phase offset

  double N() const { return std::abs(det(M)); }
  Paravector J() const { return dirac_current(M); }
  Paravector V() const { return (1.0 / N()) * J(); }

  static PlaneWaveSpec from_NJ(double N, const Paravector& J, double phi0 = 0.0,
                               double tol = 1e-10) {
    return {reconstruct_prefactor(N, J, tol), phi0};
  }
  // From N and the spatial velocity: V^0 = sqrt(1 + |v|^2), J = N V.
  static PlaneWaveSpec from_velocity(double N, const std::array<double, 3>& v,
                                     double phi0 = 0.0) {
    const double v0 = std::sqrt(1.0 + v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    const Paravector J{N * v0, N * v[0], N * v[1], N * v[2]};
    return from_NJ(N, J, phi0, 1e-9);
  }
};

// varphi(x) = m V_mu x^mu + phi0 = m (V^0 t - V_vec . x_vec) + phi0.
inline double plane_wave_phase(const Paravector& V, double m, double phi0,
                               const std::array<double, 4>& x) {
  double s = V.c[0].real() * x[0];
  for (int k = 1; k <= 3; ++k) s -= V.c[k].real() * x[k];
  return m * s + phi0;
}

// exp(-i varphi e_3) = cos(varphi) - i sin(varphi) e_3.
inline Paravector phase_rotor(double varphi) {
  return {std::cos(varphi), 0.0, 0.0, cplx(0.0, -std::sin(varphi))};
}

inline Paravector plane_wave_eval(const PlaneWaveSpec& spec, const PhysicsParams& p,
                                  const std::array<double, 4>& x) {
  return mul(spec.M, phase_rotor(plane_wave_phase(spec.V(), p.m, spec.phi0, x)));
}

// With a constant potential the same rotor ansatz solves the equation when
// the phase gradient is the full Gamma = qA + mV instead of mV.
inline Paravector plane_wave_gamma(const PlaneWaveSpec& spec, const PhysicsParams& p,
                                   const Paravector& A_const) {
  return re(p.q * A_const + p.m * spec.V());
}

inline Paravector plane_wave_eval_in_potential(const PlaneWaveSpec& spec,
                                               const PhysicsParams& p,
                                               const Paravector& A_const,
                                               const std::array<double, 4>& x) {
  const Paravector gamma = plane_wave_gamma(spec, p, A_const);
  return mul(spec.M, phase_rotor(plane_wave_phase(gamma, 1.0, spec.phi0, x)));
}

// Analytic derivatives d_mu phi = -i m V_mu phi e_3 (V_0 = V^0, V_k = -V^k).
inline std::array<Paravector, 4> plane_wave_grad(const PlaneWaveSpec& spec,
                                                 const PhysicsParams& p,
                                                 const std::array<double, 4>& x) {
  const Paravector V = spec.V();
  const Paravector phi = plane_wave_eval(spec, p, x);
  const Paravector phie3 = mul(phi, e3());
  std::array<Paravector, 4> d;
  for (int mu = 0; mu < 4; ++mu) {
    const cplx factor = cplx(0.0, -1.0) * p.m * V.lower(mu);
    d[mu] = factor * phie3;
  }
  return d;
}

// d_mu(phi_hat) = -i m V_mu phi_hat e_3 (same form; hat conjugates the scalar).
inline std::array<Paravector, 4> plane_wave_grad_hat(const PlaneWaveSpec& spec,
                                                     const PhysicsParams& p,
                                                     const std::array<double, 4>& x) {
  auto d = plane_wave_grad(spec, p, x);
  for (auto& g : d) g = hat(g);
  return d;
}

}  // namespace cl3
