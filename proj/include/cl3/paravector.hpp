#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <utility>

#include "cl3/errors.hpp"

// The space algebra Cl(3) over the complex numbers, stored as the four
// contravariant coefficients c[mu] of the basis {e_0 = 1, e_1, e_2, e_3}.
// The product is evaluated from the structure relation
//   e_k e_l = delta_kl + i eps_{klm} e_m
// directly on coefficients; the 2x2 matrix representation (matrix2.hpp) is a
// second, independent route used as oracle.
//
// Index conventions (one definition site, used by every tensor formula):
//   * lowering/raising a spatial index flips the sign: X_0 = X^0, X_k = -X^k;
//   * eps_{klm} is the standard Levi-Civita symbol (+1 for 123);
//   * raising any index of eps (or of the structure constants c_{kl}^m)
//     flips its sign, so e.g. eps^{kl}_n = eps_{kln} and eps^{imn} = -eps_{imn}.
// Cross products and curls below always use the standard lower-index symbol
// on contravariant components: (a x b)^i = eps_{ijk} a^j b^k.

namespace cl3 {

using cplx = std::complex<double>;

inline constexpr int levi_civita(int i, int j, int k) {
  if (i == j || j == k || i == k) return 0;
  if ((i == 0 && j == 1 && k == 2) || (i == 1 && j == 2 && k == 0) ||
      (i == 2 && j == 0 && k == 1))
    return 1;
  return -1;
}

struct Paravector {
  std::array<cplx, 4> c{};  // contravariant coefficients of e_0..e_3

  constexpr Paravector() = default;
  constexpr Paravector(cplx c0, cplx c1, cplx c2, cplx c3) : c{c0, c1, c2, c3} {}

  static constexpr Paravector scalar(cplx s) { return {s, 0.0, 0.0, 0.0}; }
  static constexpr Paravector basis(int mu) {
    Paravector p;
    p.c[mu] = 1.0;
    return p;
  }
  static constexpr Paravector vector3(cplx x, cplx y, cplx z) { return {0.0, x, y, z}; }

  cplx operator[](int mu) const { return c[mu]; }
  cplx& operator[](int mu) { return c[mu]; }

  // Covariant coefficient: X_mu with X_0 = X^0, X_k = -X^k.
  cplx lower(int mu) const { return mu == 0 ? c[0] : -c[mu]; }

  Paravector& operator+=(const Paravector& q) {
    for (int mu = 0; mu < 4; ++mu) c[mu] += q.c[mu];
    return *this;
  }
  Paravector& operator-=(const Paravector& q) {
    for (int mu = 0; mu < 4; ++mu) c[mu] -= q.c[mu];
    return *this;
  }
  Paravector& operator*=(cplx s) {
    for (auto& v : c) v *= s;
    return *this;
  }

  friend Paravector operator+(Paravector p, const Paravector& q) { return p += q; }
  friend Paravector operator-(Paravector p, const Paravector& q) { return p -= q; }
  friend Paravector operator-(const Paravector& p) { return {-p.c[0], -p.c[1], -p.c[2], -p.c[3]}; }
  friend Paravector operator*(cplx s, Paravector p) { return p *= s; }
  friend Paravector operator*(Paravector p, cplx s) { return p *= s; }
};

inline const Paravector& e0() { static const Paravector v = Paravector::basis(0); return v; }
inline const Paravector& e1() { static const Paravector v = Paravector::basis(1); return v; }
inline const Paravector& e2() { static const Paravector v = Paravector::basis(2); return v; }
inline const Paravector& e3() { static const Paravector v = Paravector::basis(3); return v; }

// Geometric product from the structure relation (coefficient-level, not matrix).
inline Paravector mul(const Paravector& p, const Paravector& q) {
  const cplx i(0.0, 1.0);
  Paravector r;
  r.c[0] = p.c[0] * q.c[0] + p.c[1] * q.c[1] + p.c[2] * q.c[2] + p.c[3] * q.c[3];
  r.c[1] = p.c[0] * q.c[1] + p.c[1] * q.c[0] + i * (p.c[2] * q.c[3] - p.c[3] * q.c[2]);
  r.c[2] = p.c[0] * q.c[2] + p.c[2] * q.c[0] + i * (p.c[3] * q.c[1] - p.c[1] * q.c[3]);
  r.c[3] = p.c[0] * q.c[3] + p.c[3] * q.c[0] + i * (p.c[1] * q.c[2] - p.c[2] * q.c[1]);
  return r;
}

inline Paravector operator*(const Paravector& p, const Paravector& q) { return mul(p, q); }

// Complex conjugation: conjugates every coefficient, fixes the basis vectors.
inline Paravector dagger(const Paravector& p) {
  return {std::conj(p.c[0]), std::conj(p.c[1]), std::conj(p.c[2]), std::conj(p.c[3])};
}

// Spatial reversal: flips the vector part, no conjugation. p*bar(p) is scalar.
inline Paravector bar(const Paravector& p) { return {p.c[0], -p.c[1], -p.c[2], -p.c[3]}; }

// Grade automorphism: hat = dagger(bar(p)).
inline Paravector hat(const Paravector& p) {
  return {std::conj(p.c[0]), -std::conj(p.c[1]), -std::conj(p.c[2]), -std::conj(p.c[3])};
}

inline Paravector re(const Paravector& p) {
  return {p.c[0].real(), p.c[1].real(), p.c[2].real(), p.c[3].real()};
}
inline Paravector im(const Paravector& p) {
  return {p.c[0].imag(), p.c[1].imag(), p.c[2].imag(), p.c[3].imag()};
}
inline Paravector even(const Paravector& p) {
  const cplx i(0.0, 1.0);
  return {p.c[0].real(), i * p.c[1].imag(), i * p.c[2].imag(), i * p.c[3].imag()};
}
inline Paravector odd(const Paravector& p) {
  const cplx i(0.0, 1.0);
  return {i * p.c[0].imag(), p.c[1].real(), p.c[2].real(), p.c[3].real()};
}

inline cplx scalar_part(const Paravector& p) { return p.c[0]; }
inline Paravector vector_part(const Paravector& p) { return {0.0, p.c[1], p.c[2], p.c[3]}; }
inline Paravector scalar_of(const Paravector& p) { return Paravector::scalar(p.c[0]); }

inline bool is_real(const Paravector& p, double tol = 0.0) {
  for (int mu = 0; mu < 4; ++mu)
    if (std::abs(p.c[mu].imag()) > tol) return false;
  return true;
}

inline bool all_finite(const Paravector& p) {
  for (int mu = 0; mu < 4; ++mu)
    if (!std::isfinite(p.c[mu].real()) || !std::isfinite(p.c[mu].imag())) return false;
  return true;
}

// Bilinear Minkowski scalar product <p,q> = (p*bar(q))_0. No conjugation.
inline cplx scalar_product(const Paravector& p, const Paravector& q) {
  return p.c[0] * q.c[0] - p.c[1] * q.c[1] - p.c[2] * q.c[2] - p.c[3] * q.c[3];
}

// det(p) = scalar of p*bar(p) = (p^0)^2 - p.p; multiplicative.
inline cplx det(const Paravector& p) { return scalar_product(p, p); }

// Squared Frobenius norm of the 2x2 matrix representation. This is the norm
// convention used throughout (regularization, L2 norms): ||p||^2 = 2 sum |c_mu|^2.
inline double frobenius_sq(const Paravector& p) {
  return 2.0 * (std::norm(p.c[0]) + std::norm(p.c[1]) + std::norm(p.c[2]) + std::norm(p.c[3]));
}

inline double frobenius_norm(const Paravector& p) { return std::sqrt(frobenius_sq(p)); }

// Multiplicative inverse det(p)^{-1} * bar(p); throws on (near-)lightlike input.
inline Paravector inverse(const Paravector& p, double eps_rel = 1e-14) {
  const cplx d = det(p);
  if (std::abs(d) <= eps_rel * frobenius_sq(p))
    throw NullElement("inverse: p*bar(p) below threshold, element not invertible");
  return (1.0 / d) * bar(p);
}

// Expansion/basic Fierz identity: -1/2 e^mu bar(p) e_mu reproduces p.
inline Paravector fierz_expand(const Paravector& p) {
  const Paravector b = bar(p);
  Paravector sum = b;  // e^0 bar(p) e_0
  for (int k = 1; k <= 3; ++k) {
    const Paravector ek = Paravector::basis(k);
    sum += -1.0 * mul(mul(ek, b), ek);  // e^k = -e_k
  }
  return -0.5 * sum;
}

// Projector P = (1 + e_3)/2 onto the minimal left ideal Cl(3)P.
inline Paravector projector_P() { return {0.5, 0.0, 0.0, 0.5}; }
inline Paravector projector_Pbar() { return {0.5, 0.0, 0.0, -0.5}; }

// Coordinates of pP in the ideal basis {P, e_1 P}: ((p^0+p^3)/2, (p^1+ip^2)/2).
inline std::pair<cplx, cplx> ideal_coeffs(const Paravector& p) {
  const cplx i(0.0, 1.0);
  return {0.5 * (p.c[0] + p.c[3]), 0.5 * (p.c[1] + i * p.c[2])};
}

// exp of a general element c + g with gamma = sqrt(g.g) (principal branch);
// internal helper behind boost/rotation, series fallback near gamma = 0.
inline Paravector exp_paravector(const Paravector& p) {
  const cplx g2 = p.c[1] * p.c[1] + p.c[2] * p.c[2] + p.c[3] * p.c[3];
  const cplx gamma = std::sqrt(g2);
  cplx ch, sh_over;
  if (std::abs(gamma) < 1e-6) {
    // cosh(g)=1+g^2/2+g^4/24, sinh(g)/g=1+g^2/6+g^4/120
    ch = 1.0 + g2 / 2.0 + g2 * g2 / 24.0;
    sh_over = 1.0 + g2 / 6.0 + g2 * g2 / 120.0;
  } else {
    ch = std::cosh(gamma);
    sh_over = std::sinh(gamma) / gamma;
  }
  const cplx ec = std::exp(p.c[0]);
  return {ec * ch, ec * sh_over * p.c[1], ec * sh_over * p.c[2], ec * sh_over * p.c[3]};
}

}  // namespace cl3
