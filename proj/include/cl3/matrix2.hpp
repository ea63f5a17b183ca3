#pragma once

#include <cmath>
#include <complex>

#include "cl3/errors.hpp"
#include "cl3/paravector.hpp"

// 2x2 complex matrix representation of Cl(3): e_k are the Pauli matrices and
//   p = p^mu e_mu  <->  [[p0+p3, p1-i p2], [p1+i p2, p0-p3]].
// Everything here multiplies/inverts by matrix entries, independent of the
// coefficient-level product in paravector.hpp, so it can serve as oracle.

namespace cl3 {

struct Matrix2C {
  cplx a{}, b{}, c{}, d{};  // [[a, b], [c, d]]

  friend Matrix2C operator+(const Matrix2C& m, const Matrix2C& n) {
    return {m.a + n.a, m.b + n.b, m.c + n.c, m.d + n.d};
  }
  friend Matrix2C operator-(const Matrix2C& m, const Matrix2C& n) {
    return {m.a - n.a, m.b - n.b, m.c - n.c, m.d - n.d};
  }
  friend Matrix2C operator*(cplx s, const Matrix2C& m) {
    return {s * m.a, s * m.b, s * m.c, s * m.d};
  }
  friend Matrix2C operator*(const Matrix2C& m, const Matrix2C& n) {
    return {m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d,
            m.c * n.a + m.d * n.c, m.c * n.b + m.d * n.d};
  }
};

inline Matrix2C to_matrix(const Paravector& p) {
  const cplx i(0.0, 1.0);
  return {p.c[0] + p.c[3], p.c[1] - i * p.c[2], p.c[1] + i * p.c[2], p.c[0] - p.c[3]};
}

inline Paravector from_matrix(const Matrix2C& m) {
  const cplx i(0.0, 1.0);
  return {0.5 * (m.a + m.d), 0.5 * (m.c + m.b), (m.c - m.b) / (2.0 * i), 0.5 * (m.a - m.d)};
}

inline cplx det(const Matrix2C& m) { return m.a * m.d - m.b * m.c; }

inline cplx trace(const Matrix2C& m) { return m.a + m.d; }

// adj(M): entry shuffle, no conjugation; represents the spatial reversal.
inline Matrix2C adjugate(const Matrix2C& m) { return {m.d, -m.b, -m.c, m.a}; }

inline Matrix2C conj_transpose(const Matrix2C& m) {
  return {std::conj(m.a), std::conj(m.c), std::conj(m.b), std::conj(m.d)};
}

inline Matrix2C inverse(const Matrix2C& m) {
  const cplx dd = det(m);
  if (std::abs(dd) == 0.0) throw NullElement("Matrix2C inverse: zero determinant");
  return (1.0 / dd) * adjugate(m);
}

inline double frobenius_sq(const Matrix2C& m) {
  return std::norm(m.a) + std::norm(m.b) + std::norm(m.c) + std::norm(m.d);
}

// Principal square root of a Hermitian positive (semi)definite 2x2 matrix:
// sqrt(H) = (H + sqrt(det H) I) / sqrt(tr H + 2 sqrt(det H)).
inline Matrix2C sqrt_hermitian_psd(const Matrix2C& h) {
  const double dd = std::max(0.0, det(h).real());
  const double s = std::sqrt(dd);
  const double denom2 = trace(h).real() + 2.0 * s;
  if (denom2 <= 0.0) throw DegenerateFactor("sqrt_hermitian_psd: trace + 2 sqrt(det) <= 0");
  const double denom = std::sqrt(denom2);
  Matrix2C r = h;
  r.a += s;
  r.d += s;
  return (1.0 / denom) * r;
}

}  // namespace cl3
