#pragma once

#include <array>
#include <cmath>
#include <utility>

#include "cl3/errors.hpp"
#include "cl3/matrix2.hpp"
#include "cl3/paravector.hpp"

// Lorentz transforms p -> l p dagger(l) for l with l*bar(l) = 1.

namespace cl3 {

struct LorentzFactor {
  Paravector l;

  // Validates l*bar(l) = 1 on construction.
  static LorentzFactor from(const Paravector& p, double tol = 1e-12) {
    if (std::abs(det(p) - 1.0) > tol)
      throw DegenerateFactor("LorentzFactor: |l*bar(l) - 1| exceeds tolerance");
    return LorentzFactor{p};
  }
};

// exp(w/2) = cosh(w/2) + w_hat sinh(w/2); w = 0 gives the identity.
inline LorentzFactor boost(const std::array<double, 3>& w) {
  const double wn = std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
  if (wn == 0.0) return LorentzFactor{Paravector::scalar(1.0)};
  const double ch = std::cosh(0.5 * wn), sh = std::sinh(0.5 * wn) / wn;
  return LorentzFactor{{ch, sh * w[0], sh * w[1], sh * w[2]}};
}

// exp(-i theta/2) = cos(theta/2) - i theta_hat sin(theta/2).
inline LorentzFactor rotation(const std::array<double, 3>& theta) {
  const double tn =
      std::sqrt(theta[0] * theta[0] + theta[1] * theta[1] + theta[2] * theta[2]);
  if (tn == 0.0) return LorentzFactor{Paravector::scalar(1.0)};
  const cplx ms(0.0, -std::sin(0.5 * tn) / tn);
  return LorentzFactor{{std::cos(0.5 * tn), ms * theta[0], ms * theta[1], ms * theta[2]}};
}

inline Paravector lorentz_apply(const LorentzFactor& l, const Paravector& p) {
  return mul(mul(l.l, p), dagger(l.l));
}

// l = b r with boost b = (l l^dagger)^{1/2} (real) and rotation r = bar(b) l (even).
// The 2x2 Hermitian square root runs through the matrix representation.
inline std::pair<LorentzFactor, LorentzFactor> factor_boost_rotation(const LorentzFactor& l) {
  const Matrix2C ll = to_matrix(mul(l.l, dagger(l.l)));
  const Paravector b = from_matrix(sqrt_hermitian_psd(ll));
  const Paravector r = mul(bar(b), l.l);
  return {LorentzFactor{b}, LorentzFactor{r}};
}

}  // namespace cl3
