#pragma once

#include <random>

#include "cl3/paravector.hpp"

// Seeded generators for the randomized invariant suites.

namespace cl3 {

using Rng = std::mt19937_64;

inline cplx random_cplx(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return {n(rng), n(rng)};
}

inline Paravector random_paravector(Rng& rng) {
  return {random_cplx(rng), random_cplx(rng), random_cplx(rng), random_cplx(rng)};
}

inline Paravector random_real_paravector(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return {n(rng), n(rng), n(rng), n(rng)};
}

// Random invertible element (retries near-null draws).
inline Paravector random_invertible(Rng& rng, double eps_rel = 1e-6) {
  for (;;) {
    Paravector p = random_paravector(rng);
    if (std::abs(det(p)) > eps_rel * frobenius_sq(p)) return p;
  }
}

inline std::array<double, 3> random_vec3(Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  return {n(rng), n(rng), n(rng)};
}

// Random Hermitian positive semidefinite element B^dagger B (real coefficients).
inline Paravector random_hermitian_psd(Rng& rng) {
  const Paravector b = random_paravector(rng);
  return re(mul(dagger(b), b));
}

}  // namespace cl3
