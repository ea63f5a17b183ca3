#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "cl3/lorentz.hpp"
#include "cl3/matrix2.hpp"
#include "cl3/paravector.hpp"
#include "cl3/random.hpp"

// Randomized invariant suite for the algebra layer: structure equations,
// involution laws, matrix-representation oracle equivalence, Fierz expansion
// and the coefficient lemmas. Shared by the `algebra-test` CLI subcommand and
// the test suites.

namespace cl3 {

struct LawReport {
  std::string law;
  std::size_t cases = 0;
  double max_err = 0.0;
  double tol = 0.0;

  bool pass() const { return max_err <= tol; }
};

namespace detail {

inline double pnorm(const Paravector& p) {
  double s = 0.0;
  for (int mu = 0; mu < 4; ++mu) s = std::max(s, std::abs(p.c[mu]));
  return s;
}

inline double rel_diff(const Paravector& a, const Paravector& b) {
  double num = 0.0;
  for (int mu = 0; mu < 4; ++mu) num = std::max(num, std::abs(a.c[mu] - b.c[mu]));
  return num / std::max({pnorm(a), pnorm(b), 1.0});
}

inline double rel_diff(cplx a, cplx b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0});
}

inline double mat_rel_diff(const Matrix2C& m, const Matrix2C& n) {
  const double num = std::sqrt(frobenius_sq(m - n));
  return num / std::max({std::sqrt(frobenius_sq(m)), std::sqrt(frobenius_sq(n)), 1.0});
}

}  // namespace detail

inline std::vector<LawReport> run_algebra_suite(std::size_t cases, std::uint64_t seed) {
  using detail::mat_rel_diff;
  using detail::rel_diff;
  Rng rng(seed);

  std::vector<LawReport> out;
  out.reserve(32);  // the add() references below must stay valid
  auto add = [&out](std::string law, std::size_t n, double tol) -> LawReport& {
    out.push_back(LawReport{std::move(law), n, 0.0, tol});
    return out.back();
  };
  auto track = [](LawReport& r, double err) { r.max_err = std::max(r.max_err, err); };

  // Structure equations and the pseudoscalar, exact.
  {
    auto& r = add("structure: e_k e_l + e_l e_k = 2 delta_kl", 9, 0.0);
    for (int k = 1; k <= 3; ++k)
      for (int l = 1; l <= 3; ++l) {
        const Paravector lhs = mul(Paravector::basis(k), Paravector::basis(l)) +
                               mul(Paravector::basis(l), Paravector::basis(k));
        const Paravector rhs = Paravector::scalar(k == l ? 2.0 : 0.0);
        track(r, rel_diff(lhs, rhs));
      }
    auto& r2 = add("structure: (e1 e2 e3)^2 = -1, central", 5, 0.0);
    const Paravector i3 = mul(mul(e1(), e2()), e3());
    track(r2, rel_diff(mul(i3, i3), Paravector::scalar(-1.0)));
    for (int mu = 0; mu < 4; ++mu) {
      const Paravector b = Paravector::basis(mu);
      track(r2, rel_diff(mul(i3, b), mul(b, i3)));
    }
    auto& r3 = add("metric: <e_mu, e_nu> = eta_mu_nu", 16, 0.0);
    for (int mu = 0; mu < 4; ++mu)
      for (int nu = 0; nu < 4; ++nu) {
        const double eta = mu != nu ? 0.0 : (mu == 0 ? 1.0 : -1.0);
        track(r3, std::abs(scalar_product(Paravector::basis(mu), Paravector::basis(nu)) -
                           eta));
      }
  }

  auto& law_mul = add("oracle: mul(p,q) vs matrix product", cases, 1e-12);
  auto& law_inv_laws = add("involutions: product laws and hat = dagger(bar)", cases, 1e-12);
  auto& law_inv_oracle = add("oracle: involutions vs matrix shuffles", cases, 1e-12);
  auto& law_det = add("oracle: det and multiplicativity", cases, 1e-12);
  auto& law_invrs = add("oracle: inverse vs matrix inverse", cases, 1e-12);
  auto& law_scpr = add("oracle: <p,q> vs half-trace of M adj(N)", cases, 1e-12);
  auto& law_pbar = add("p bar(p) is scalar", cases, 1e-13);
  auto& law_cyc = add("cyclic: (pq)_0 = (qp)_0", cases, 1e-12);
  auto& law_even = add("even subalgebra closed; (i e_k)^2 = -1", cases, 1e-12);
  auto& law_parts = add("parts: exact decompositions, re/scalar commute", cases, 1e-14);
  auto& law_fierz = add("Fierz expansion reproduces p", cases, 1e-13);
  auto& law_coeffs = add("coefficients: (bar(p) e^mu hat(p))_nu = (p e_nu p+)^mu", cases, 1e-12);
  auto& law_lift = add("ideal lift: (P bar(p) e^mu hat(p) P)_0 = (p Pbar p+)^mu", cases, 1e-12);
  auto& law_ideal = add("ideal: P p P = (p0 + p3) P and ideal coords", cases, 1e-13);

  const Paravector P = projector_P();
  const Paravector Pb = projector_Pbar();

  for (std::size_t it = 0; it < cases; ++it) {
    const Paravector p = random_paravector(rng);
    const Paravector q = random_paravector(rng);
    const Matrix2C mp = to_matrix(p), mq = to_matrix(q);

    track(law_mul, mat_rel_diff(to_matrix(mul(p, q)), mp * mq));

    track(law_inv_laws, rel_diff(dagger(mul(p, q)), mul(dagger(q), dagger(p))));
    track(law_inv_laws, rel_diff(bar(mul(p, q)), mul(bar(q), bar(p))));
    track(law_inv_laws, rel_diff(hat(mul(p, q)), mul(hat(p), hat(q))));
    track(law_inv_laws, rel_diff(hat(p), dagger(bar(p))));
    track(law_inv_laws, rel_diff(bar(bar(p)), p));
    track(law_inv_laws, rel_diff(dagger(dagger(p)), p));
    track(law_inv_laws, rel_diff(hat(hat(p)), p));

    track(law_inv_oracle, mat_rel_diff(to_matrix(bar(p)), adjugate(mp)));
    track(law_inv_oracle, mat_rel_diff(to_matrix(dagger(p)), conj_transpose(mp)));
    track(law_inv_oracle,
          mat_rel_diff(to_matrix(hat(p)), conj_transpose(adjugate(mp))));

    track(law_det, rel_diff(det(p), det(mp)));
    track(law_det, rel_diff(det(mul(p, q)), det(p) * det(q)));

    if (std::abs(det(p)) > 1e-6 * frobenius_sq(p)) {
      track(law_invrs, mat_rel_diff(to_matrix(inverse(p)), inverse(mp)));
      track(law_invrs, rel_diff(mul(p, inverse(p)), Paravector::scalar(1.0)));
      track(law_invrs, rel_diff(mul(inverse(p), p), Paravector::scalar(1.0)));
    }

    track(law_scpr, rel_diff(scalar_product(p, q), 0.5 * trace(mp * adjugate(mq))));

    {
      const Paravector pb = mul(p, bar(p));
      double vec = 0.0;
      for (int k = 1; k <= 3; ++k) vec = std::max(vec, std::abs(pb.c[k]));
      track(law_pbar, vec / std::max(frobenius_sq(p), 1.0));
    }

    track(law_cyc, rel_diff(scalar_part(mul(p, q)), scalar_part(mul(q, p))));

    {
      const Paravector ep = even(p), eq = even(q);
      const Paravector prod = mul(ep, eq);
      track(law_even, rel_diff(prod, even(prod)));
      for (int k = 1; k <= 3; ++k) {
        const Paravector iek = cplx(0.0, 1.0) * Paravector::basis(k);
        track(law_even, rel_diff(mul(iek, iek), Paravector::scalar(-1.0)));
      }
    }

    track(law_parts, rel_diff(re(p) + cplx(0.0, 1.0) * im(p), p));
    track(law_parts, rel_diff(scalar_of(p) + vector_part(p), p));
    track(law_parts, rel_diff(even(p) + odd(p), p));
    track(law_parts, rel_diff(scalar_part(re(p)), cplx(p.c[0].real())));

    track(law_fierz, rel_diff(fierz_expand(p), p));

    for (int mu = 0; mu < 4; ++mu) {
      const Paravector emu_up = (mu == 0 ? 1.0 : -1.0) * Paravector::basis(mu);
      const Paravector lhs = mul(mul(bar(p), emu_up), hat(p));
      for (int nu = 0; nu < 4; ++nu) {
        const Paravector rhs = mul(mul(p, Paravector::basis(nu)), dagger(p));
        track(law_coeffs, rel_diff(lhs.lower(nu), rhs.c[mu]));
      }
      const cplx lift = scalar_part(mul(mul(P, lhs), P));
      const Paravector rr = mul(mul(p, Pb), dagger(p));
      track(law_lift, rel_diff(lift, rr.c[mu]));
    }

    {
      const Paravector pPp = mul(mul(P, p), P);
      track(law_ideal, rel_diff(pPp, (p.c[0] + p.c[3]) * P));
      const auto [a0, a1] = ideal_coeffs(p);
      const Paravector pP = mul(p, P);
      // a0, a1 are the e_mu coefficients (pP)^0 and (pP)^1; in the ideal
      // basis {P, e_1 P} the expansion carries 2 a0, 2 a1.
      track(law_ideal, rel_diff(pP, (2.0 * a0) * P + (2.0 * a1) * mul(e1(), P)));
      track(law_ideal, rel_diff(pP.c[0], a0));
      track(law_ideal, rel_diff(pP.c[1], a1));
    }
  }

  return out;
}

inline bool suite_passes(const std::vector<LawReport>& reports) {
  return std::all_of(reports.begin(), reports.end(),
                     [](const LawReport& r) { return r.pass(); });
}

}  // namespace cl3
