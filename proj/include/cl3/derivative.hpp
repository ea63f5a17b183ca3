#pragma once

#include <fftw3.h>

#include <array>
#include <complex>
#include <cstring>
#include <memory>
#include <vector>

#include "cl3/field.hpp"
#include "cl3/grid.hpp"
#include "cl3/paravector.hpp"

// Spatial derivatives on the periodic grid: spectral (FFTW, exact on resolved
// modes) or 4th-order central differences. Plans use FFTW_ESTIMATE so runs
// are bit-deterministic.

namespace cl3 {

enum class DerivativeKind { spectral, central4 };

class SpectralWorkspace {
 public:
  explicit SpectralWorkspace(const Grid& g) : grid_(g) {
    const int n[3] = {g.n[0], g.n[1], g.n[2]};
    const std::size_t N = g.size();
    buf4_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * 4 * N));
    buf1_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * N));
    fwd4_ = fftw_plan_many_dft(3, n, 4, buf4_, nullptr, 4, 1, buf4_, nullptr, 4, 1,
                               FFTW_FORWARD, FFTW_ESTIMATE);
    bwd4_ = fftw_plan_many_dft(3, n, 4, buf4_, nullptr, 4, 1, buf4_, nullptr, 4, 1,
                               FFTW_BACKWARD, FFTW_ESTIMATE);
    fwd1_ = fftw_plan_dft_3d(n[0], n[1], n[2], buf1_, buf1_, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd1_ = fftw_plan_dft_3d(n[0], n[1], n[2], buf1_, buf1_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~SpectralWorkspace() {
    fftw_destroy_plan(fwd4_);
    fftw_destroy_plan(bwd4_);
    fftw_destroy_plan(fwd1_);
    fftw_destroy_plan(bwd1_);
    fftw_free(buf4_);
    fftw_free(buf1_);
  }
  SpectralWorkspace(const SpectralWorkspace&) = delete;
  SpectralWorkspace& operator=(const SpectralWorkspace&) = delete;

  const Grid& grid() const { return grid_; }

  void derivative(const std::vector<Paravector>& in, int axis,
                  std::vector<Paravector>& out) {
    const std::size_t N = grid_.size();
    std::memcpy(buf4_, in.data(), sizeof(fftw_complex) * 4 * N);
    fftw_execute(fwd4_);
    const double inv = 1.0 / static_cast<double>(N);
    for_each_mode([&](std::size_t idx, const std::array<double, 3>& k) {
      const cplx f(0.0, k[axis] * inv);
      auto* m = reinterpret_cast<cplx*>(buf4_ + 4 * idx);
      for (int mu = 0; mu < 4; ++mu) m[mu] *= f;
    });
    fftw_execute(bwd4_);
    out.resize(N);
    std::memcpy(static_cast<void*>(out.data()), buf4_, sizeof(fftw_complex) * 4 * N);
  }

  void derivative_scalar(const std::vector<cplx>& in, int axis, std::vector<cplx>& out) {
    const std::size_t N = grid_.size();
    std::memcpy(buf1_, in.data(), sizeof(fftw_complex) * N);
    fftw_execute(fwd1_);
    const double inv = 1.0 / static_cast<double>(N);
    for_each_mode([&](std::size_t idx, const std::array<double, 3>& k) {
      reinterpret_cast<cplx*>(buf1_)[idx] *= cplx(0.0, k[axis] * inv);
    });
    fftw_execute(bwd1_);
    out.resize(N);
    std::memcpy(static_cast<void*>(out.data()), buf1_, sizeof(fftw_complex) * N);
  }

  // Free streaming: s -> exp(i kappa t) s per Fourier mode, kappa = k_d e_d.
  // Exact and unitary for any t.
  void apply_streaming(std::vector<Paravector>& s, double t) {
    const std::size_t N = grid_.size();
    std::memcpy(buf4_, s.data(), sizeof(fftw_complex) * 4 * N);
    fftw_execute(fwd4_);
    const double inv = 1.0 / static_cast<double>(N);
    for_each_mode([&](std::size_t idx, const std::array<double, 3>& k) {
      const double kn = std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
      Paravector u;
      if (kn == 0.0) {
        u = Paravector::scalar(1.0);
      } else {
        const cplx is(0.0, std::sin(kn * t) / kn);
        u = Paravector{std::cos(kn * t), is * k[0], is * k[1], is * k[2]};
      }
      auto* m = reinterpret_cast<cplx*>(buf4_ + 4 * idx);
      Paravector p{m[0], m[1], m[2], m[3]};
      p = mul(u, p);
      for (int mu = 0; mu < 4; ++mu) m[mu] = p.c[mu] * inv;
    });
    fftw_execute(bwd4_);
    std::memcpy(static_cast<void*>(s.data()), buf4_, sizeof(fftw_complex) * 4 * N);
  }

 private:
  template <typename F>
  void for_each_mode(F&& fn) {
    std::size_t idx = 0;
    for (int i = 0; i < grid_.n[0]; ++i) {
      const double kx = grid_.wavenumber(0, i);
      for (int j = 0; j < grid_.n[1]; ++j) {
        const double ky = grid_.wavenumber(1, j);
        for (int k = 0; k < grid_.n[2]; ++k, ++idx)
          fn(idx, std::array<double, 3>{kx, ky, grid_.wavenumber(2, k)});
      }
    }
  }

  Grid grid_;
  fftw_complex* buf4_;
  fftw_complex* buf1_;
  fftw_plan fwd4_, bwd4_, fwd1_, bwd1_;
};

namespace detail {

// (-f[i+2] + 8 f[i+1] - 8 f[i-1] + f[i-2]) / (12 h), periodic wrap.
template <typename T, typename Get, typename Set>
void central4_axis(const Grid& g, int axis, double h, Get&& get, Set&& set) {
  const int n0 = g.n[0], n1 = g.n[1], n2 = g.n[2];
  auto wrap = [](int i, int n) { return (i % n + n) % n; };
  for (int i = 0; i < n0; ++i)
    for (int j = 0; j < n1; ++j)
      for (int k = 0; k < n2; ++k) {
        int c[3] = {i, j, k};
        auto at = [&](int off) {
          int d[3] = {c[0], c[1], c[2]};
          d[axis] = wrap(d[axis] + off, g.n[axis]);
          return get(g.index(d[0], d[1], d[2]));
        };
        const T v = (at(-2) - at(2) + 8.0 * (at(1) - at(-1))) * (1.0 / (12.0 * h));
        set(g.index(i, j, k), v);
      }
}

}  // namespace detail

class Differentiator {
 public:
  Differentiator(const Grid& g, DerivativeKind kind) : grid_(g), kind_(kind) {
    if (kind_ == DerivativeKind::spectral) ws_ = std::make_unique<SpectralWorkspace>(g);
  }

  const Grid& grid() const { return grid_; }
  DerivativeKind kind() const { return kind_; }
  SpectralWorkspace* spectral() { return ws_.get(); }

  std::vector<Paravector> derivative(const std::vector<Paravector>& f, int axis) {
    std::vector<Paravector> out;
    if (kind_ == DerivativeKind::spectral) {
      ws_->derivative(f, axis, out);
    } else {
      out.assign(f.size(), Paravector{});
      detail::central4_axis<Paravector>(
          grid_, axis, grid_.spacing(axis), [&](std::size_t i) { return f[i]; },
          [&](std::size_t i, const Paravector& v) { out[i] = v; });
    }
    return out;
  }

  std::array<std::vector<Paravector>, 3> gradient(const std::vector<Paravector>& f) {
    return {derivative(f, 0), derivative(f, 1), derivative(f, 2)};
  }

  std::vector<cplx> derivative_scalar(const std::vector<cplx>& f, int axis) {
    std::vector<cplx> out;
    if (kind_ == DerivativeKind::spectral) {
      ws_->derivative_scalar(f, axis, out);
    } else {
      out.assign(f.size(), 0.0);
      detail::central4_axis<cplx>(
          grid_, axis, grid_.spacing(axis), [&](std::size_t i) { return f[i]; },
          [&](std::size_t i, cplx v) { out[i] = v; });
    }
    return out;
  }

  std::vector<double> derivative_real(const std::vector<double>& f, int axis) {
    std::vector<cplx> cf(f.begin(), f.end());
    const auto d = derivative_scalar(cf, axis);
    std::vector<double> out(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) out[i] = d[i].real();
    return out;
  }

 private:
  Grid grid_;
  DerivativeKind kind_;
  std::unique_ptr<SpectralWorkspace> ws_;
};

struct FieldNorms {
  double l2 = 0.0;
  double h1 = 0.0;
};

// Discrete L2 and H1 (L2 plus gradient L2) of the spinor field.
inline FieldNorms norms(const SpinorField& f, Differentiator& diff) {
  FieldNorms out;
  out.l2 = l2_norm(f);
  double g2 = 0.0;
  const double dv = f.grid.spacing(0) * f.grid.spacing(1) * f.grid.spacing(2);
  for (int axis = 0; axis < 3; ++axis) {
    const auto d = diff.derivative(f.data, axis);
    for (const auto& p : d) g2 += frobenius_sq(p);
  }
  out.h1 = std::sqrt(out.l2 * out.l2 + g2 * dv);
  return out;
}

}  // namespace cl3
