#pragma once

// Parameter gradients and differentiation utilities built on top of jets.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "harmonia/error.hpp"
#include "harmonia/jet.hpp"

namespace harmonia {

/// Gradient of a scalar loss, aligned index-for-index with a parameter vector.
using ParamGradient = std::vector<double>;

/// Real and imaginary parts of a complex function of (x, y), each with its
/// spatial derivatives.
struct ComplexJet {
  Jet<2> u;
  Jet<2> v;
};

inline ComplexJet split(const Jet<2, std::complex<double>>& z) {
  ComplexJet r;
  r.u.v = z.v.real();
  r.v.v = z.v.imag();
  for (std::size_t i = 0; i < 2; ++i) {
    r.u.g[i] = z.g[i].real();
    r.v.g[i] = z.g[i].imag();
  }
  for (std::size_t i = 0; i < 4; ++i) {
    r.u.h[i] = z.h[i].real();
    r.v.h[i] = z.h[i].imag();
  }
  return r;
}

/// (du/dx - dv/dy, du/dy + dv/dx); both vanish for holomorphic maps.
inline std::pair<double, double> cauchy_riemann_residual(const ComplexJet& f) {
  return {f.u.g[0] - f.v.g[1], f.u.g[1] + f.v.g[0]};
}

/// Evaluate `f` (lifted (x, y) -> ComplexJet) at z and return its
/// Cauchy-Riemann residuals.
template <class F>
std::pair<double, double> cauchy_riemann_residual(F&& f, const Point<2>& z) {
  const auto xs = lift<2>(z);
  return cauchy_riemann_residual(static_cast<ComplexJet>(f(xs)));
}

// ---------------------------------------------------------------------------
// Forward-mode duals over the full parameter vector. Used by param_grad for
// ad-hoc losses; network losses have dedicated adjoint passes.
// ---------------------------------------------------------------------------

struct Dual {
  double v = 0.0;
  std::vector<double> d;

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT: constants promote implicitly
  Dual(double value, std::vector<double> partials) : v(value), d(std::move(partials)) {}
};

namespace detail {
inline Dual combine(const Dual& a, const Dual& b, double va, double da, double db) {
  const std::size_t n = std::max(a.d.size(), b.d.size());
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < a.d.size(); ++i) out[i] += da * a.d[i];
  for (std::size_t i = 0; i < b.d.size(); ++i) out[i] += db * b.d[i];
  return Dual(va, std::move(out));
}
inline Dual unary(const Dual& a, double f0, double f1) {
  std::vector<double> out(a.d.size());
  for (std::size_t i = 0; i < a.d.size(); ++i) out[i] = f1 * a.d[i];
  return Dual(f0, std::move(out));
}
}  // namespace detail

inline Dual operator+(const Dual& a, const Dual& b) { return detail::combine(a, b, a.v + b.v, 1.0, 1.0); }
inline Dual operator-(const Dual& a, const Dual& b) { return detail::combine(a, b, a.v - b.v, 1.0, -1.0); }
inline Dual operator*(const Dual& a, const Dual& b) { return detail::combine(a, b, a.v * b.v, b.v, a.v); }
inline Dual operator/(const Dual& a, const Dual& b) {
  return detail::combine(a, b, a.v / b.v, 1.0 / b.v, -a.v / (b.v * b.v));
}
inline Dual operator-(const Dual& a) { return detail::unary(a, -a.v, -1.0); }
inline Dual sin(const Dual& a) { return detail::unary(a, std::sin(a.v), std::cos(a.v)); }
inline Dual cos(const Dual& a) { return detail::unary(a, std::cos(a.v), -std::sin(a.v)); }
inline Dual exp(const Dual& a) { return detail::unary(a, std::exp(a.v), std::exp(a.v)); }
inline Dual log(const Dual& a) { return detail::unary(a, std::log(a.v), 1.0 / a.v); }
inline Dual sqrt(const Dual& a) { return detail::unary(a, std::sqrt(a.v), 0.5 / std::sqrt(a.v)); }
inline Dual tanh(const Dual& a) {
  const double t = std::tanh(a.v);
  return detail::unary(a, t, 1.0 - t * t);
}

/// Exact gradient of `loss` at `params`. `loss` must be callable with a
/// std::span<const Dual> and return a Dual.
template <class F>
ParamGradient param_grad(F&& loss, std::span<const double> params) {
  std::vector<Dual> seeded(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::vector<double> e(params.size(), 0.0);
    e[i] = 1.0;
    seeded[i] = Dual(params[i], std::move(e));
  }
  const Dual out = loss(std::span<const Dual>(seeded));
  if (!std::isfinite(out.v)) throw NonFiniteError("param_grad: loss is not finite");
  ParamGradient g(params.size(), 0.0);
  for (std::size_t i = 0; i < out.d.size() && i < g.size(); ++i) {
    if (!std::isfinite(out.d[i])) {
      throw NonFiniteError("param_grad: non-finite gradient component", static_cast<std::ptrdiff_t>(i));
    }
    g[i] = out.d[i];
  }
  return g;
}

/// Central finite-difference gradient; the oracle for every exact gradient.
inline ParamGradient fd_gradient(const std::function<double(std::span<const double>)>& loss,
                                 std::span<const double> params, double h = 1e-5) {
  std::vector<double> p(params.begin(), params.end());
  ParamGradient g(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double keep = p[i];
    p[i] = keep + h;
    const double fp = loss(p);
    p[i] = keep - h;
    const double fm = loss(p);
    p[i] = keep;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

struct GradientCheck {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
};

/// Compare an exact gradient with a finite-difference one over components
/// whose magnitude exceeds `floor`.
inline GradientCheck compare_gradients(std::span<const double> exact, std::span<const double> fd,
                                       double floor = 1e-6) {
  GradientCheck c;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    const double scale = std::max(std::abs(exact[i]), std::abs(fd[i]));
    if (scale <= floor) continue;
    ++c.checked;
    const double rel = std::abs(exact[i] - fd[i]) / scale;
    if (rel > c.max_rel_error) {
      c.max_rel_error = rel;
      c.worst_index = i;
    }
  }
  return c;
}

}  // namespace harmonia
