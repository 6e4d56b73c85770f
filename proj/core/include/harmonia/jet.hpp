#pragma once

// Second-order forward-mode jets over a small spatial dimension.
//
// A Jet<D> carries a scalar together with its exact gradient and Hessian with
// respect to D spatial inputs. Every operation applies the first- and
// second-order chain rules, so the Hessian of any composition is exact up to
// floating-point roundoff. Hessians are stored as full D x D row-major arrays
// and every operation below is written so that h[i][j] and h[j][i] are
// produced by the same sequence of floating-point operations; symmetry is
// therefore bitwise.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "harmonia/error.hpp"

namespace harmonia {

template <class T>
struct is_complex : std::false_type {};
template <class T>
struct is_complex<std::complex<T>> : std::true_type {};
template <class T>
inline constexpr bool is_complex_v = is_complex<T>::value;

template <class T>
constexpr T conj_if(const T& x) {
  if constexpr (is_complex_v<T>) {
    return std::conj(x);
  } else {
    return x;
  }
}

inline bool is_finite_scalar(double x) { return std::isfinite(x); }
inline bool is_finite_scalar(const std::complex<double>& x) {
  return std::isfinite(x.real()) && std::isfinite(x.imag());
}

template <int D>
using Point = std::array<double, D>;

/// Throws unless d is a supported spatial dimension.
inline void validate_dimension(int d) {
  if (d < 2 || d > 4) {
    throw Error("spatial dimension must be 2, 3 or 4, got " + std::to_string(d));
  }
}

template <int D, class T = double>
struct Jet {
  static_assert(D >= 1 && D <= 4, "jets support at most four spatial inputs");
  static constexpr int dim = D;

  T v{};
  std::array<T, D> g{};
  std::array<T, D * D> h{};

  static Jet constant(T c) {
    Jet r;
    r.v = c;
    return r;
  }

  /// The i-th coordinate function: value x, gradient e_i, zero Hessian.
  static Jet variable(T x, int i) {
    Jet r;
    r.v = x;
    r.g[static_cast<std::size_t>(i)] = T(1);
    return r;
  }

  T& hess(int i, int j) { return h[static_cast<std::size_t>(i * D + j)]; }
  const T& hess(int i, int j) const { return h[static_cast<std::size_t>(i * D + j)]; }

  T laplacian() const {
    T s{};
    for (int i = 0; i < D; ++i) s += hess(i, i);
    return s;
  }

  bool finite() const {
    if (!is_finite_scalar(v)) return false;
    for (const auto& x : g)
      if (!is_finite_scalar(x)) return false;
    for (const auto& x : h)
      if (!is_finite_scalar(x)) return false;
    return true;
  }
};

/// Seed each coordinate of `point` as an independent variable.
template <int D>
std::array<Jet<D>, D> lift(const Point<D>& point) {
  std::array<Jet<D>, D> out;
  for (int i = 0; i < D; ++i) out[static_cast<std::size_t>(i)] = Jet<D>::variable(point[static_cast<std::size_t>(i)], i);
  return out;
}

template <int D>
std::array<Jet<D>, D> lift(std::span<const double> point) {
  validate_dimension(D);
  if (point.size() != static_cast<std::size_t>(D)) {
    throw Error("lift: point has " + std::to_string(point.size()) + " coordinates, expected " +
                std::to_string(D));
  }
  Point<D> p;
  for (int i = 0; i < D; ++i) p[static_cast<std::size_t>(i)] = point[static_cast<std::size_t>(i)];
  return lift<D>(p);
}

// ---------------------------------------------------------------------------
// Arithmetic
// ---------------------------------------------------------------------------

template <int D, class T>
Jet<D, T> operator+(const Jet<D, T>& a, const Jet<D, T>& b) {
  Jet<D, T> r;
  r.v = a.v + b.v;
  for (std::size_t i = 0; i < a.g.size(); ++i) r.g[i] = a.g[i] + b.g[i];
  for (std::size_t i = 0; i < a.h.size(); ++i) r.h[i] = a.h[i] + b.h[i];
  return r;
}

template <int D, class T>
Jet<D, T> operator-(const Jet<D, T>& a, const Jet<D, T>& b) {
  Jet<D, T> r;
  r.v = a.v - b.v;
  for (std::size_t i = 0; i < a.g.size(); ++i) r.g[i] = a.g[i] - b.g[i];
  for (std::size_t i = 0; i < a.h.size(); ++i) r.h[i] = a.h[i] - b.h[i];
  return r;
}

template <int D, class T>
Jet<D, T> operator-(const Jet<D, T>& a) {
  Jet<D, T> r;
  r.v = -a.v;
  for (std::size_t i = 0; i < a.g.size(); ++i) r.g[i] = -a.g[i];
  for (std::size_t i = 0; i < a.h.size(); ++i) r.h[i] = -a.h[i];
  return r;
}

template <int D, class T>
Jet<D, T> operator*(const Jet<D, T>& a, const Jet<D, T>& b) {
  Jet<D, T> r;
  r.v = a.v * b.v;
  for (int i = 0; i < D; ++i) r.g[i] = a.v * b.g[i] + b.v * a.g[i];
  for (int i = 0; i < D; ++i) {
    for (int j = 0; j < D; ++j) {
      r.hess(i, j) = a.v * b.hess(i, j) + b.v * a.hess(i, j) + (a.g[i] * b.g[j] + b.g[i] * a.g[j]);
    }
  }
  return r;
}

template <int D, class T>
Jet<D, T> operator*(const Jet<D, T>& a, T s) {
  Jet<D, T> r;
  r.v = a.v * s;
  for (std::size_t i = 0; i < a.g.size(); ++i) r.g[i] = a.g[i] * s;
  for (std::size_t i = 0; i < a.h.size(); ++i) r.h[i] = a.h[i] * s;
  return r;
}

template <int D, class T>
Jet<D, T> operator*(T s, const Jet<D, T>& a) {
  return a * s;
}

template <int D, class T>
Jet<D, T> operator+(const Jet<D, T>& a, T s) {
  Jet<D, T> r = a;
  r.v += s;
  return r;
}

template <int D, class T>
Jet<D, T> operator+(T s, const Jet<D, T>& a) {
  return a + s;
}

template <int D, class T>
Jet<D, T> operator-(const Jet<D, T>& a, T s) {
  Jet<D, T> r = a;
  r.v -= s;
  return r;
}

template <int D, class T>
Jet<D, T> operator-(T s, const Jet<D, T>& a) {
  return -a + s;
}

/// Apply a scalar function given its value and first two derivatives at a.v.
template <int D, class T>
Jet<D, T> chain(const Jet<D, T>& a, T f0, T f1, T f2) {
  Jet<D, T> r;
  r.v = f0;
  for (int i = 0; i < D; ++i) r.g[i] = f1 * a.g[i];
  for (int i = 0; i < D; ++i) {
    for (int j = 0; j < D; ++j) {
      r.hess(i, j) = f2 * (a.g[i] * a.g[j]) + f1 * a.hess(i, j);
    }
  }
  return r;
}

template <int D, class T>
Jet<D, T> reciprocal(const Jet<D, T>& a) {
  const T inv = T(1) / a.v;
  return chain(a, inv, -inv * inv, T(2) * inv * inv * inv);
}

template <int D, class T>
Jet<D, T> operator/(const Jet<D, T>& a, const Jet<D, T>& b) {
  return a * reciprocal(b);
}

template <int D, class T>
Jet<D, T> operator/(const Jet<D, T>& a, T s) {
  return a * (T(1) / s);
}

template <int D, class T>
Jet<D, T> sin(const Jet<D, T>& a) {
  using std::cos;
  using std::sin;
  const T s = sin(a.v);
  return chain(a, s, cos(a.v), -s);
}

template <int D, class T>
Jet<D, T> cos(const Jet<D, T>& a) {
  using std::cos;
  using std::sin;
  const T c = cos(a.v);
  return chain(a, c, -sin(a.v), -c);
}

template <int D, class T>
Jet<D, T> tanh(const Jet<D, T>& a) {
  using std::tanh;
  const T t = tanh(a.v);
  const T d1 = T(1) - t * t;
  return chain(a, t, d1, T(-2) * t * d1);
}

template <int D, class T>
Jet<D, T> exp(const Jet<D, T>& a) {
  using std::exp;
  const T e = exp(a.v);
  return chain(a, e, e, e);
}

template <int D, class T>
Jet<D, T> log(const Jet<D, T>& a) {
  using std::log;
  const T inv = T(1) / a.v;
  return chain(a, log(a.v), inv, -inv * inv);
}

template <int D, class T>
Jet<D, T> sqrt(const Jet<D, T>& a) {
  using std::sqrt;
  const T s = sqrt(a.v);
  const T d1 = T(0.5) / s;
  return chain(a, s, d1, -d1 / (T(2) * a.v));
}

template <int D, class T>
Jet<D, T> square(const Jet<D, T>& a) {
  return chain(a, a.v * a.v, T(2) * a.v, T(2));
}

/// sum_i w[i] * x[i] + b
template <int D, class T>
Jet<D, T> affine(std::span<const T> w, std::span<const Jet<D, T>> x, T b) {
  Jet<D, T> r = Jet<D, T>::constant(b);
  for (std::size_t k = 0; k < x.size(); ++k) {
    r.v += w[k] * x[k].v;
    for (int i = 0; i < D; ++i) r.g[i] += w[k] * x[k].g[i];
    for (int i = 0; i < D * D; ++i) r.h[i] += w[k] * x[k].h[i];
  }
  return r;
}

// ---------------------------------------------------------------------------
// Checked runtime dispatch
// ---------------------------------------------------------------------------

enum class JetOp { add, sub, mul, div, sin, cos, tanh, exp, affine };

/// Runtime-dispatched elementary operation with argument and result checks.
/// `coeffs` is used only by `affine`: weights for each argument followed by
/// the bias.
template <int D>
Jet<D> jet_apply(JetOp op, std::span<const Jet<D>> args, std::span<const double> coeffs = {}) {
  for (const auto& a : args) {
    if (!a.finite()) throw NonFiniteError("jet_apply: non-finite argument");
  }
  auto need = [&](std::size_t n) {
    if (args.size() != n) throw Error("jet_apply: wrong argument count");
  };
  Jet<D> r;
  switch (op) {
    case JetOp::add: need(2); r = args[0] + args[1]; break;
    case JetOp::sub: need(2); r = args[0] - args[1]; break;
    case JetOp::mul: need(2); r = args[0] * args[1]; break;
    case JetOp::div:
      need(2);
      if (args[1].v == 0.0) throw Error("jet_apply: division by a jet with zero value");
      r = args[0] / args[1];
      break;
    case JetOp::sin: need(1); r = sin(args[0]); break;
    case JetOp::cos: need(1); r = cos(args[0]); break;
    case JetOp::tanh: need(1); r = tanh(args[0]); break;
    case JetOp::exp: need(1); r = exp(args[0]); break;
    case JetOp::affine:
      if (coeffs.size() != args.size() + 1) throw Error("jet_apply: affine needs one weight per argument plus a bias");
      r = affine<D, double>(coeffs.first(args.size()), args, coeffs.back());
      break;
  }
  if (!r.finite()) throw NonFiniteError("jet_apply: result overflowed");
  return r;
}

/// Laplacian of a scalar field at x: the trace of the jet Hessian.
/// `f` receives the lifted coordinates and returns a Jet<D>.
template <int D, class F>
double laplacian(F&& f, const Point<D>& x) {
  const auto xs = lift<D>(x);
  const Jet<D> r = f(xs);
  if (!r.finite()) throw NonFiniteError("laplacian: field is not finite at the query point");
  return r.laplacian();
}

}  // namespace harmonia
