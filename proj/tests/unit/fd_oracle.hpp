#pragma once

// Finite-difference oracles shared by the unit suites.

#include <array>
#include <cmath>
#include <functional>

namespace fd {

template <int D>
using Vec = std::array<double, D>;

/// Central-difference gradient with step h.
template <int D>
Vec<D> gradient(const std::function<double(const Vec<D>&)>& f, Vec<D> x, double h = 1e-4) {
  Vec<D> g{};
  for (int i = 0; i < D; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const double keep = x[ui];
    x[ui] = keep + h;
    const double fp = f(x);
    x[ui] = keep - h;
    const double fm = f(x);
    x[ui] = keep;
    g[ui] = (fp - fm) / (2 * h);
  }
  return g;
}

/// Central-difference Hessian (row-major D x D) with step h.
template <int D>
std::array<double, D * D> hessian(const std::function<double(const Vec<D>&)>& f, Vec<D> x, double h = 1e-4) {
  std::array<double, D * D> H{};
  const double f0 = f(x);
  for (int i = 0; i < D; ++i) {
    for (int j = 0; j < D; ++j) {
      const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
      double v;
      if (i == j) {
        const double keep = x[ui];
        x[ui] = keep + h;
        const double fp = f(x);
        x[ui] = keep - h;
        const double fm = f(x);
        x[ui] = keep;
        v = (fp - 2 * f0 + fm) / (h * h);
      } else {
        auto at = [&](double si, double sj) {
          Vec<D> y = x;
          y[ui] += si * h;
          y[uj] += sj * h;
          return f(y);
        };
        v = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4 * h * h);
      }
      H[static_cast<std::size_t>(i * D + j)] = v;
    }
  }
  return H;
}

/// |a - b| / max(|a|, |b|, floor)
inline double rel(double a, double b, double floor = 1e-3) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace fd
