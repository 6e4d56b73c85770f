#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fd_oracle.hpp"
#include "harmonia/qsim.hpp"
#include "harmonia/rng.hpp"

using namespace harmonia;

namespace {

constexpr double pi = std::numbers::pi;

std::vector<double> random_angles(Rng& rng, std::size_t n) {
  std::vector<double> a(n);
  for (auto& v : a) v = rng.uniform(-pi, pi);
  return a;
}

}  // namespace

TEST_CASE("gates preserve the norm and the block inverse undoes the block") {
  Rng rng(1);
  StateVector s(4);
  CHECK(s[0] == cplx(1, 0));
  const VarBlock b{4, 8};
  const auto ang = random_angles(rng, b.angle_count());
  b.apply(s, ang);
  CHECK(s.norm() == doctest::Approx(1.0).epsilon(1e-13));
  b.apply_inverse(s, ang);
  CHECK(std::abs(s[0] - cplx(1, 0)) < 1e-12);
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(std::abs(s[i]) < 1e-12);
  CHECK_THROWS_AS(apply_rz(s, 4, 0.1), Error);
}

TEST_CASE("single gates act on the documented qubit bit") {
  StateVector s(2);
  apply_ry(s, 1, pi);
  CHECK(std::abs(std::abs(s[2]) - 1.0) < 1e-14);
  apply_cnot(s, 1, 0);
  CHECK(std::abs(std::abs(s[3]) - 1.0) < 1e-14);
}

TEST_CASE("standard Hamiltonian spectrum is the odd integers, highest on |0...0>") {
  const auto h = DiagonalHamiltonian::standard(4);
  REQUIRE(h.energies.size() == 16);
  for (std::size_t m = 0; m < 16; ++m) CHECK(h.energies[m] == doctest::Approx(31.0 - 2.0 * static_cast<double>(m)));
}

TEST_CASE("feature map scales amplitudes by the energy exponentials") {
  Rng rng(2);
  StateVector s(3);
  VarBlock{3, 2}.apply(s, random_angles(rng, 18));
  const StateVector before = s;
  const auto h = DiagonalHamiltonian::standard(3);
  iqfm_apply(s, 0.2, 0.3, h);
  for (std::size_t m = 0; m < s.size(); ++m) {
    const cplx f = std::exp(-cplx(0.2, 0.3) * pi * h.energies[m]);
    CHECK(std::abs(s[m] - before[m] * f) < 1e-14);
  }
}

TEST_CASE("zero angles give Re exp(-(x+iy) pi E_0)") {
  const std::vector<double> zero(3 * 4 * 8, 0.0);
  CHECK(qholo_eval(zero, zero, 0.0, 0.0) == doctest::Approx(1.0));
  CHECK(qholo_eval(zero, zero, 0.03, 0.2) == doctest::Approx(std::exp(-0.03 * 31 * pi) * std::cos(0.2 * 31 * pi)));
}

TEST_CASE("spectral form matches circuit simulation") {
  Rng rng(3);
  const QHoloConfig cfg;
  for (int k = 0; k < 5; ++k) {
    const auto t1 = random_angles(rng, 96), t2 = random_angles(rng, 96);
    const QHoloSpectrum sp = qholo_spectrum(t1, t2, cfg);
    for (int n = 0; n < 20; ++n) {
      const double x = rng.uniform(), y = rng.uniform();
      CHECK(sp.eval(x, y) == doctest::Approx(qholo_eval(t1, t2, x, y, cfg)).epsilon(1e-11).scale(1));
    }
  }
}

TEST_CASE("quantum derivatives match finite differences and the Laplacian vanishes") {
  Rng rng(4);
  const auto t1 = random_angles(rng, 96), t2 = random_angles(rng, 96);
  const std::function<double(const fd::Vec<2>&)> f = [&](const fd::Vec<2>& p) { return qholo_eval(t1, t2, p[0], p[1]); };
  for (int n = 0; n < 10; ++n) {
    const double x = rng.uniform(0.05, 1), y = rng.uniform();
    const QHoloDerivatives d = qholo_derivatives(t1, t2, x, y);
    const auto g = fd::gradient<2>(f, {x, y}, 1e-5);
    CHECK(d.value == doctest::Approx(f({x, y})).epsilon(1e-12));
    CHECK(fd::rel(d.grad[0], g[0]) < 1e-6);
    CHECK(fd::rel(d.grad[1], g[1]) < 1e-6);
    CHECK(std::abs(d.laplacian) < 1e-9);
    const Jet<2> j = qholo_spectrum(t1, t2).jet(x, y);
    CHECK(j.laplacian() == doctest::Approx(d.laplacian).scale(1));
    CHECK(j.g[0] == doctest::Approx(d.grad[0]));
  }
}

TEST_CASE("one-term expansion reduces to a single damped wave") {
  QHoloSpectrum sp;
  sp.coeffs = {cplx(0.5, -0.25)};
  sp.energies = {3.0};
  const double x = 0.1, y = 0.7;
  const double expect = std::real(cplx(0.5, -0.25) * std::exp(-cplx(x, y) * pi * 3.0));
  CHECK(sp.eval(x, y) == doctest::Approx(expect));
}

TEST_CASE("exponential fit recovers data in the span and rejects data outside it") {
  Rng rng(5);
  const auto t1 = random_angles(rng, 96), t2 = random_angles(rng, 96);
  const QHoloSpectrum sp = qholo_spectrum(t1, t2);
  std::vector<Point<2>> pts;
  std::vector<double> in_span, outside;
  for (int n = 0; n < 200; ++n) {
    const Point<2> p{rng.uniform(), rng.uniform()};
    pts.push_back(p);
    in_span.push_back(sp.eval(p[0], p[1]));
    outside.push_back(p[0] * p[0] + p[1] * p[1]);
  }
  CHECK(exponential_fit_residual(pts, in_span, sp.energies) < 1e-8);
  CHECK(exponential_fit_residual(pts, outside, sp.energies) > 1e-3);
}
