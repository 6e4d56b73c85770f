#include <cmath>
#include <complex>

#include "doctest.h"
#include "fd_oracle.hpp"
#include "harmonia/diffcore.hpp"
#include "harmonia/jet.hpp"
#include "harmonia/mlp.hpp"
#include "harmonia/nets.hpp"
#include "harmonia/rng.hpp"

using namespace harmonia;

namespace {

// Each op with a plain-double twin used by the finite-difference oracle.
struct OpCase {
  const char* name;
  std::function<Jet<2>(const Jet<2>&, const Jet<2>&)> jet;
  std::function<double(double, double)> plain;
};

std::vector<OpCase> op_cases() {
  return {
      {"add", [](auto& a, auto& b) { return a + b; }, [](double a, double b) { return a + b; }},
      {"sub", [](auto& a, auto& b) { return a - b; }, [](double a, double b) { return a - b; }},
      {"mul", [](auto& a, auto& b) { return a * b; }, [](double a, double b) { return a * b; }},
      {"div", [](auto& a, auto& b) { return a / (b * b + 1.0); }, [](double a, double b) { return a / (b * b + 1); }},
      {"sin", [](auto& a, auto& b) { return sin(a * b); }, [](double a, double b) { return std::sin(a * b); }},
      {"cos", [](auto& a, auto& b) { return cos(a - b); }, [](double a, double b) { return std::cos(a - b); }},
      {"tanh", [](auto& a, auto& b) { return tanh(a + 2.0 * b); }, [](double a, double b) { return std::tanh(a + 2 * b); }},
      {"exp", [](auto& a, auto& b) { return exp(a * 0.5 - b); }, [](double a, double b) { return std::exp(a * 0.5 - b); }},
  };
}

}  // namespace

TEST_CASE("lift seeds coordinate derivatives") {
  const auto xs = lift<2>(Point<2>{0.5, 0.5});
  CHECK(xs[0].v == 0.5);
  CHECK(xs[0].g[0] == 1.0);
  CHECK(xs[0].g[1] == 0.0);
  for (double h : xs[0].h) CHECK(h == 0.0);
  CHECK_THROWS_AS(lift<2>(std::vector<double>{1.0, 2.0, 3.0}), Error);
}

TEST_CASE("elementary jet ops match finite differences") {
  Rng rng(11);
  for (const auto& op : op_cases()) {
    double worst = 0.0;
    for (int n = 0; n < 100; ++n) {
      const Point<2> p{rng.uniform(-2, 2), rng.uniform(-2, 2)};
      const auto xs = lift<2>(p);
      const Jet<2> j = op.jet(xs[0], xs[1]);
      const std::function<double(const fd::Vec<2>&)> f = [&](const fd::Vec<2>& x) { return op.plain(x[0], x[1]); };
      const auto g = fd::gradient<2>(f, p);
      const auto H = fd::hessian<2>(f, p);
      CHECK(j.v == doctest::Approx(op.plain(p[0], p[1])).epsilon(1e-14));
      for (int i = 0; i < 2; ++i) worst = std::max(worst, fd::rel(j.g[static_cast<std::size_t>(i)], g[static_cast<std::size_t>(i)]));
      for (int i = 0; i < 4; ++i) worst = std::max(worst, fd::rel(j.h[static_cast<std::size_t>(i)], H[static_cast<std::size_t>(i)], 1.0));
    }
    INFO(op.name);
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("tanh(3x+2y) jet at (0.1, 0.2) matches finite differences") {
  const auto xs = lift<2>(Point<2>{0.1, 0.2});
  const Jet<2> j = tanh(xs[0] * 3.0 + xs[1] * 2.0);
  const std::function<double(const fd::Vec<2>&)> f = [](const fd::Vec<2>& x) { return std::tanh(3 * x[0] + 2 * x[1]); };
  const auto g = fd::gradient<2>(f, {0.1, 0.2});
  const auto H = fd::hessian<2>(f, {0.1, 0.2}, 1e-3);
  for (int i = 0; i < 2; ++i) CHECK(fd::rel(j.g[static_cast<std::size_t>(i)], g[static_cast<std::size_t>(i)]) < 1e-6);
  for (int i = 0; i < 4; ++i) CHECK(fd::rel(j.h[static_cast<std::size_t>(i)], H[static_cast<std::size_t>(i)]) < 1e-5);
}

TEST_CASE("jet_apply rejects zero division and non-finite arguments") {
  const auto xs = lift<2>(Point<2>{0.0, 1.0});
  const std::array<Jet<2>, 2> args{xs[1], xs[0]};
  CHECK_THROWS_AS(jet_apply<2>(JetOp::div, args), Error);
  Jet<2> bad = xs[0];
  bad.v = std::nan("");
  const std::array<Jet<2>, 2> nan_args{bad, xs[1]};
  CHECK_THROWS_AS(jet_apply<2>(JetOp::add, nan_args), NonFiniteError);
}

TEST_CASE("laplacian of x^2 - y^2 is zero and of x^2 + y^2 is four") {
  const Point<2> p{0.3, -0.7};
  CHECK(laplacian<2>([](const auto& x) { return x[0] * x[0] - x[1] * x[1]; }, p) == doctest::Approx(0.0));
  CHECK(laplacian<2>([](const auto& x) { return x[0] * x[0] + x[1] * x[1]; }, p) == doctest::Approx(4.0));
}

TEST_CASE("param_grad of a dual loss matches central differences") {
  const std::vector<double> theta{0.3, -1.2, 0.8};
  const auto loss = [](std::span<const Dual> t) { return sin(t[0] * t[1]) + exp(t[2]) * t[0] + tanh(t[1]); };
  const auto plain = [](std::span<const double> t) {
    return std::sin(t[0] * t[1]) + std::exp(t[2]) * t[0] + std::tanh(t[1]);
  };
  const auto g = param_grad(loss, theta);
  const auto f = fd_gradient(plain, theta);
  CHECK(compare_gradients(g, f).max_rel_error < 1e-4);
  CHECK_THROWS_AS(param_grad([](std::span<const Dual> t) { return log(t[0] - t[0]); }, theta), NonFiniteError);
}

TEST_CASE("random complex sin MLP satisfies Cauchy-Riemann") {
  MlpSpec spec;
  spec.input_dim = 1;
  spec.activation = Activation::sin;
  const Mlp<2, std::complex<double>> net(spec);
  Rng rng(5);
  for (int k = 0; k < 5; ++k) {
    const auto p = net.init(rng);
    for (int n = 0; n < 20; ++n) {
      const double x = rng.uniform(), y = rng.uniform();
      const ComplexJet f = forward_holomorphic(net, p, x, y);
      const auto [r1, r2] = cauchy_riemann_residual(f);
      CHECK(std::abs(r1) < 1e-9);
      CHECK(std::abs(r2) < 1e-9);
    }
  }
}

TEST_CASE("tanh on complex weights is rejected") {
  MlpSpec spec;
  spec.input_dim = 1;
  spec.activation = Activation::tanh;
  CHECK_THROWS_AS((Mlp<2, std::complex<double>>(spec)), Error);
}
