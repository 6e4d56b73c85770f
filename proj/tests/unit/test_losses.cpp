#include <cmath>

#include "doctest.h"
#include "harmonia/checks.hpp"
#include "harmonia/losses.hpp"
#include "harmonia/rng.hpp"
#include "harmonia/scenario.hpp"

using namespace harmonia;

namespace {

MlpSpec small(Activation a) {
  MlpSpec s;
  s.width = 8;
  s.activation = a;
  return s;
}

PiecewiseNet<2> two_layer_net(bool curl) {
  std::vector<std::unique_ptr<Unit<2>>> units;
  for (int k = 0; k < 2; ++k) {
    if (curl) {
      units.push_back(std::make_unique<CurlUnit<2>>(small(Activation::tanh), small(Activation::tanh), InputMap{}));
    } else {
      units.push_back(std::make_unique<RealUnit<2>>(small(Activation::tanh), InputMap{}));
    }
  }
  return PiecewiseNet<2>(std::move(units), {Domain::rect({0, 0, 1, 0.5}), Domain::rect({0, 0.5, 1, 1})},
                         Domain::rect({0, 0, 1, 1}));
}

UnitOutput<2> unit_eval(const PiecewiseNet<2>& net, std::span<const double> p, int u, const Point<2>& x) {
  auto ws = net.unit(static_cast<std::size_t>(u)).workspace();
  return net.unit(static_cast<std::size_t>(u)).eval(net.slice(p, static_cast<std::size_t>(u)), x, 2, *ws);
}

}  // namespace

TEST_CASE("method compatibility follows the problem traits") {
  ProblemTraits plain;
  CHECK(method_terms(Method::pinn, plain) == std::vector<std::string>{"dirichlet", "laplacian"});
  CHECK(method_terms(Method::holomorphic, plain) == std::vector<std::string>{"dirichlet"});
  CHECK(method_terms(Method::curlnet, plain) == std::vector<std::string>{"dirichlet", "curl_match"});
  CHECK_THROWS_AS(method_terms(Method::multiholomorphic, plain), IncompatibleError);
  CHECK_THROWS_AS(method_terms(Method::xpinn, plain), IncompatibleError);
  ProblemTraits cube;
  cube.dim = 3;
  CHECK_THROWS_AS(check_compatible(Method::holomorphic, cube), IncompatibleError);
  CHECK_THROWS_AS(check_compatible(Method::qholomorphic, cube), IncompatibleError);
  ProblemTraits walls;
  walls.insulated = true;
  CHECK(method_terms(Method::holomorphic, walls).back() == "neumann");
  ProblemTraits layers;
  layers.dielectric = true;
  CHECK(method_terms(Method::pinn, layers).back() == "dielectric");
  CHECK(parse_method("curlnet") == Method::curlnet);
  CHECK_THROWS_AS(parse_method("fem"), Error);
}

TEST_CASE("term values match direct evaluation") {
  const PiecewiseNet<2> net = two_layer_net(false);
  Rng rng(1);
  const auto p = net.init(rng);
  auto ws = net.workspace();

  const std::vector<DirichletSample<2>> d{{{0.2, 0.0}, 1.0}, {{0.7, 1.0}, -0.5}};
  double ref = 0.0;
  for (const auto& s : d) ref += std::pow(net.eval(p, s.x, 0, ws).phi.v - s.value, 2);
  CHECK(dirichlet_loss<2>(net, p, d) == doctest::Approx(ref / 2).epsilon(1e-13));

  const std::vector<CollocationSample<2>> c{{{0.3, 0.2}, 0}, {{0.6, 0.8}, 1}};
  ref = 0.0;
  for (const auto& s : c) ref += std::pow(unit_eval(net, p, s.region, s.x).phi.laplacian(), 2);
  CHECK(laplacian_loss<2>(net, p, c) == doctest::Approx(ref / 2).epsilon(1e-13));

  const std::vector<PairSample<2>> pair{{{0.4, 0.5}, 0, 1, {0.0, 1.0}}};
  const auto a = unit_eval(net, p, 0, pair[0].x);
  const auto b = unit_eval(net, p, 1, pair[0].x);
  const double dv = a.phi.v - b.phi.v;
  const double dgx = a.phi.g[0] - b.phi.g[0], dgy = a.phi.g[1] - b.phi.g[1];
  CHECK(interface_loss<2>(net, p, pair) == doctest::Approx(dv * dv + dgx * dgx + dgy * dgy).epsilon(1e-13));
  const double flux = 1.0 * a.phi.g[1] - 0.01 * b.phi.g[1];
  CHECK(dielectric_loss<2>(net, p, pair, 1.0, 0.01, FieldMode::gradient) ==
        doctest::Approx(dv * dv + flux * flux).epsilon(1e-13));
  CHECK_THROWS_AS(dielectric_loss<2>(net, p, pair, 0.0, 1.0, FieldMode::gradient), Error);

  const std::vector<WallSample<2>> wall{{{1.0, 0.3}, {1.0, 0.0}}};
  const double gn = net.eval(p, wall[0].x, 1, ws).phi.g[0];
  CHECK(neumann_loss<2>(net, p, wall) == doctest::Approx(gn * gn).epsilon(1e-13));
}

TEST_CASE("curl match compares grad phi with the curl field") {
  const PiecewiseNet<2> net = two_layer_net(true);
  Rng rng(2);
  const auto p = net.init(rng);
  const std::vector<CollocationSample<2>> c{{{0.3, 0.2}, 0}};
  const auto o = unit_eval(net, p, 0, c[0].x);
  const double ex = o.phi.g[0] - o.field[0], ey = o.phi.g[1] - o.field[1];
  CHECK(curl_match_loss<2>(net, p, c) == doctest::Approx(ex * ex + ey * ey).epsilon(1e-13));
}

TEST_CASE("holomorphic nets have a vanishing Laplacian loss") {
  const Scenario s = make_scenario("heat_box");
  ModelOptions o;
  o.collocation = 64;
  Model<2> m = build_model<2>(s, Method::holomorphic, o);
  Rng rng(3);
  const auto p = m.net->init(rng);
  const auto pts = sample_interior(s.domain, 64, 9);
  std::vector<CollocationSample<2>> c;
  for (const auto& x : pts) c.push_back({to_point<2>(x), 0});
  CHECK(laplacian_loss<2>(*m.net, p, c) < 1e-20);
}

TEST_CASE("every loss gradient matches central differences on width-8 networks") {
  const CheckResult r = check_loss_gradients(8, 17);
  INFO(r.detail);
  CHECK(r.passed);
  CHECK(r.value < 1e-4);
}

TEST_CASE("loss evaluator bundles weighted terms") {
  const Scenario s = make_scenario("heater");
  ModelOptions o;
  o.real_spec.width = 8;
  o.complex_spec.width = 8;
  o.boundary_points = 5;
  o.interface_points = 5;
  Model<2> m = build_model<2>(s, Method::multiholomorphic, o);
  LossEvaluator<2> L(*m.net, m.plan, m.terms);
  Rng rng(4);
  const auto p = m.net->init(rng);
  const LossBundle b = L.evaluate(p);
  CHECK(b.has("interface"));
  CHECK(b.total == doctest::Approx(b.value("dirichlet") + b.value("interface")));
  L.set_weight("interface", 2.0);
  CHECK(L.evaluate(p).total == doctest::Approx(b.value("dirichlet") + 2 * b.value("interface")));
  CHECK_THROWS_AS(L.set_weight("laplacian", 1.0), Error);
}

TEST_CASE("loss and gradient do not depend on buffer addresses") {
  const Scenario s = make_scenario("heat_box");
  ModelOptions o;
  o.boundary_points = 25;
  for (Method m : {Method::pinn, Method::holomorphic, Method::curlnet}) {
    Model<2> model = build_model<2>(s, m, o);
    LossEvaluator<2> L(*model.net, model.plan, model.terms, model.field_mode);
    Rng rng(6);
    const auto p = model.net->init(rng);
    std::vector<double> g0, g1;
    const double v0 = L.evaluate(p, &g0).total;
    // Same values one double further into a fresh allocation.
    std::vector<double> shifted(p.size() + 1, 0.0);
    std::copy(p.begin(), p.end(), shifted.begin() + 1);
    const std::span<const double> q(shifted.data() + 1, p.size());
    const double v1 = L.evaluate(q, &g1).total;
    INFO(to_string(m));
    CHECK(v0 == v1);
    CHECK(g0 == g1);
  }
}
