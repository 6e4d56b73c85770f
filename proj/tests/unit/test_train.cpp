#include <cmath>

#include "doctest.h"
#include "harmonia/losses.hpp"
#include "harmonia/rng.hpp"
#include "harmonia/scenario.hpp"
#include "harmonia/train.hpp"

using namespace harmonia;

TEST_CASE("adam first step moves each parameter by lr against the gradient sign") {
  TrainConfig cfg;
  cfg.lr = 0.1;
  std::vector<double> p{1.0, -2.0, 0.5};
  const std::vector<double> g{3.0, -0.01, 0.0};
  AdamState st;
  adam_step(p, g, st, 1, cfg);
  // m_hat = g and v_hat = g^2 after bias correction.
  CHECK(p[0] == doctest::Approx(1.0 - 0.1 * 3.0 / (3.0 + 1e-8)));
  CHECK(p[1] == doctest::Approx(-2.0 + 0.1 * 0.01 / (0.01 + 1e-8)));
  CHECK(p[2] == 0.5);

  // Second step by hand.
  const std::vector<double> g2{1.0, 1.0, 1.0};
  const double m = 0.9 * 0.1 * 3.0 + 0.1 * 1.0;
  const double v = 0.999 * 0.001 * 9.0 + 0.001 * 1.0;
  const double mh = m / (1 - 0.81), vh = v / (1 - 0.999 * 0.999);
  const double expect = p[0] - 0.1 * mh / (std::sqrt(vh) + 1e-8);
  adam_step(p, g2, st, 2, cfg);
  CHECK(p[0] == doctest::Approx(expect).epsilon(1e-12));

  CHECK_THROWS_AS(adam_step(p, g2, st, 0, cfg), Error);
  const std::vector<double> bad{1.0, NAN, 0.0};
  CHECK_THROWS_AS(adam_step(p, bad, st, 3, cfg), NonFiniteError);
}

TEST_CASE("training configuration is validated") {
  TrainConfig cfg;
  cfg.epochs = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.epochs = 10;
  cfg.lr = -1;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("adam minimises a quadratic and traces the loss") {
  const Objective quad = [](std::span<const double> p, std::vector<double>& g) {
    g.assign(p.size(), 0.0);
    double l = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double d = p[i] - static_cast<double>(i);
      l += d * d;
      g[i] = 2 * d;
    }
    return l;
  };
  TrainConfig cfg;
  cfg.epochs = 3000;
  cfg.lr = 0.05;
  cfg.trace_limit = 50;
  const TrainReport r = train({5.0, 5.0, 5.0}, quad, cfg);
  CHECK(r.final_loss < 1e-8);
  CHECK(r.trace.size() <= 50);
  CHECK(r.trace.front().epoch == 0);
  CHECK(r.trace.front().loss == r.initial_loss);
  CHECK(r.trace.back().loss == r.final_loss);
  CHECK(r.epochs_run == 3000);
}

TEST_CASE("a non-finite loss raises a divergence error carrying the partial trace") {
  const Objective blow = [](std::span<const double> p, std::vector<double>& g) {
    g.assign(p.size(), 1.0);
    return p[0] < 0.995 ? NAN : p[0];
  };
  TrainConfig cfg;
  cfg.epochs = 100;
  cfg.lr = 0.001;
  try {
    train({1.0}, blow, cfg);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.index() > 0);
    CHECK(!e.partial().trace.empty());
  }
}

TEST_CASE("holomorphic training on the heated box is deterministic and fits the boundary") {
  const Scenario s = make_scenario("heat_box");
  ModelOptions o;
  o.boundary_points = 25;
  Model<2> m = build_model<2>(s, Method::holomorphic, o);
  LossEvaluator<2> loss(*m.net, m.plan, m.terms, m.field_mode);
  const Objective obj = [&](std::span<const double> p, std::vector<double>& g) { return loss.evaluate(p, &g).total; };
  TrainConfig cfg;
  cfg.epochs = 2000;
  cfg.lr = 1e-3;
  Rng r1(0), r2(0);
  const TrainReport a = train(m.net->init(r1), obj, cfg);
  const TrainReport b = train(m.net->init(r2), obj, cfg);
  CHECK(a.params == b.params);
  CHECK(a.final_loss == b.final_loss);
  CHECK(a.final_loss * 10 <= a.initial_loss);
}
