#include "harmonia/checks.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "harmonia/diffcore.hpp"
#include "harmonia/error.hpp"
#include "harmonia/losses.hpp"
#include "harmonia/oracle.hpp"
#include "harmonia/qsim.hpp"
#include "harmonia/rng.hpp"
#include "harmonia/scenario.hpp"
#include "harmonia/train.hpp"

namespace harmonia {

namespace {

CheckResult verdict(std::string name, double value, double limit, std::string detail = {}) {
  CheckResult r;
  r.name = std::move(name);
  r.value = value;
  r.limit = limit;
  r.passed = std::isfinite(value) && value < limit;
  r.detail = std::move(detail);
  return r;
}

std::vector<Pt> random_square(Rng& rng, int n) {
  std::vector<Pt> p(static_cast<std::size_t>(n));
  for (auto& x : p) x = {rng.uniform(), rng.uniform(), 0.0};
  return p;
}

double max_abs_laplacian(const PiecewiseNet<2>& net, std::span<const double> params, std::span<const Pt> pts) {
  double worst = 0.0;
  for (const auto& j : field_jets<2>(net, params, pts, 2)) worst = std::max(worst, std::abs(j.laplacian()));
  return worst;
}

std::vector<double> random_angles(Rng& rng, std::size_t n) {
  const double two_pi = 2.0 * std::acos(-1.0);
  std::vector<double> a(n);
  for (auto& v : a) v = rng.uniform(0.0, two_pi);
  return a;
}

template <int D>
double divergence_worst(Rng& rng, int nets, int points) {
  MlpSpec spec;
  spec.input_dim = D;
  spec.output_dim = curl_components(D);
  spec.activation = Activation::tanh;
  const Mlp<D, double> a(spec);
  typename Mlp<D, double>::Tape tape;
  double worst = 0.0;
  for (int k = 0; k < nets; ++k) {
    const std::vector<double> p = a.init(rng);
    for (int i = 0; i < points; ++i) {
      Point<D> x{};
      for (auto& c : x) c = rng.uniform();
      const auto in = lift<D>(x);
      a.forward(p, in, 2, tape);
      std::vector<Jet<D>> comps;
      for (int c = 0; c < spec.output_dim; ++c) comps.push_back(a.output(tape, c));
      worst = std::max(worst, std::abs(curl_divergence<D>(comps)));
    }
  }
  return worst;
}

template <int D>
void gradient_worst(const Scenario& s, Method m, const ModelOptions& opts, std::uint64_t seed, double& worst,
                    std::string& where, std::size_t& checked) {
  Model<D> model = build_model<D>(s, m, opts);
  Rng rng(seed);
  const std::vector<double> params = model.net->init(rng);
  for (const auto& term : model.terms) {
    LossEvaluator<D> loss(*model.net, model.plan, {term}, model.field_mode);
    std::vector<double> exact;
    loss.evaluate(params, &exact);
    const auto fd = fd_gradient([&](std::span<const double> p) { return loss.total(p); }, params, 1e-5);
    const GradientCheck c = compare_gradients(exact, fd, 1e-6);
    checked += c.checked;
    if (c.max_rel_error > worst) {
      worst = c.max_rel_error;
      where = s.id + "/" + to_string(m) + "/" + term;
    }
  }
}

}  // namespace

CheckResult check_holomorphic_harmonicity(int nets, int points, int fit_epochs, std::uint64_t seed) {
  Scenario s = make_scenario("heat_box");
  ModelOptions opts;
  opts.boundary_points = 25;
  Model<2> model = build_model<2>(s, Method::holomorphic, opts);
  LossEvaluator<2> loss(*model.net, model.plan, model.terms);
  Rng rng(seed);
  const std::vector<Pt> pts = random_square(rng, points);
  double before = 0.0, after = 0.0;
  for (int k = 0; k < nets; ++k) {
    std::vector<double> p = model.net->init(rng);
    before = std::max(before, max_abs_laplacian(*model.net, p, pts));
    if (fit_epochs > 0) {
      TrainConfig tc;
      tc.epochs = fit_epochs;
      tc.seed = seed + static_cast<std::uint64_t>(k);
      const auto rep = train(
          p, [&](std::span<const double> q, std::vector<double>& g) { return loss.evaluate(q, &g).total; }, tc);
      after = std::max(after, max_abs_laplacian(*model.net, rep.params, pts));
    }
  }
  std::ostringstream d;
  d << nets << " nets, " << points << " points; before fit " << before << ", after " << fit_epochs
    << "-epoch fit " << after;
  return verdict("holomorphic harmonicity", std::max(before, after), 1e-8, d.str());
}

CheckResult check_quantum_harmonicity(int settings, int points, std::uint64_t seed) {
  const QHoloConfig cfg;
  const std::size_t n = VarBlock{cfg.qubits, cfg.depth}.angle_count();
  Rng rng(seed);
  double worst = 0.0;
  for (int k = 0; k < settings; ++k) {
    const auto t1 = random_angles(rng, n);
    const auto t2 = random_angles(rng, n);
    for (const Pt& x : random_square(rng, points)) {
      worst = std::max(worst, std::abs(qholo_derivatives(t1, t2, x[0], x[1], cfg).laplacian));
    }
  }
  return verdict("quantum harmonicity", worst, 1e-8,
                 std::to_string(settings) + " angle settings, " + std::to_string(points) + " points");
}

CheckResult check_quantum_spectral(int settings, int points, std::uint64_t seed) {
  const QHoloConfig cfg;
  const std::size_t n = VarBlock{cfg.qubits, cfg.depth}.angle_count();
  Rng rng(seed);
  double worst = 0.0;
  for (int k = 0; k < settings; ++k) {
    const auto t1 = random_angles(rng, n);
    const auto t2 = random_angles(rng, n);
    const QHoloSpectrum spec = qholo_spectrum(t1, t2, cfg);
    for (const Pt& x : random_square(rng, points)) {
      worst = std::max(worst, std::abs(spec.eval(x[0], x[1]) - qholo_eval(t1, t2, x[0], x[1], cfg)));
    }
  }
  return verdict("quantum spectral agreement", worst, 1e-10,
                 std::to_string(settings) + " angle settings, " + std::to_string(points) + " points");
}

CheckResult check_divergence_free(int nets, int points, std::uint64_t seed) {
  Rng rng(seed);
  const double d2 = divergence_worst<2>(rng, nets, points);
  const double d3 = divergence_worst<3>(rng, nets, points);
  const double d4 = divergence_worst<4>(rng, nets, points);
  std::ostringstream d;
  d << "N=2 " << d2 << ", N=3 " << d3 << ", N=4 " << d4;
  return verdict("divergence-free curl", std::max({d2, d3, d4}), 1e-8, d.str());
}

CheckResult check_loss_gradients(int width, std::uint64_t seed) {
  ModelOptions opts;
  opts.real_spec.width = width;
  opts.complex_spec.width = width;
  opts.boundary_points = 6;
  opts.face_points = 3;
  opts.collocation = 12;
  opts.interface_points = 6;
  double worst = 0.0;
  std::string where;
  std::size_t checked = 0;
  int pairs = 0;
  for (const auto& id : scenario_ids()) {
    const Scenario s = make_scenario(id);
    for (Method m : all_methods()) {
      if (m == Method::qholomorphic) continue;  // angle gradients are finite differences by construction
      try {
        check_compatible(m, s.traits());
      } catch (const IncompatibleError&) {
        continue;
      }
      ++pairs;
      if (s.dim == 3) {
        gradient_worst<3>(s, m, opts, seed, worst, where, checked);
      } else {
        gradient_worst<2>(s, m, opts, seed, worst, where, checked);
      }
    }
  }
  std::ostringstream d;
  d << pairs << " scenario/method pairs, " << checked << " components; worst at " << (where.empty() ? "-" : where);
  return verdict("loss gradients", worst, 1e-4, d.str());
}

CheckResult check_fd_exactness() {
  const Domain sq = Domain::rect({0, 0, 1, 1});
  const std::vector<BoundarySegment> constant = {
      BoundarySegment::segment({0, 0, 0}, {1, 0, 0}, 0.7), BoundarySegment::segment({1, 0, 0}, {1, 1, 0}, 0.7),
      BoundarySegment::segment({1, 1, 0}, {0, 1, 0}, 0.7), BoundarySegment::segment({0, 1, 0}, {0, 0, 0}, 0.7)};
  SorOptions o;
  o.omega = optimal_omega(32);
  o.tol = 1e-12;
  const FieldGrid c = fd_laplace_solve(sq, constant, 1.0 / 32, o);
  double worst = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c.mask[i]) worst = std::max(worst, std::abs(c.values[i] - 0.7));
  }
  return verdict("fd constant boundary", worst, 1e-9);
}

CheckResult check_analytic_series() {
  double worst = 0.0;
  for (int i = 0; i <= 18; ++i) {
    for (int j = 1; j < 20; ++j) {
      const double x = 0.1 + 0.05 * i;
      const double y = 0.05 * j;
      worst = std::max(worst, std::abs(analytic_box_series(x, y, 16) - analytic_box(x, y)));
    }
  }
  return verdict("analytic series", worst, 5e-3, "16 terms, x >= 0.1");
}

std::vector<CheckResult> run_checks() {
  return {
      check_holomorphic_harmonicity(5, 200, 100),
      check_quantum_harmonicity(5, 50),
      check_quantum_spectral(5, 50),
      check_divergence_free(2, 50),
      check_loss_gradients(),
      check_fd_exactness(),
      check_analytic_series(),
  };
}

}  // namespace harmonia
