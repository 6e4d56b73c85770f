// Kernel timings: jets, one full-batch loss+gradient per method, the SOR
// oracle and the quantum net.

#include <benchmark/benchmark.h>

#include "harmonia/jet.hpp"
#include "harmonia/losses.hpp"
#include "harmonia/oracle.hpp"
#include "harmonia/qsim.hpp"
#include "harmonia/rng.hpp"
#include "harmonia/scenario.hpp"

using namespace harmonia;

namespace {

void BM_JetTanhChain(benchmark::State& state) {
  const auto xs = lift<2>(Point<2>{0.1, 0.2});
  for (auto _ : state) {
    Jet<2> j = xs[0] * 0.7 + xs[1] * 0.3;
    for (int k = 0; k < 32; ++k) j = tanh(j * 1.1 + 0.05);
    benchmark::DoNotOptimize(j);
  }
}
BENCHMARK(BM_JetTanhChain);

template <int D>
void loss_epoch(benchmark::State& state, const char* scenario, Method method) {
  const Scenario s = make_scenario(scenario);
  Model<D> m = build_model<D>(s, method);
  LossEvaluator<D> loss(*m.net, m.plan, m.terms, m.field_mode);
  Rng rng(0);
  const auto p = m.net->init(rng);
  std::vector<double> g;
  for (auto _ : state) benchmark::DoNotOptimize(loss.evaluate(p, &g).total);
  state.counters["params"] = static_cast<double>(p.size());
}

void loss_epoch_2d(benchmark::State& state, const char* scenario, Method method) {
  loss_epoch<2>(state, scenario, method);
}

void loss_epoch_3d(benchmark::State& state, const char* scenario, Method method) {
  loss_epoch<3>(state, scenario, method);
}

BENCHMARK_CAPTURE(loss_epoch_2d, electrostatics_pinn, "electrostatics", Method::pinn)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(loss_epoch_2d, electrostatics_curlnet, "electrostatics", Method::curlnet)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(loss_epoch_2d, electrostatics_holomorphic, "electrostatics", Method::holomorphic)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(loss_epoch_2d, heater_multiholomorphic, "heater", Method::multiholomorphic)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(loss_epoch_2d, heat_box_qholomorphic, "heat_box", Method::qholomorphic)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(loss_epoch_3d, pipe3d_curlnet, "pipe3d", Method::curlnet)->Unit(benchmark::kMillisecond);

void BM_SorHeatBox(benchmark::State& state) {
  const Scenario s = make_scenario("heat_box");
  const int n = static_cast<int>(state.range(0));
  SorOptions o;
  o.omega = optimal_omega(n);
  o.tol = 1e-10;
  for (auto _ : state) benchmark::DoNotOptimize(fd_laplace_solve(s.domain, s.boundary, 1.0 / n, o).values.data());
}
BENCHMARK(BM_SorHeatBox)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_QHoloCircuit(benchmark::State& state) {
  Rng rng(1);
  std::vector<double> t1(96), t2(96);
  for (auto& v : t1) v = rng.uniform(-3, 3);
  for (auto& v : t2) v = rng.uniform(-3, 3);
  for (auto _ : state) benchmark::DoNotOptimize(qholo_eval(t1, t2, 0.3, 0.4));
}
BENCHMARK(BM_QHoloCircuit);

void BM_QHoloSpectral(benchmark::State& state) {
  Rng rng(1);
  std::vector<double> t1(96), t2(96);
  for (auto& v : t1) v = rng.uniform(-3, 3);
  for (auto& v : t2) v = rng.uniform(-3, 3);
  const QHoloSpectrum sp = qholo_spectrum(t1, t2);
  for (auto _ : state) benchmark::DoNotOptimize(sp.jet(0.3, 0.4));
}
BENCHMARK(BM_QHoloSpectral);

}  // namespace

BENCHMARK_MAIN();
