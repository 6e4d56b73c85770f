#include "harmonia/train.hpp"

#include <chrono>
#include <cmath>

namespace harmonia {

void TrainConfig::validate() const {
  if (epochs < 1) throw Error("TrainConfig: epochs must be >= 1");
  if (!(lr > 0.0)) throw Error("TrainConfig: lr must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) throw Error("TrainConfig: betas must lie in [0, 1)");
  if (!(eps > 0.0)) throw Error("TrainConfig: eps must be positive");
  if (trace_limit < 2) throw Error("TrainConfig: trace_limit must be >= 2");
}

void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state, int t,
               const TrainConfig& cfg) {
  if (t < 1) throw Error("adam_step: t must be >= 1");
  if (grad.size() != params.size()) throw Error("adam_step: gradient and parameter sizes differ");
  if (state.m.size() != params.size()) state.m.assign(params.size(), 0.0);
  if (state.v.size() != params.size()) state.v.assign(params.size(), 0.0);
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(grad[i])) {
      throw NonFiniteError("adam_step: non-finite gradient at step " + std::to_string(t), t);
    }
  }
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grad[i];
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
    const double mh = state.m[i] / c1;
    const double vh = state.v[i] / c2;
    params[i] -= cfg.lr * mh / (std::sqrt(vh) + cfg.eps);
  }
}

TrainReport train(std::vector<double> params, const Objective& objective, const TrainConfig& cfg,
                  const EpochHook& hook) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  TrainReport rep;
  rep.config = cfg;
  const int stride = static_cast<int>((static_cast<std::size_t>(cfg.epochs) + cfg.trace_limit - 2) / (cfg.trace_limit - 1));
  AdamState state;
  std::vector<double> grad;

  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
  auto diverge = [&](const std::string& what, int epoch) {
    rep.params = params;
    rep.epochs_run = epoch;
    rep.wall_seconds = elapsed();
    throw DivergenceError(what + " at epoch " + std::to_string(epoch), epoch, rep);
  };

  for (int e = 0; e < cfg.epochs; ++e) {
    double loss = 0.0;
    try {
      loss = objective(params, grad);
    } catch (const NonFiniteError& err) {
      diverge(err.what(), e);
    }
    if (!std::isfinite(loss)) diverge("loss became non-finite", e);
    if (e == 0) rep.initial_loss = loss;
    if (e % stride == 0) rep.trace.push_back({e, loss});
    if (hook) hook(e, loss);
    try {
      adam_step(params, grad, state, e + 1, cfg);
    } catch (const NonFiniteError& err) {
      diverge(err.what(), e);
    }
    rep.epochs_run = e + 1;
  }
  double final_loss = 0.0;
  try {
    final_loss = objective(params, grad);
  } catch (const NonFiniteError& err) {
    diverge(err.what(), cfg.epochs);
  }
  if (!std::isfinite(final_loss)) diverge("loss became non-finite", cfg.epochs);
  rep.trace.push_back({cfg.epochs, final_loss});
  rep.final_loss = final_loss;
  rep.params = std::move(params);
  rep.wall_seconds = elapsed();
  return rep;
}

}  // namespace harmonia
