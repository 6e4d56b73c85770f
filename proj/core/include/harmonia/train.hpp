#pragma once

// Deterministic full-batch training with Adam.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "harmonia/error.hpp"

namespace harmonia {

struct TrainConfig {
  int epochs = 16000;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 0;
  std::size_t trace_limit = 1000;

  void validate() const;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
};

/// One bias-corrected Adam update in place; t counts from 1.
void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state, int t,
               const TrainConfig& cfg);

struct TracePoint {
  int epoch = 0;
  double loss = 0.0;
};

struct TrainReport {
  std::vector<TracePoint> trace;  // at most trace_limit entries; last one is the final loss
  std::vector<double> params;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  double wall_seconds = 0.0;
  int epochs_run = 0;
  TrainConfig config;
};

/// Raised when the loss or its gradient stops being finite. index() is the
/// epoch; partial() holds the trace and parameters up to that point.
class DivergenceError : public NonFiniteError {
 public:
  DivergenceError(const std::string& what, int epoch, TrainReport partial)
      : NonFiniteError(what, epoch), partial_(std::move(partial)) {}
  const TrainReport& partial() const noexcept { return partial_; }

 private:
  TrainReport partial_;
};

/// Loss at params; fills grad with its gradient.
using Objective = std::function<double(std::span<const double> params, std::vector<double>& grad)>;

/// Optional per-epoch observer: (epoch, loss before the step).
using EpochHook = std::function<void(int, double)>;

TrainReport train(std::vector<double> params, const Objective& objective, const TrainConfig& cfg,
                  const EpochHook& hook = {});

}  // namespace harmonia
