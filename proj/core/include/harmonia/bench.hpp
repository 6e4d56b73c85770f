#pragma once

// Scenario runner: train one (scenario, method, seed), score it against the
// oracle, write the output bundle; aggregate bundles into tables.

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "harmonia/losses.hpp"
#include "harmonia/oracle.hpp"
#include "harmonia/scenario.hpp"
#include "harmonia/train.hpp"

namespace harmonia {

struct RunConfig {
  Preset preset = Preset::fast;
  int epochs = 0;          // 0: 4000 (fast) or 16000 (paper)
  double lr = 0.0;         // 0: 1e-3, or 0.05 for qholomorphic
  std::string out_dir;     // bundle root; empty disables file output
  int eval_n = 0;          // 0: scenario default
  ModelOptions model{};
  std::size_t trace_limit = 1000;

  int resolved_epochs() const;
  double resolved_lr(Method m) const;
};

enum class PathStatus { reached, exited, max_steps, stationary };

const char* to_string(PathStatus s);

struct PathOptions {
  double step = 0.01;
  int max_steps = 10000;
};

struct RobotPath {
  Pt start{};
  std::vector<Pt> points;  // start first
  PathStatus status = PathStatus::max_steps;
};

/// Explicit Euler ascent along grad/|grad| from start. Stops once y >= 1 -
/// step (reached), when neither the step nor an axis-aligned slide along it
/// stays inside the domain (exited), after max_steps, or where |grad| <
/// 1e-10 (stationary). Every recorded point lies in the closed domain.
RobotPath robot_path(const std::function<std::array<double, 2>(const Pt&)>& gradient, const Domain& domain,
                     const Pt& start, const PathOptions& opts = {});

struct RunResult {
  std::string scenario;
  Method method = Method::pinn;
  std::uint64_t seed = 0;
  Metrics metrics;
  double wall_seconds = 0.0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  double interface_jump = 0.0;  // max |phi_i - phi_j| at interface samples (decomposed runs)
  std::size_t eval_points = 0;
  std::vector<TracePoint> trace;  // sampled training loss
  std::vector<RobotPath> paths;
  std::vector<std::string> files;
};

/// Oracle for (scenario, preset), solved once per process.
const Oracle& cached_oracle(const Scenario& s, Preset preset);

/// Train and score one run. Throws IncompatibleError or DivergenceError.
RunResult run(const std::string& scenario, Method method, std::uint64_t seed, const RunConfig& cfg);

/// Bundle directory of one run below `root`.
std::string run_dir(const std::string& root, const std::string& scenario, Method method, std::uint64_t seed);

/// metrics.csv body for a result (header plus one row, 17 significant digits).
std::string metrics_csv(const RunResult& r);

struct TableOptions {
  std::string out_dir;
  std::vector<std::string> scenarios;  // empty: all
  std::vector<Method> methods;         // empty: all
  std::vector<std::uint64_t> seeds;    // empty: whatever bundles exist
  bool scale100 = false;
};

struct TableCell {
  std::string scenario;
  Method method = Method::pinn;
  std::size_t runs = 0;
  std::array<double, 3> mean{};  // rmse, paper_mae, mean_abs_laplacian
  std::array<double, 3> stddev{};
};

struct Table {
  std::vector<TableCell> cells;
  std::vector<std::string> missing;
  std::string csv;      // unscaled
  std::string console;  // scaled by 100 when requested
};

/// Mean and population standard deviation over seeds of every bundle found.
/// Writes table.csv under out_dir.
Table table(const TableOptions& opts);

/// Mean and population standard deviation.
std::array<double, 2> mean_std(const std::vector<double>& v);

}  // namespace harmonia
