#pragma once

// Benchmark problems, their reference solutions and per-method models.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "harmonia/geometry.hpp"
#include "harmonia/losses.hpp"
#include "harmonia/nets.hpp"
#include "harmonia/oracle.hpp"

namespace harmonia {

enum class Preset { fast, paper };

const char* to_string(Preset p);

struct OracleSpec {
  enum class Kind { analytic_box, finite_difference };
  Kind kind = Kind::finite_difference;
  double h = 0.0;
  double tol = 1e-10;
};

struct Scenario {
  std::string id;
  int dim = 2;
  Domain domain;
  std::vector<BoundarySegment> boundary;
  std::optional<DomainDecomposition> decomposition;

  // Two-material problems: one region per material, coupled at `material_interface`.
  bool dielectric = false;
  std::vector<Domain> materials;
  std::optional<Interface> material_interface;
  double eps1 = 1.0;
  double eps2 = 1.0;

  OracleSpec oracle;
  int eval_n = 128;                  // evaluation grid: eval_n cell centres per axis
  double eval_min_x = -1e300;        // evaluation points need x >= eval_min_x
  std::vector<Pt> path_starts;       // robot start points

  ProblemTraits traits() const;
  /// Permittivity at p (dielectric problems); 1 elsewhere.
  double permittivity(const Pt& p) const;
};

/// electrostatics, heat_box, heater, robot, pipe3d
std::span<const std::string> scenario_ids();
Scenario make_scenario(const std::string& id, Preset preset = Preset::fast);

/// Ground truth on a scenario: the closed form or an FD grid.
class Oracle {
 public:
  static Oracle analytic(std::function<double(const Pt&)> f);
  static Oracle grid(FieldGrid g);

  bool covers(const Pt& p) const;
  double value(const Pt& p) const;
  std::array<double, 3> gradient(const Pt& p) const;
  const FieldGrid* field_grid() const { return grid_ ? &*grid_ : nullptr; }

 private:
  std::function<double(const Pt&)> f_;
  std::optional<FieldGrid> grid_;
};

/// Solve (or wrap) the scenario's reference solution.
Oracle build_oracle(const Scenario& s, SorReport* report = nullptr);

/// Evaluation grid node layout: eval_n cell centres per axis of the bounding box.
FieldGrid eval_grid_layout(const Scenario& s);

/// Cell centres of the evaluation grid inside the domain and covered by the
/// oracle; `indices` receives their eval_grid_layout() node indices.
std::vector<Pt> eval_points(const Scenario& s, const Oracle& oracle, std::vector<std::size_t>* indices = nullptr);

struct ModelOptions {
  MlpSpec real_spec{};          // tanh, 3 x 32
  MlpSpec complex_spec{};       // sin, 3 x 32
  int boundary_points = 100;    // per boundary line
  int face_points = 10;         // per face side (3D)
  int collocation = 1024;       // per region
  int interface_points = 100;   // per interface
  std::uint64_t collocation_seed = 1024;
  double hpinn_k = 10.0;
  int qubits = 4;
  int depth = 8;

  ModelOptions();
};

template <int D>
struct Model {
  std::unique_ptr<PiecewiseNet<D>> net;
  SamplePlan<D> plan;
  std::vector<std::string> terms;
  FieldMode field_mode = FieldMode::gradient;
  std::vector<std::string> notes;  // construction details echoed into the config
  ParamKind param_kind = ParamKind::real;
};

/// Network, samples and objective terms for `method` on `s`. Throws
/// IncompatibleError when the method does not apply.
template <int D>
Model<D> build_model(const Scenario& s, Method method, const ModelOptions& opts = {});

/// Composite value jets at points (order 0, 1 or 2).
template <int D>
std::vector<Jet<D>> field_jets(const PiecewiseNet<D>& net, std::span<const double> params, std::span<const Pt> points,
                               int order);

}  // namespace harmonia
