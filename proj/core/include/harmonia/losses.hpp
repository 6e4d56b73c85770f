#pragma once

// Loss terms and per-method objectives.
//
// Every term is a mean over a fixed sample set. Each function returns the
// loss value and, when `grad` is non-empty, accumulates its exact parameter
// gradient into `grad` (scaled by `weight`).

#include <array>
#include <span>
#include <string>
#include <vector>

#include "harmonia/jet.hpp"
#include "harmonia/nets.hpp"

namespace harmonia {

enum class Method { pinn, hpinn, holomorphic, curlnet, multiholomorphic, xpinn, qholomorphic };

const char* to_string(Method m);
Method parse_method(const std::string& s);
std::span<const Method> all_methods();

enum class FieldMode { gradient, curl };

template <int D>
struct DirichletSample {
  Point<D> x{};
  double value = 0.0;
};

template <int D>
struct WallSample {
  Point<D> x{};
  std::array<double, D> normal{};
};

template <int D>
struct CollocationSample {
  Point<D> x{};
  int region = 0;
};

/// A point shared by two regions; the normal points from `first` into
/// `second`.
template <int D>
struct PairSample {
  Point<D> x{};
  int first = 0;
  int second = 1;
  std::array<double, D> normal{};
};

template <int D>
struct SamplePlan {
  std::vector<DirichletSample<D>> dirichlet;
  std::vector<WallSample<D>> insulated;
  std::vector<CollocationSample<D>> collocation;
  std::vector<PairSample<D>> interface;
  std::vector<PairSample<D>> dielectric;
  double eps1 = 1.0;
  double eps2 = 1.0;
};

// ---------------------------------------------------------------------------
// Individual terms
// ---------------------------------------------------------------------------

/// mean (phi(x) - c)^2
template <int D>
double dirichlet_loss(const PiecewiseNet<D>& net, std::span<const double> params,
                      std::span<const DirichletSample<D>> samples, std::span<double> grad = {},
                      double weight = 1.0);

/// mean (laplacian phi)^2, each point evaluated on its own region's unit.
template <int D>
double laplacian_loss(const PiecewiseNet<D>& net, std::span<const double> params,
                      std::span<const CollocationSample<D>> samples, std::span<double> grad = {},
                      double weight = 1.0);

/// mean (phi_i - phi_j)^2 + |grad phi_i - grad phi_j|^2
template <int D>
double interface_loss(const PiecewiseNet<D>& net, std::span<const double> params,
                      std::span<const PairSample<D>> samples, std::span<double> grad = {}, double weight = 1.0);

/// mean |grad phi_C - curl A|^2
template <int D>
double curl_match_loss(const PiecewiseNet<D>& net, std::span<const double> params,
                       std::span<const CollocationSample<D>> samples, std::span<double> grad = {},
                       double weight = 1.0);

/// mean (phi_1 - phi_2)^2 + (eps1 n.E_1 - eps2 n.E_2)^2
template <int D>
double dielectric_loss(const PiecewiseNet<D>& net, std::span<const double> params,
                       std::span<const PairSample<D>> samples, double eps1, double eps2, FieldMode mode,
                       std::span<double> grad = {}, double weight = 1.0);

/// mean (n . grad phi)^2 on insulated walls.
template <int D>
double neumann_loss(const PiecewiseNet<D>& net, std::span<const double> params,
                    std::span<const WallSample<D>> samples, std::span<double> grad = {}, double weight = 1.0);

// ---------------------------------------------------------------------------
// Composite objectives
// ---------------------------------------------------------------------------

struct LossTerm {
  std::string name;
  double weight = 1.0;
  double value = 0.0;
};

struct LossBundle {
  std::vector<LossTerm> terms;
  double total = 0.0;

  bool has(const std::string& name) const;
  double value(const std::string& name) const;
};

/// What a scenario offers; decides which methods apply and which terms.
struct ProblemTraits {
  int dim = 2;
  bool decomposed = false;  // has a simply-connected decomposition
  bool dielectric = false;  // two material regions coupled at an interface
  bool insulated = false;   // has zero-flux walls
};

/// Term names of the objective for `method`. Throws IncompatibleError when
/// the method cannot run on the problem.
std::vector<std::string> method_terms(Method method, const ProblemTraits& traits);

/// Throws IncompatibleError with an explanation, or returns normally.
void check_compatible(Method method, const ProblemTraits& traits);

template <int D>
class LossEvaluator {
 public:
  LossEvaluator(const PiecewiseNet<D>& net, SamplePlan<D> plan, std::vector<std::string> terms,
                FieldMode field_mode = FieldMode::gradient);

  /// Loss bundle at params; fills grad (resized to the parameter count) when
  /// requested. Networks without an adjoint use central differences with
  /// step fd_step on the total.
  LossBundle evaluate(std::span<const double> params, std::vector<double>* grad = nullptr) const;

  double total(std::span<const double> params) const { return evaluate(params).total; }

  void set_weight(const std::string& name, double w);
  const std::vector<std::string>& terms() const { return terms_; }
  const SamplePlan<D>& plan() const { return plan_; }
  const PiecewiseNet<D>& net() const { return net_; }

  double fd_step = 1e-6;

 private:
  LossBundle evaluate_exact(std::span<const double> params, std::span<double> grad) const;

  const PiecewiseNet<D>& net_;
  SamplePlan<D> plan_;
  std::vector<std::string> terms_;
  std::vector<double> weights_;
  FieldMode mode_;
};

}  // namespace harmonia
