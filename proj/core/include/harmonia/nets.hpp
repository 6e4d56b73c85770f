#pragma once

// Network architectures: real MLPs, holomorphic MLPs, the hPINN wrapper,
// CurlNet pairs, piecewise composites and the quantum holomorphic adapter.
//
// Every architecture is exposed as a Unit<D>: a scalar potential phi with
// its spatial jet, a vector field E (grad phi, or curl A for CurlNet) and an
// adjoint pass. A PiecewiseNet<D> glues one unit per region together.

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "harmonia/diffcore.hpp"
#include "harmonia/geometry.hpp"
#include "harmonia/jet.hpp"
#include "harmonia/mlp.hpp"
#include "harmonia/rng.hpp"

namespace harmonia {

/// Affine input normalization x' = (x - center) / scale. Holomorphic in z
/// for the complex networks since the scale is real.
struct InputMap {
  std::array<double, 4> center{};
  double scale = 1.0;
};

template <int D>
std::array<Jet<D>, D> map_input(const InputMap& m, const Point<D>& x) {
  std::array<Jet<D>, D> r;
  const double inv = 1.0 / m.scale;
  for (int i = 0; i < D; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    r[ui] = Jet<D>::constant((x[ui] - m.center[ui]) * inv);
    r[ui].g[ui] = inv;
  }
  return r;
}

template <int D>
struct UnitOutput {
  Jet<D> phi;
  std::array<double, D> field{};  // valid for order >= 1
};

template <int D>
class Unit {
 public:
  struct Workspace {
    virtual ~Workspace() = default;
  };

  virtual ~Unit() = default;
  virtual std::string kind() const = 0;
  virtual std::size_t param_count() const = 0;
  virtual std::vector<double> init(Rng& rng) const = 0;
  virtual std::unique_ptr<Workspace> workspace() const = 0;

  /// order 0: value; 1: adds gradient and field; 2: adds Hessian.
  virtual UnitOutput<D> eval(std::span<const double> params, const Point<D>& x, int order,
                             Workspace& ws) const = 0;

  /// Accumulate parameter gradients given adjoints of the last eval() on ws.
  virtual void backward(std::span<const double> params, Workspace& ws, const Jet<D>& phi_adj,
                        const std::array<double, D>& field_adj, std::span<double> grad) const = 0;

  /// eval() at many points. State for backward_batch() stays in ws.
  virtual void eval_batch(std::span<const double> params, std::span<const Point<D>> xs, int order, Workspace& ws,
                          std::span<UnitOutput<D>> out) const {
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = eval(params, xs[i], order, ws);
  }

  /// backward() for the most recent eval_batch() on ws with the same points.
  virtual void backward_batch(std::span<const double> params, std::span<const Point<D>> xs, int order,
                              Workspace& ws, std::span<const Jet<D>> phi_adj,
                              std::span<const std::array<double, D>> field_adj, std::span<double> grad) const {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      eval(params, xs[i], order, ws);
      backward(params, ws, phi_adj[i], field_adj[i], grad);
    }
  }

  /// False when parameter gradients are not available analytically.
  virtual bool has_backward() const { return true; }
  /// True when the architecture is harmonic for every parameter value.
  virtual bool exactly_harmonic() const { return false; }
};

/// Adjoint of the left factor of P = M * F given P's adjoint (F held fixed).
template <int D>
Jet<D> mul_adjoint(const Jet<D>& F, const Jet<D>& Pbar) {
  Jet<D> m;
  m.v = Pbar.v * F.v;
  for (int i = 0; i < D; ++i) m.v += Pbar.g[i] * F.g[i];
  for (int i = 0; i < D * D; ++i) m.v += Pbar.h[i] * F.h[i];
  for (int k = 0; k < D; ++k) {
    double s = Pbar.g[k] * F.v;
    for (int j = 0; j < D; ++j) s += (Pbar.hess(k, j) + Pbar.hess(j, k)) * F.g[j];
    m.g[k] = s;
  }
  for (int i = 0; i < D * D; ++i) m.h[i] = Pbar.h[i] * F.v;
  return m;
}

// ---------------------------------------------------------------------------
// Plain forward evaluations
// ---------------------------------------------------------------------------

template <int D>
Jet<D> forward_real(const Mlp<D, double>& net, std::span<const double> params,
                    std::span<const Jet<D>> x) {
  typename Mlp<D, double>::Tape tape;
  net.forward(params, x, 2, tape);
  return net.output(tape);
}

/// NN_h(x + iy) with its spatial jet, for a complex MLP with one input.
ComplexJet forward_holomorphic(const Mlp<2, std::complex<double>>& net, std::span<const double> params,
                               double x, double y, const InputMap& map = {});

/// phi_H = Re(NN_h(x + iy)).
Jet<2> forward_harmonic(const Mlp<2, std::complex<double>>& net, std::span<const double> params, double x,
                        double y, const InputMap& map = {});

// ---------------------------------------------------------------------------
// Divergence-free fields
// ---------------------------------------------------------------------------

/// Number of potential components: 1, 3, 6 for D = 2, 3, 4.
constexpr int curl_components(int d) { return d == 2 ? 1 : (d == 3 ? 3 : 6); }

/// field[f] += sign * dA[comp]/dx[deriv]
struct CurlTerm {
  int field;
  int comp;
  int deriv;
  double sign;
};

std::span<const CurlTerm> curl_terms(int d);

/// Divergence-free field built from the first derivatives of A.
template <int D>
std::array<double, D> curl_field(std::span<const Jet<D>> a) {
  if (a.size() != static_cast<std::size_t>(curl_components(D))) throw Error("curl_field: wrong number of components");
  std::array<double, D> f{};
  for (const auto& t : curl_terms(D)) {
    f[static_cast<std::size_t>(t.field)] += t.sign * a[static_cast<std::size_t>(t.comp)].g[static_cast<std::size_t>(t.deriv)];
  }
  return f;
}

/// Divergence of curl_field, from the second derivatives of A.
template <int D>
double curl_divergence(std::span<const Jet<D>> a) {
  if (a.size() != static_cast<std::size_t>(curl_components(D))) throw Error("curl_divergence: wrong number of components");
  double s = 0.0;
  for (const auto& t : curl_terms(D)) s += t.sign * a[static_cast<std::size_t>(t.comp)].hess(t.deriv, t.field);
  return s;
}

// ---------------------------------------------------------------------------
// Units
// ---------------------------------------------------------------------------

template <int D>
class RealUnit : public Unit<D> {
 public:
  using Base = Unit<D>;
  RealUnit(MlpSpec spec, InputMap map);

  std::string kind() const override { return "real"; }
  std::size_t param_count() const override { return net_.param_count(); }
  std::vector<double> init(Rng& rng) const override { return net_.init(rng); }
  std::unique_ptr<typename Base::Workspace> workspace() const override;
  UnitOutput<D> eval(std::span<const double> params, const Point<D>& x, int order,
                     typename Base::Workspace& ws) const override;
  void backward(std::span<const double> params, typename Base::Workspace& ws, const Jet<D>& phi_adj,
                const std::array<double, D>& field_adj, std::span<double> grad) const override;

  void eval_batch(std::span<const double> params, std::span<const Point<D>> xs, int order,
                  typename Base::Workspace& ws, std::span<UnitOutput<D>> out) const override;
  void backward_batch(std::span<const double> params, std::span<const Point<D>> xs, int order,
                      typename Base::Workspace& ws, std::span<const Jet<D>> phi_adj,
                      std::span<const std::array<double, D>> field_adj, std::span<double> grad) const override;

  const Mlp<D, double>& mlp() const { return net_; }
  const InputMap& input_map() const { return map_; }

 private:
  Mlp<D, double> net_;
  InputMap map_;
};

class HarmonicUnit : public Unit<2> {
 public:
  HarmonicUnit(MlpSpec spec, InputMap map);

  std::string kind() const override { return "holomorphic"; }
  std::size_t param_count() const override { return net_.param_count(); }
  std::vector<double> init(Rng& rng) const override { return net_.init(rng); }
  std::unique_ptr<Workspace> workspace() const override;
  UnitOutput<2> eval(std::span<const double> params, const Point<2>& x, int order, Workspace& ws) const override;
  void backward(std::span<const double> params, Workspace& ws, const Jet<2>& phi_adj,
                const std::array<double, 2>& field_adj, std::span<double> grad) const override;
  void eval_batch(std::span<const double> params, std::span<const Point<2>> xs, int order, Workspace& ws,
                  std::span<UnitOutput<2>> out) const override;
  void backward_batch(std::span<const double> params, std::span<const Point<2>> xs, int order, Workspace& ws,
                      std::span<const Jet<2>> phi_adj, std::span<const std::array<double, 2>> field_adj,
                      std::span<double> grad) const override;
  bool exactly_harmonic() const override { return true; }

  const Mlp<2, std::complex<double>>& mlp() const { return net_; }

 private:
  Mlp<2, std::complex<double>> net_;
  InputMap map_;
};

/// phi = c exp(-k d) + (1 - exp(-k d)) MLP, d the distance to `wrapped`.
template <int D>
Jet<D> hpinn_eval(const Jet<D>& mlp, const Jet<D>& dist, double c, double k);

template <int D>
class HpinnUnit : public Unit<D> {
 public:
  using Base = Unit<D>;
  HpinnUnit(MlpSpec spec, InputMap map, std::vector<BoundarySegment> wrapped, double k);

  std::string kind() const override { return "hpinn"; }
  std::size_t param_count() const override { return inner_.param_count(); }
  std::vector<double> init(Rng& rng) const override { return inner_.init(rng); }
  std::unique_ptr<typename Base::Workspace> workspace() const override;
  UnitOutput<D> eval(std::span<const double> params, const Point<D>& x, int order,
                     typename Base::Workspace& ws) const override;
  void backward(std::span<const double> params, typename Base::Workspace& ws, const Jet<D>& phi_adj,
                const std::array<double, D>& field_adj, std::span<double> grad) const override;

  void eval_batch(std::span<const double> params, std::span<const Point<D>> xs, int order,
                  typename Base::Workspace& ws, std::span<UnitOutput<D>> out) const override;
  void backward_batch(std::span<const double> params, std::span<const Point<D>> xs, int order,
                      typename Base::Workspace& ws, std::span<const Jet<D>> phi_adj,
                      std::span<const std::array<double, D>> field_adj, std::span<double> grad) const override;

  double wrap_value() const { return c_; }
  double k() const { return k_; }
  const std::vector<BoundarySegment>& wrapped() const { return wrapped_; }

 private:
  RealUnit<D> inner_;
  std::vector<BoundarySegment> wrapped_;
  double c_ = 0.0;
  double k_ = 10.0;
};

/// CurlNet: phi_C and a potential A whose curl is the field.
template <int D>
class CurlUnit : public Unit<D> {
 public:
  using Base = Unit<D>;
  CurlUnit(MlpSpec phi_spec, MlpSpec a_spec, InputMap map);

  std::string kind() const override { return "curlnet"; }
  std::size_t param_count() const override { return phi_.param_count() + a_.param_count(); }
  std::vector<double> init(Rng& rng) const override;
  std::unique_ptr<typename Base::Workspace> workspace() const override;
  UnitOutput<D> eval(std::span<const double> params, const Point<D>& x, int order,
                     typename Base::Workspace& ws) const override;
  void backward(std::span<const double> params, typename Base::Workspace& ws, const Jet<D>& phi_adj,
                const std::array<double, D>& field_adj, std::span<double> grad) const override;

  void eval_batch(std::span<const double> params, std::span<const Point<D>> xs, int order,
                  typename Base::Workspace& ws, std::span<UnitOutput<D>> out) const override;
  void backward_batch(std::span<const double> params, std::span<const Point<D>> xs, int order,
                      typename Base::Workspace& ws, std::span<const Jet<D>> phi_adj,
                      std::span<const std::array<double, D>> field_adj, std::span<double> grad) const override;

  std::size_t phi_param_count() const { return phi_.param_count(); }
  const Mlp<D, double>& phi_mlp() const { return phi_; }
  const Mlp<D, double>& a_mlp() const { return a_; }

  /// The A components at x as order-2 jets (for divergence checks).
  std::vector<Jet<D>> potential(std::span<const double> params, const Point<D>& x) const;

 private:
  Mlp<D, double> phi_;
  Mlp<D, double> a_;
  InputMap map_;
};

/// Quantum holomorphic network; see qsim.hpp. Parameters are
/// [theta1 | theta2 | readout scale]. No analytic parameter gradient.
class QHoloUnit : public Unit<2> {
 public:
  QHoloUnit(int qubits, int depth);

  std::string kind() const override { return "qholomorphic"; }
  std::size_t param_count() const override;
  std::vector<double> init(Rng& rng) const override;
  std::unique_ptr<Workspace> workspace() const override;
  UnitOutput<2> eval(std::span<const double> params, const Point<2>& x, int order, Workspace& ws) const override;
  /// Value-only batches reuse the per-point exponentials across calls.
  void eval_batch(std::span<const double> params, std::span<const Point<2>> xs, int order, Workspace& ws,
                  std::span<UnitOutput<2>> out) const override;
  void backward(std::span<const double>, Workspace&, const Jet<2>&, const std::array<double, 2>&,
                std::span<double>) const override;
  bool has_backward() const override { return false; }
  bool exactly_harmonic() const override { return true; }

  int qubits() const { return qubits_; }
  int depth() const { return depth_; }
  std::size_t angles_per_block() const;

 private:
  int qubits_;
  int depth_;
};

// ---------------------------------------------------------------------------
// Piecewise composite
// ---------------------------------------------------------------------------

/// One unit evaluated at one point.
template <int D>
struct UnitQuery {
  int unit = 0;
  Point<D> x{};
};

template <int D>
class PiecewiseNet {
 public:
  struct Workspace {
    std::vector<std::unique_ptr<typename Unit<D>::Workspace>> unit;
    std::vector<int> owners;
  };

  /// Queries grouped by unit for the batched path.
  struct BatchWorkspace {
    std::vector<std::unique_ptr<typename Unit<D>::Workspace>> unit;
    std::vector<std::vector<Point<D>>> xs;
    std::vector<std::vector<std::size_t>> index;
    std::vector<UnitOutput<D>> scratch;
    std::vector<Jet<D>> phi_adj;
    std::vector<std::array<double, D>> field_adj;
    int order = 0;
  };

  /// One unit per region. With a single unit, `regions` may be empty and
  /// `domain` decides membership.
  PiecewiseNet(std::vector<std::unique_ptr<Unit<D>>> units, std::vector<Domain> regions, Domain domain);

  std::size_t regions() const { return units_.size(); }
  const Unit<D>& unit(std::size_t i) const { return *units_[i]; }
  std::size_t param_count() const { return offsets_.back(); }
  std::size_t offset(std::size_t i) const { return offsets_[i]; }
  std::span<const double> slice(std::span<const double> params, std::size_t i) const {
    return params.subspan(offsets_[i], offsets_[i + 1] - offsets_[i]);
  }
  std::span<double> slice(std::span<double> grad, std::size_t i) const {
    return grad.subspan(offsets_[i], offsets_[i + 1] - offsets_[i]);
  }
  std::vector<double> init(Rng& rng) const;
  Workspace workspace() const;
  const Domain& domain() const { return domain_; }
  bool has_backward() const;
  bool exactly_harmonic() const;

  /// Regions whose closure contains x. Empty when x lies outside the domain.
  std::vector<int> owners(const Point<D>& x) const;

  /// The unit's value inside a region; the mean over the owners on shared
  /// boundaries. Throws for points outside the closed domain.
  UnitOutput<D> eval(std::span<const double> params, const Point<D>& x, int order, Workspace& ws) const;
  void backward(std::span<const double> params, Workspace& ws, const Jet<D>& phi_adj,
                const std::array<double, D>& field_adj, std::span<double> grad) const;

  BatchWorkspace batch_workspace() const;

  /// Queries that make up the composite value at x (one per owner) with
  /// their averaging weight. Throws for points outside the closed domain.
  void owner_queries(const Point<D>& x, std::vector<UnitQuery<D>>& queries, std::vector<double>& weights) const;

  /// Evaluate every query; out[i] belongs to queries[i].
  void eval_queries(std::span<const double> params, std::span<const UnitQuery<D>> queries, int order,
                    BatchWorkspace& ws, std::vector<UnitOutput<D>>& out) const;

  /// Adjoint pass for the most recent eval_queries() on ws.
  void backward_queries(std::span<const double> params, std::span<const UnitQuery<D>> queries, BatchWorkspace& ws,
                        std::span<const Jet<D>> phi_adj, std::span<const std::array<double, D>> field_adj,
                        std::span<double> grad) const;

 private:
  std::vector<std::unique_ptr<Unit<D>>> units_;
  std::vector<Domain> regions_;
  Domain domain_;
  std::vector<std::size_t> offsets_;
};

template <int D>
Jet<D> piecewise_eval(const PiecewiseNet<D>& net, std::span<const double> params, const Point<D>& x) {
  auto ws = net.workspace();
  return net.eval(params, x, 2, ws).phi;
}

template <int D>
Point<D> to_point(const Pt& p) {
  Point<D> r{};
  for (int i = 0; i < D; ++i) r[static_cast<std::size_t>(i)] = p[static_cast<std::size_t>(i)];
  return r;
}

template <int D>
Pt to_pt(const Point<D>& p) {
  Pt r{};
  for (int i = 0; i < D && i < 3; ++i) r[static_cast<std::size_t>(i)] = p[static_cast<std::size_t>(i)];
  return r;
}

// ---------------------------------------------------------------------------
// Parameter files
// ---------------------------------------------------------------------------

enum class ParamKind : std::uint32_t { real = 1, complex = 2, curl_pair = 3, piecewise = 4, quantum = 5 };

struct ParamFile {
  ParamKind kind = ParamKind::real;
  std::vector<double> values;
};

/// Header: "HNET", version u32, kind u32, count u64 (20 bytes, little
/// endian), then count float64 values.
void save_params(const std::string& path, ParamKind kind, std::span<const double> values);
ParamFile load_params(const std::string& path);

}  // namespace harmonia
