#include "harmonia/nets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "harmonia/diffcore.hpp"
#include "harmonia/error.hpp"
#include "harmonia/qsim.hpp"

namespace harmonia {

namespace {

using C = std::complex<double>;

Jet<2, C> complex_input(double x, double y, const InputMap& map) {
  const double inv = 1.0 / map.scale;
  Jet<2, C> z;
  z.v = C((x - map.center[0]) * inv, (y - map.center[1]) * inv);
  z.g = {C(inv, 0.0), C(0.0, inv)};
  return z;
}

constexpr CurlTerm kCurl2[] = {{0, 0, 1, 1.0}, {1, 0, 0, -1.0}};

constexpr CurlTerm kCurl3[] = {
    {0, 2, 1, 1.0}, {0, 1, 2, -1.0},  //
    {1, 0, 2, 1.0}, {1, 2, 0, -1.0},  //
    {2, 1, 0, 1.0}, {2, 0, 1, -1.0},
};

// Components y1..y6 of the 2-form map to A[0..5], coordinates x1..x4 to 0..3.
constexpr CurlTerm kCurl4[] = {
    {0, 3, 3, 1.0},  {0, 4, 2, -1.0}, {0, 5, 1, 1.0},   //
    {1, 1, 3, -1.0}, {1, 2, 2, 1.0},  {1, 5, 0, -1.0},  //
    {2, 0, 3, 1.0},  {2, 2, 1, -1.0}, {2, 4, 0, 1.0},   //
    {3, 0, 2, -1.0}, {3, 1, 1, 1.0},  {3, 3, 0, -1.0},
};

}  // namespace

std::span<const CurlTerm> curl_terms(int d) {
  switch (d) {
    case 2: return kCurl2;
    case 3: return kCurl3;
    case 4: return kCurl4;
    default: throw Error("curl_terms: unsupported dimension " + std::to_string(d));
  }
}

ComplexJet forward_holomorphic(const Mlp<2, C>& net, std::span<const double> params, double x, double y,
                               const InputMap& map) {
  const Jet<2, C> z = complex_input(x, y, map);
  typename Mlp<2, C>::Tape tape;
  net.forward(params, std::span<const Jet<2, C>>(&z, 1), 2, tape);
  return split(net.output(tape));
}

Jet<2> forward_harmonic(const Mlp<2, C>& net, std::span<const double> params, double x, double y,
                        const InputMap& map) {
  return forward_holomorphic(net, params, x, y, map).u;
}

// ---------------------------------------------------------------------------
// RealUnit
// ---------------------------------------------------------------------------

namespace {

template <int D>
struct RealWs : Unit<D>::Workspace {
  typename Mlp<D, double>::Tape tape;
  typename Mlp<D, double>::BatchTape batch;
  std::vector<Jet<D>> jets;
};

template <int D>
void add_field_adjoint(Jet<D>& adj, const std::array<double, D>& field_adj) {
  for (int i = 0; i < D; ++i) adj.g[static_cast<std::size_t>(i)] += field_adj[static_cast<std::size_t>(i)];
}

}  // namespace

template <int D>
RealUnit<D>::RealUnit(MlpSpec spec, InputMap map) : net_((spec.input_dim = D, spec)), map_(map) {}

template <int D>
std::unique_ptr<typename Unit<D>::Workspace> RealUnit<D>::workspace() const {
  return std::make_unique<RealWs<D>>();
}

template <int D>
UnitOutput<D> RealUnit<D>::eval(std::span<const double> params, const Point<D>& x, int order,
                                typename Base::Workspace& ws) const {
  auto& w = static_cast<RealWs<D>&>(ws);
  const auto in = map_input<D>(map_, x);
  net_.forward(params, in, order, w.tape);
  UnitOutput<D> out;
  out.phi = net_.output(w.tape);
  if (order >= 1) out.field = out.phi.g;
  return out;
}

template <int D>
void RealUnit<D>::backward(std::span<const double> params, typename Base::Workspace& ws, const Jet<D>& phi_adj,
                           const std::array<double, D>& field_adj, std::span<double> grad) const {
  auto& w = static_cast<RealWs<D>&>(ws);
  Jet<D> adj = phi_adj;
  add_field_adjoint<D>(adj, field_adj);
  net_.backward(params, w.tape, std::span<const Jet<D>>(&adj, 1), grad);
}

template <int D>
void RealUnit<D>::eval_batch(std::span<const double> params, std::span<const Point<D>> xs, int order,
                             typename Base::Workspace& ws, std::span<UnitOutput<D>> out) const {
  auto& w = static_cast<RealWs<D>&>(ws);
  if (xs.empty()) return;
  w.jets.resize(xs.size() * D);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto in = map_input<D>(map_, xs[i]);
    std::copy(in.begin(), in.end(), w.jets.begin() + static_cast<std::ptrdiff_t>(i * D));
  }
  net_.forward_batch(params, w.jets, static_cast<int>(xs.size()), order, w.batch);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out[i].phi = net_.batch_output(w.batch, static_cast<int>(i));
    if (order >= 1) out[i].field = out[i].phi.g;
  }
}

template <int D>
void RealUnit<D>::backward_batch(std::span<const double> params, std::span<const Point<D>> xs, int,
                                 typename Base::Workspace& ws, std::span<const Jet<D>> phi_adj,
                                 std::span<const std::array<double, D>> field_adj, std::span<double> grad) const {
  auto& w = static_cast<RealWs<D>&>(ws);
  if (xs.empty()) return;
  w.jets.resize(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    w.jets[i] = phi_adj[i];
    add_field_adjoint<D>(w.jets[i], field_adj[i]);
  }
  net_.backward_batch(params, w.batch, w.jets, grad);
}

// ---------------------------------------------------------------------------
// HarmonicUnit
// ---------------------------------------------------------------------------

namespace {
struct HarmonicWs : Unit<2>::Workspace {
  Mlp<2, C>::Tape tape;
  Mlp<2, C>::BatchTape batch;
  std::vector<Jet<2, C>> jets;
};
}  // namespace

HarmonicUnit::HarmonicUnit(MlpSpec spec, InputMap map) : net_((spec.input_dim = 1, spec)), map_(map) {}

std::unique_ptr<Unit<2>::Workspace> HarmonicUnit::workspace() const { return std::make_unique<HarmonicWs>(); }

UnitOutput<2> HarmonicUnit::eval(std::span<const double> params, const Point<2>& x, int order, Workspace& ws) const {
  auto& w = static_cast<HarmonicWs&>(ws);
  const Jet<2, C> z = complex_input(x[0], x[1], map_);
  net_.forward(params, std::span<const Jet<2, C>>(&z, 1), order, w.tape);
  UnitOutput<2> out;
  out.phi = split(net_.output(w.tape)).u;
  if (order >= 1) out.field = out.phi.g;
  return out;
}

void HarmonicUnit::backward(std::span<const double> params, Workspace& ws, const Jet<2>& phi_adj,
                            const std::array<double, 2>& field_adj, std::span<double> grad) const {
  auto& w = static_cast<HarmonicWs&>(ws);
  Jet<2> adj = phi_adj;
  add_field_adjoint<2>(adj, field_adj);
  // phi = Re(out): the adjoint of out is real under dL/dRe + i dL/dIm.
  Jet<2, C> cadj;
  cadj.v = adj.v;
  for (std::size_t i = 0; i < 2; ++i) cadj.g[i] = adj.g[i];
  for (std::size_t i = 0; i < 4; ++i) cadj.h[i] = adj.h[i];
  net_.backward(params, w.tape, std::span<const Jet<2, C>>(&cadj, 1), grad);
}

void HarmonicUnit::eval_batch(std::span<const double> params, std::span<const Point<2>> xs, int order,
                              Workspace& ws, std::span<UnitOutput<2>> out) const {
  auto& w = static_cast<HarmonicWs&>(ws);
  if (xs.empty()) return;
  w.jets.resize(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) w.jets[i] = complex_input(xs[i][0], xs[i][1], map_);
  net_.forward_batch(params, w.jets, static_cast<int>(xs.size()), order, w.batch);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out[i].phi = split(net_.batch_output(w.batch, static_cast<int>(i))).u;
    if (order >= 1) out[i].field = out[i].phi.g;
  }
}

void HarmonicUnit::backward_batch(std::span<const double> params, std::span<const Point<2>> xs, int, Workspace& ws,
                                  std::span<const Jet<2>> phi_adj, std::span<const std::array<double, 2>> field_adj,
                                  std::span<double> grad) const {
  auto& w = static_cast<HarmonicWs&>(ws);
  if (xs.empty()) return;
  w.jets.resize(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    Jet<2> adj = phi_adj[i];
    add_field_adjoint<2>(adj, field_adj[i]);
    Jet<2, C>& cadj = w.jets[i];
    cadj.v = adj.v;
    for (std::size_t k = 0; k < 2; ++k) cadj.g[k] = adj.g[k];
    for (std::size_t k = 0; k < 4; ++k) cadj.h[k] = adj.h[k];
  }
  net_.backward_batch(params, w.batch, w.jets, grad);
}

// ---------------------------------------------------------------------------
// hPINN
// ---------------------------------------------------------------------------

template <int D>
Jet<D> hpinn_eval(const Jet<D>& mlp, const Jet<D>& dist, double c, double k) {
  if (!(k > 0.0)) throw Error("hpinn_eval: k must be positive");
  const Jet<D> e = exp(dist * (-k));
  return e * c + (1.0 - e) * mlp;
}

namespace {
template <int D>
struct HpinnWs : Unit<D>::Workspace {
  std::unique_ptr<typename Unit<D>::Workspace> inner;
  Jet<D> one_minus_e;
  std::vector<Jet<D>> one_minus_e_batch;
  std::vector<Jet<D>> m_adj;
  std::vector<std::array<double, D>> zero_fields;
};
}  // namespace

template <int D>
HpinnUnit<D>::HpinnUnit(MlpSpec spec, InputMap map, std::vector<BoundarySegment> wrapped, double k)
    : inner_(spec, map), wrapped_(std::move(wrapped)), k_(k) {
  if (wrapped_.empty()) throw Error("HpinnUnit: empty wrapped boundary");
  if (!(k > 0.0)) throw Error("HpinnUnit: k must be positive");
  c_ = wrapped_.front().value;
  for (const auto& s : wrapped_) {
    if (s.value != c_) throw IncompatibleError("HpinnUnit: wrapped boundary carries more than one value");
  }
}

template <int D>
std::unique_ptr<typename Unit<D>::Workspace> HpinnUnit<D>::workspace() const {
  auto w = std::make_unique<HpinnWs<D>>();
  w->inner = inner_.workspace();
  return w;
}

template <int D>
UnitOutput<D> HpinnUnit<D>::eval(std::span<const double> params, const Point<D>& x, int order,
                                 typename Base::Workspace& ws) const {
  auto& w = static_cast<HpinnWs<D>&>(ws);
  const UnitOutput<D> m = inner_.eval(params, x, order, *w.inner);
  const Jet<D> d = distance_jet<D>(wrapped_, x);
  const Jet<D> e = exp(d * (-k_));
  w.one_minus_e = 1.0 - e;
  UnitOutput<D> out;
  out.phi = e * c_ + m.phi * w.one_minus_e;
  if (order >= 1) out.field = out.phi.g;
  return out;
}

template <int D>
void HpinnUnit<D>::backward(std::span<const double> params, typename Base::Workspace& ws, const Jet<D>& phi_adj,
                            const std::array<double, D>& field_adj, std::span<double> grad) const {
  auto& w = static_cast<HpinnWs<D>&>(ws);
  Jet<D> adj = phi_adj;
  add_field_adjoint<D>(adj, field_adj);
  const Jet<D> m_adj = mul_adjoint<D>(w.one_minus_e, adj);
  inner_.backward(params, *w.inner, m_adj, std::array<double, D>{}, grad);
}

template <int D>
void HpinnUnit<D>::eval_batch(std::span<const double> params, std::span<const Point<D>> xs, int order,
                              typename Base::Workspace& ws, std::span<UnitOutput<D>> out) const {
  auto& w = static_cast<HpinnWs<D>&>(ws);
  inner_.eval_batch(params, xs, order, *w.inner, out);
  w.one_minus_e_batch.resize(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Jet<D> d = distance_jet<D>(wrapped_, xs[i]);
    const Jet<D> e = exp(d * (-k_));
    w.one_minus_e_batch[i] = 1.0 - e;
    out[i].phi = e * c_ + out[i].phi * w.one_minus_e_batch[i];
    if (order >= 1) out[i].field = out[i].phi.g;
  }
}

template <int D>
void HpinnUnit<D>::backward_batch(std::span<const double> params, std::span<const Point<D>> xs, int order,
                                  typename Base::Workspace& ws, std::span<const Jet<D>> phi_adj,
                                  std::span<const std::array<double, D>> field_adj, std::span<double> grad) const {
  auto& w = static_cast<HpinnWs<D>&>(ws);
  w.m_adj.resize(xs.size());
  w.zero_fields.assign(xs.size(), std::array<double, D>{});
  for (std::size_t i = 0; i < xs.size(); ++i) {
    Jet<D> adj = phi_adj[i];
    add_field_adjoint<D>(adj, field_adj[i]);
    w.m_adj[i] = mul_adjoint<D>(w.one_minus_e_batch[i], adj);
  }
  inner_.backward_batch(params, xs, order, *w.inner, w.m_adj, w.zero_fields, grad);
}

// ---------------------------------------------------------------------------
// CurlUnit
// ---------------------------------------------------------------------------

namespace {
template <int D>
struct CurlWs : Unit<D>::Workspace {
  typename Mlp<D, double>::Tape phi_tape;
  typename Mlp<D, double>::Tape a_tape;
  typename Mlp<D, double>::BatchTape phi_batch;
  typename Mlp<D, double>::BatchTape a_batch;
  std::vector<Jet<D>> jets;
  bool a_done = false;
};
}  // namespace

template <int D>
CurlUnit<D>::CurlUnit(MlpSpec phi_spec, MlpSpec a_spec, InputMap map)
    : phi_((phi_spec.input_dim = D, phi_spec.output_dim = 1, phi_spec)),
      a_((a_spec.input_dim = D, a_spec.output_dim = curl_components(D), a_spec)),
      map_(map) {}

template <int D>
std::vector<double> CurlUnit<D>::init(Rng& rng) const {
  std::vector<double> p = phi_.init(rng);
  const std::vector<double> a = a_.init(rng);
  p.insert(p.end(), a.begin(), a.end());
  return p;
}

template <int D>
std::unique_ptr<typename Unit<D>::Workspace> CurlUnit<D>::workspace() const {
  return std::make_unique<CurlWs<D>>();
}

template <int D>
UnitOutput<D> CurlUnit<D>::eval(std::span<const double> params, const Point<D>& x, int order,
                                typename Base::Workspace& ws) const {
  auto& w = static_cast<CurlWs<D>&>(ws);
  if (params.size() != param_count()) throw Error("CurlUnit::eval: parameter vector has the wrong length");
  const auto in = map_input<D>(map_, x);
  phi_.forward(params.first(phi_.param_count()), in, order, w.phi_tape);
  UnitOutput<D> out;
  out.phi = phi_.output(w.phi_tape);
  w.a_done = order >= 1;
  if (order >= 1) {
    a_.forward(params.subspan(phi_.param_count()), in, 1, w.a_tape);
    std::array<Jet<D>, curl_components(D)> a;
    for (int k = 0; k < curl_components(D); ++k) a[static_cast<std::size_t>(k)] = a_.output(w.a_tape, k);
    out.field = curl_field<D>(a);
  }
  return out;
}

template <int D>
void CurlUnit<D>::backward(std::span<const double> params, typename Base::Workspace& ws, const Jet<D>& phi_adj,
                           const std::array<double, D>& field_adj, std::span<double> grad) const {
  auto& w = static_cast<CurlWs<D>&>(ws);
  const std::size_t np = phi_.param_count();
  phi_.backward(params.first(np), w.phi_tape, std::span<const Jet<D>>(&phi_adj, 1), grad.first(np));
  if (!w.a_done) return;
  bool any = false;
  for (double f : field_adj) any = any || f != 0.0;
  if (!any) return;
  std::array<Jet<D>, curl_components(D)> a_adj{};
  for (const auto& t : curl_terms(D)) {
    a_adj[static_cast<std::size_t>(t.comp)].g[static_cast<std::size_t>(t.deriv)] +=
        t.sign * field_adj[static_cast<std::size_t>(t.field)];
  }
  a_.backward(params.subspan(np), w.a_tape, a_adj, grad.subspan(np));
}

template <int D>
void CurlUnit<D>::eval_batch(std::span<const double> params, std::span<const Point<D>> xs, int order,
                             typename Base::Workspace& ws, std::span<UnitOutput<D>> out) const {
  auto& w = static_cast<CurlWs<D>&>(ws);
  if (params.size() != param_count()) throw Error("CurlUnit::eval_batch: parameter vector has the wrong length");
  w.a_done = false;
  if (xs.empty()) return;
  const int n = static_cast<int>(xs.size());
  w.jets.resize(xs.size() * D);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto in = map_input<D>(map_, xs[i]);
    std::copy(in.begin(), in.end(), w.jets.begin() + static_cast<std::ptrdiff_t>(i * D));
  }
  phi_.forward_batch(params.first(phi_.param_count()), w.jets, n, order, w.phi_batch);
  if (order >= 1) a_.forward_batch(params.subspan(phi_.param_count()), w.jets, n, 1, w.a_batch);
  w.a_done = order >= 1;
  std::array<Jet<D>, curl_components(D)> a;
  for (int i = 0; i < n; ++i) {
    auto& o = out[static_cast<std::size_t>(i)];
    o.phi = phi_.batch_output(w.phi_batch, i);
    if (order >= 1) {
      for (int k = 0; k < curl_components(D); ++k) a[static_cast<std::size_t>(k)] = a_.batch_output(w.a_batch, i, k);
      o.field = curl_field<D>(a);
    }
  }
}

template <int D>
void CurlUnit<D>::backward_batch(std::span<const double> params, std::span<const Point<D>> xs, int,
                                 typename Base::Workspace& ws, std::span<const Jet<D>> phi_adj,
                                 std::span<const std::array<double, D>> field_adj, std::span<double> grad) const {
  auto& w = static_cast<CurlWs<D>&>(ws);
  if (xs.empty()) return;
  const std::size_t np = phi_.param_count();
  phi_.backward_batch(params.first(np), w.phi_batch, phi_adj, grad.first(np));
  if (!w.a_done) return;
  bool any = false;
  for (const auto& f : field_adj) {
    for (double v : f) any = any || v != 0.0;
  }
  if (!any) return;
  constexpr int nc = curl_components(D);
  w.jets.assign(xs.size() * nc, Jet<D>{});
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (const auto& t : curl_terms(D)) {
      w.jets[i * nc + static_cast<std::size_t>(t.comp)].g[static_cast<std::size_t>(t.deriv)] +=
          t.sign * field_adj[i][static_cast<std::size_t>(t.field)];
    }
  }
  a_.backward_batch(params.subspan(np), w.a_batch, w.jets, grad.subspan(np));
}

template <int D>
std::vector<Jet<D>> CurlUnit<D>::potential(std::span<const double> params, const Point<D>& x) const {
  typename Mlp<D, double>::Tape tape;
  const auto in = map_input<D>(map_, x);
  a_.forward(params.subspan(phi_.param_count()), in, 2, tape);
  std::vector<Jet<D>> a;
  for (int k = 0; k < curl_components(D); ++k) a.push_back(a_.output(tape, k));
  return a;
}

// ---------------------------------------------------------------------------
// QHoloUnit
// ---------------------------------------------------------------------------

namespace {
struct QHoloWs : Unit<2>::Workspace {
  std::vector<double> cached_params;
  QHoloSpectrum spectrum;
  std::vector<Point<2>> basis_points;
  std::vector<cplx> basis;  // exp(-(x + iy) pi E_m), point-major
};

void refresh_spectrum(QHoloWs& w, std::span<const double> params, std::size_t n, const QHoloConfig& cfg) {
  if (w.cached_params.size() == params.size() && std::equal(params.begin(), params.end(), w.cached_params.begin())) {
    return;
  }
  w.spectrum = qholo_spectrum(params.first(n), params.subspan(n, n), cfg);
  w.cached_params.assign(params.begin(), params.end());
}
}  // namespace

QHoloUnit::QHoloUnit(int qubits, int depth) : qubits_(qubits), depth_(depth) {
  if (qubits < 1 || qubits > 12) throw Error("QHoloUnit: qubit count must be in 1..12");
  if (depth < 1) throw Error("QHoloUnit: depth must be >= 1");
}

std::size_t QHoloUnit::angles_per_block() const { return VarBlock{qubits_, depth_}.angle_count(); }

std::size_t QHoloUnit::param_count() const { return 2 * angles_per_block() + 1; }

std::vector<double> QHoloUnit::init(Rng& rng) const {
  std::vector<double> p(param_count());
  for (std::size_t i = 0; i + 1 < p.size(); ++i) p[i] = rng.uniform(-std::numbers::pi, std::numbers::pi);
  p.back() = 1.0;
  return p;
}

std::unique_ptr<Unit<2>::Workspace> QHoloUnit::workspace() const { return std::make_unique<QHoloWs>(); }

UnitOutput<2> QHoloUnit::eval(std::span<const double> params, const Point<2>& x, int order, Workspace& ws) const {
  if (params.size() != param_count()) throw Error("QHoloUnit::eval: parameter vector has the wrong length");
  auto& w = static_cast<QHoloWs&>(ws);
  // The spectral coefficients depend on the angles only; reuse across points.
  refresh_spectrum(w, params, angles_per_block(), QHoloConfig{qubits_, depth_});
  const double scale = params.back();
  UnitOutput<2> out;
  if (order == 0) {
    out.phi = Jet<2>::constant(scale * w.spectrum.eval(x[0], x[1]));
  } else {
    out.phi = w.spectrum.jet(x[0], x[1]) * scale;
    out.field = out.phi.g;
  }
  return out;
}

void QHoloUnit::eval_batch(std::span<const double> params, std::span<const Point<2>> xs, int order, Workspace& ws,
                           std::span<UnitOutput<2>> out) const {
  if (order > 0) {
    Unit<2>::eval_batch(params, xs, order, ws, out);
    return;
  }
  if (params.size() != param_count()) throw Error("QHoloUnit::eval_batch: parameter vector has the wrong length");
  auto& w = static_cast<QHoloWs&>(ws);
  refresh_spectrum(w, params, angles_per_block(), QHoloConfig{qubits_, depth_});
  const std::size_t m = w.spectrum.coeffs.size();
  if (w.basis_points.size() != xs.size() || !std::equal(xs.begin(), xs.end(), w.basis_points.begin())) {
    w.basis_points.assign(xs.begin(), xs.end());
    w.basis.resize(xs.size() * m);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      for (std::size_t k = 0; k < m; ++k) {
        const double e = std::numbers::pi * w.spectrum.energies[k];
        w.basis[i * m + k] = std::polar(std::exp(-xs[i][0] * e), -xs[i][1] * e);
      }
    }
  }
  const double scale = params.back();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < m; ++k) s += (w.spectrum.coeffs[k] * w.basis[i * m + k]).real();
    out[i].phi = Jet<2>::constant(scale * s);
  }
}

void QHoloUnit::backward(std::span<const double>, Workspace&, const Jet<2>&, const std::array<double, 2>&,
                         std::span<double>) const {
  throw Error("QHoloUnit: angle gradients are taken by finite differences, not by backward()");
}

// ---------------------------------------------------------------------------
// PiecewiseNet
// ---------------------------------------------------------------------------

template <int D>
PiecewiseNet<D>::PiecewiseNet(std::vector<std::unique_ptr<Unit<D>>> units, std::vector<Domain> regions,
                              Domain domain)
    : units_(std::move(units)), regions_(std::move(regions)), domain_(std::move(domain)) {
  if (units_.empty()) throw Error("PiecewiseNet: no units");
  if (units_.size() > 1 && regions_.size() != units_.size()) {
    throw Error("PiecewiseNet: exactly one unit per region is required");
  }
  offsets_.push_back(0);
  for (const auto& u : units_) offsets_.push_back(offsets_.back() + u->param_count());
}

template <int D>
std::vector<double> PiecewiseNet<D>::init(Rng& rng) const {
  std::vector<double> p;
  p.reserve(param_count());
  for (std::size_t i = 0; i < units_.size(); ++i) {
    Rng sub = rng.fork(i);
    const auto q = units_[i]->init(sub);
    p.insert(p.end(), q.begin(), q.end());
  }
  return p;
}

template <int D>
typename PiecewiseNet<D>::Workspace PiecewiseNet<D>::workspace() const {
  Workspace ws;
  for (const auto& u : units_) ws.unit.push_back(u->workspace());
  return ws;
}

template <int D>
bool PiecewiseNet<D>::has_backward() const {
  return std::all_of(units_.begin(), units_.end(), [](const auto& u) { return u->has_backward(); });
}

template <int D>
bool PiecewiseNet<D>::exactly_harmonic() const {
  return std::all_of(units_.begin(), units_.end(), [](const auto& u) { return u->exactly_harmonic(); });
}

template <int D>
std::vector<int> PiecewiseNet<D>::owners(const Point<D>& x) const {
  const Pt p = to_pt<D>(x);
  if (units_.size() == 1) {
    if (D > 3 || domain_.contains_closed(p, 1e-9)) return {0};
    return {};
  }
  std::vector<int> out;
  for (std::size_t i = 0; i < regions_.size(); ++i) {
    if (regions_[i].contains_closed(p, 1e-9)) out.push_back(static_cast<int>(i));
  }
  return out;
}

template <int D>
UnitOutput<D> PiecewiseNet<D>::eval(std::span<const double> params, const Point<D>& x, int order,
                                    Workspace& ws) const {
  if (params.size() != param_count()) throw Error("PiecewiseNet::eval: parameter vector has the wrong length");
  ws.owners = owners(x);
  if (ws.owners.empty()) throw Error("PiecewiseNet::eval: point lies outside the domain");
  if (ws.owners.size() == 1) {
    const auto i = static_cast<std::size_t>(ws.owners[0]);
    return units_[i]->eval(slice(params, i), x, order, *ws.unit[i]);
  }
  UnitOutput<D> acc;
  const double w = 1.0 / static_cast<double>(ws.owners.size());
  for (int o : ws.owners) {
    const auto i = static_cast<std::size_t>(o);
    const UnitOutput<D> r = units_[i]->eval(slice(params, i), x, order, *ws.unit[i]);
    acc.phi = acc.phi + r.phi * w;
    for (int k = 0; k < D; ++k) acc.field[static_cast<std::size_t>(k)] += w * r.field[static_cast<std::size_t>(k)];
  }
  return acc;
}

template <int D>
void PiecewiseNet<D>::backward(std::span<const double> params, Workspace& ws, const Jet<D>& phi_adj,
                               const std::array<double, D>& field_adj, std::span<double> grad) const {
  const double w = 1.0 / static_cast<double>(ws.owners.size());
  Jet<D> pa = phi_adj;
  std::array<double, D> fa = field_adj;
  if (ws.owners.size() > 1) {
    pa = phi_adj * w;
    for (auto& f : fa) f *= w;
  }
  for (int o : ws.owners) {
    const auto i = static_cast<std::size_t>(o);
    units_[i]->backward(slice(params, i), *ws.unit[i], pa, fa, slice(grad, i));
  }
}

template <int D>
typename PiecewiseNet<D>::BatchWorkspace PiecewiseNet<D>::batch_workspace() const {
  BatchWorkspace ws;
  for (const auto& u : units_) ws.unit.push_back(u->workspace());
  ws.xs.resize(units_.size());
  ws.index.resize(units_.size());
  return ws;
}

template <int D>
void PiecewiseNet<D>::owner_queries(const Point<D>& x, std::vector<UnitQuery<D>>& queries,
                                    std::vector<double>& weights) const {
  const auto own = owners(x);
  if (own.empty()) throw Error("PiecewiseNet: point lies outside the domain");
  const double w = 1.0 / static_cast<double>(own.size());
  for (int o : own) {
    queries.push_back({o, x});
    weights.push_back(w);
  }
}

template <int D>
void PiecewiseNet<D>::eval_queries(std::span<const double> params, std::span<const UnitQuery<D>> queries, int order,
                                   BatchWorkspace& ws, std::vector<UnitOutput<D>>& out) const {
  if (params.size() != param_count()) throw Error("PiecewiseNet: parameter vector has the wrong length");
  if (ws.unit.size() != units_.size()) ws = batch_workspace();
  ws.order = order;
  for (auto& v : ws.xs) v.clear();
  for (auto& v : ws.index) v.clear();
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const auto u = static_cast<std::size_t>(queries[q].unit);
    if (u >= units_.size()) throw Error("PiecewiseNet: query names a missing unit");
    ws.xs[u].push_back(queries[q].x);
    ws.index[u].push_back(q);
  }
  out.resize(queries.size());
  for (std::size_t u = 0; u < units_.size(); ++u) {
    if (ws.xs[u].empty()) continue;
    ws.scratch.resize(ws.xs[u].size());
    units_[u]->eval_batch(slice(params, u), ws.xs[u], order, *ws.unit[u], ws.scratch);
    for (std::size_t k = 0; k < ws.index[u].size(); ++k) out[ws.index[u][k]] = ws.scratch[k];
  }
}

template <int D>
void PiecewiseNet<D>::backward_queries(std::span<const double> params, std::span<const UnitQuery<D>> queries,
                                       BatchWorkspace& ws, std::span<const Jet<D>> phi_adj,
                                       std::span<const std::array<double, D>> field_adj,
                                       std::span<double> grad) const {
  if (phi_adj.size() != queries.size() || field_adj.size() != queries.size()) {
    throw Error("PiecewiseNet::backward_queries: one adjoint per query is required");
  }
  for (std::size_t u = 0; u < units_.size(); ++u) {
    if (ws.xs[u].empty()) continue;
    ws.phi_adj.resize(ws.index[u].size());
    ws.field_adj.resize(ws.index[u].size());
    for (std::size_t k = 0; k < ws.index[u].size(); ++k) {
      ws.phi_adj[k] = phi_adj[ws.index[u][k]];
      ws.field_adj[k] = field_adj[ws.index[u][k]];
    }
    units_[u]->backward_batch(slice(params, u), ws.xs[u], ws.order, *ws.unit[u], ws.phi_adj, ws.field_adj,
                              slice(grad, u));
  }
}

template class RealUnit<2>;
template class RealUnit<3>;
template class RealUnit<4>;
template class HpinnUnit<2>;
template class HpinnUnit<3>;
template class CurlUnit<2>;
template class CurlUnit<3>;
template class CurlUnit<4>;
template class PiecewiseNet<2>;
template class PiecewiseNet<3>;
template Jet<2> hpinn_eval<2>(const Jet<2>&, const Jet<2>&, double, double);
template Jet<3> hpinn_eval<3>(const Jet<3>&, const Jet<3>&, double, double);

}  // namespace harmonia
