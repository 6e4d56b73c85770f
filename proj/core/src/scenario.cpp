#include "harmonia/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "harmonia/error.hpp"

namespace harmonia {

const char* to_string(Preset p) { return p == Preset::paper ? "paper" : "fast"; }

namespace {

const std::string kIds[] = {"electrostatics", "heat_box", "heater", "robot", "pipe3d"};

std::vector<BoundarySegment> box_sides(double x0, double y0, double x1, double y1, double bottom, double right,
                                       double top, double left) {
  return {
      BoundarySegment::segment({x0, y0, 0}, {x1, y0, 0}, bottom, "bottom"),
      BoundarySegment::segment({x1, y0, 0}, {x1, y1, 0}, right, "right"),
      BoundarySegment::segment({x1, y1, 0}, {x0, y1, 0}, top, "top"),
      BoundarySegment::segment({x0, y1, 0}, {x0, y0, 0}, left, "left"),
  };
}

Scenario electrostatics(Preset) {
  Scenario s;
  s.id = "electrostatics";
  s.domain = Domain::rect({0, 0, 1, 1});
  s.boundary = box_sides(0, 0, 1, 1, 1.0, 0.0, 0.0, 0.0);
  s.dielectric = true;
  s.materials = {Domain::rect({0, 0, 1, 0.5}), Domain::rect({0, 0.5, 1, 1})};
  s.material_interface = make_interface(BoundarySegment::segment({0, 0.5, 0}, {1, 0.5, 0}, 0.0, "dielectric"), 0, 1,
                                        s.materials);
  s.eps1 = 1.0;
  s.eps2 = 0.01;
  s.oracle = {OracleSpec::Kind::finite_difference, 1.0 / 128.0, 1e-10};
  s.eval_n = 128;
  return s;
}

Scenario heat_box(Preset) {
  Scenario s;
  s.id = "heat_box";
  s.domain = Domain::rect({0, 0, 1, 1});
  s.boundary = box_sides(0, 0, 1, 1, 0.0, 0.0, 0.0, 1.0);
  s.oracle = {OracleSpec::Kind::analytic_box, 0.0, 0.0};
  s.eval_n = 128;
  s.eval_min_x = 0.1;
  return s;
}

Scenario heater(Preset preset) {
  Scenario s;
  s.id = "heater";
  const double side = 4.0;
  const double r = side / std::sqrt(3.0);
  const double pi = std::acos(-1.0);
  Polygon tri;
  for (int k = 0; k < 3; ++k) {
    const double a = pi / 2 + 2 * pi * k / 3;
    tri.push_back({5.0 + r * std::cos(a), 5.0 + r * std::sin(a), 0.0});
  }
  s.domain = Domain::rect_minus_polygon({0, 0, 10, 10}, tri);
  s.boundary = box_sides(0, 0, 10, 10, 0.0, 0.0, 0.0, 0.0);
  const Polygon& hole = s.domain.poly();
  for (std::size_t i = 0; i < hole.size(); ++i) {
    s.boundary.push_back(
        BoundarySegment::segment(hole[i], hole[(i + 1) % hole.size()], 1.0, "heater" + std::to_string(i)));
  }
  s.decomposition = heater_decomposition(s.domain);
  s.oracle = {OracleSpec::Kind::finite_difference, preset == Preset::paper ? 10.0 / 512.0 : 10.0 / 256.0, 1e-10};
  s.eval_n = preset == Preset::paper ? 512 : 128;
  return s;
}

Scenario robot(Preset) {
  Scenario s;
  s.id = "robot";
  s.domain = Domain::rect_union({{0, 0, 0.5, 0.6}, {0.5, 0.4, 1, 1}});
  s.boundary = {
      BoundarySegment::segment({0, 0, 0}, {0.5, 0, 0}, -1.0, "start"),
      BoundarySegment::insulated_segment({0.5, 0, 0}, {0.5, 0.4, 0}, "wall0"),
      BoundarySegment::insulated_segment({0.5, 0.4, 0}, {1, 0.4, 0}, "wall1"),
      BoundarySegment::insulated_segment({1, 0.4, 0}, {1, 1, 0}, "wall2"),
      BoundarySegment::segment({1, 1, 0}, {0.5, 1, 0}, 1.0, "goal"),
      BoundarySegment::insulated_segment({0.5, 1, 0}, {0.5, 0.6, 0}, "wall3"),
      BoundarySegment::insulated_segment({0.5, 0.6, 0}, {0, 0.6, 0}, "wall4"),
      BoundarySegment::insulated_segment({0, 0.6, 0}, {0, 0, 0}, "wall5"),
  };
  s.oracle = {OracleSpec::Kind::finite_difference, 1.0 / 160.0, 1e-10};
  s.eval_n = 64;
  for (double x : {0.15, 0.2, 0.25, 0.3, 0.35}) s.path_starts.push_back({x, 0.05, 0.0});
  return s;
}

Scenario pipe3d(Preset preset) {
  Scenario s;
  s.id = "pipe3d";
  s.dim = 3;
  const Pt lo{0, 0, 0}, hi{1, 1, 1};
  s.domain = Domain::cube(lo, hi);
  s.boundary = {
      BoundarySegment::face(0, 0.0, lo, hi, 1.0, "inlet"),  BoundarySegment::face(0, 1.0, lo, hi, -1.0, "outlet"),
      BoundarySegment::face(1, 0.0, lo, hi, 0.0, "y0"),     BoundarySegment::face(1, 1.0, lo, hi, 0.0, "y1"),
      BoundarySegment::face(2, 0.0, lo, hi, 0.0, "z0"),     BoundarySegment::face(2, 1.0, lo, hi, 0.0, "z1"),
  };
  s.oracle = {OracleSpec::Kind::finite_difference, preset == Preset::paper ? 1.0 / 64.0 : 1.0 / 32.0, 1e-10};
  s.eval_n = preset == Preset::paper ? 64 : 32;
  return s;
}

}  // namespace

ProblemTraits Scenario::traits() const {
  ProblemTraits t;
  t.dim = dim;
  t.decomposed = decomposition.has_value();
  t.dielectric = dielectric;
  t.insulated = std::any_of(boundary.begin(), boundary.end(),
                            [](const BoundarySegment& b) { return b.kind == BoundaryKind::insulated; });
  return t;
}

double Scenario::permittivity(const Pt& p) const {
  if (!dielectric || !material_interface) return 1.0;
  const double y0 = material_interface->segment.a[1];
  if (std::abs(p[1] - y0) < 1e-12) return 0.5 * (eps1 + eps2);
  return p[1] < y0 ? eps1 : eps2;
}

std::span<const std::string> scenario_ids() { return kIds; }

Scenario make_scenario(const std::string& id, Preset preset) {
  if (id == "electrostatics") return electrostatics(preset);
  if (id == "heat_box") return heat_box(preset);
  if (id == "heater") return heater(preset);
  if (id == "robot") return robot(preset);
  if (id == "pipe3d") return pipe3d(preset);
  throw Error("unknown scenario '" + id + "'");
}

// ---------------------------------------------------------------------------
// Oracle
// ---------------------------------------------------------------------------

Oracle Oracle::analytic(std::function<double(const Pt&)> f) {
  Oracle o;
  o.f_ = std::move(f);
  return o;
}

Oracle Oracle::grid(FieldGrid g) {
  Oracle o;
  o.grid_ = std::move(g);
  return o;
}

bool Oracle::covers(const Pt& p) const { return grid_ ? grid_can_sample(*grid_, p) : static_cast<bool>(f_); }

double Oracle::value(const Pt& p) const {
  if (grid_) return grid_sample(*grid_, p);
  if (!f_) throw Error("Oracle: empty");
  return f_(p);
}

std::array<double, 3> Oracle::gradient(const Pt& p) const {
  if (grid_) return grid_gradient(*grid_, p);
  const double h = 1e-6;
  std::array<double, 3> g{};
  for (std::size_t k = 0; k < 2; ++k) {
    Pt a = p, b = p;
    a[k] += h;
    b[k] -= h;
    g[k] = (f_(a) - f_(b)) / (2 * h);
  }
  return g;
}

Oracle build_oracle(const Scenario& s, SorReport* report) {
  if (s.oracle.kind == OracleSpec::Kind::analytic_box) {
    return Oracle::analytic([](const Pt& p) { return analytic_box(p[0], p[1]); });
  }
  SorOptions o;
  o.tol = s.oracle.tol;
  const Pt lo = s.domain.lo(), hi = s.domain.hi();
  double extent = 0.0;
  for (int a = 0; a < s.dim; ++a) extent = std::max(extent, hi[static_cast<std::size_t>(a)] - lo[static_cast<std::size_t>(a)]);
  o.omega = optimal_omega(static_cast<int>(std::lround(extent / s.oracle.h)));
  if (s.dielectric) o.permittivity = [&s](const Pt& p) { return s.permittivity(p); };
  return Oracle::grid(fd_laplace_solve(s.domain, s.boundary, s.oracle.h, o, report));
}

FieldGrid eval_grid_layout(const Scenario& s) {
  FieldGrid g;
  g.dim = s.dim;
  const Pt lo = s.domain.lo(), hi = s.domain.hi();
  double extent = 0.0;
  for (int a = 0; a < s.dim; ++a) extent = std::max(extent, hi[static_cast<std::size_t>(a)] - lo[static_cast<std::size_t>(a)]);
  g.h = extent / s.eval_n;
  for (int a = 0; a < 3; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    if (a < s.dim) {
      g.origin[ua] = lo[ua] + 0.5 * g.h;
      g.n[ua] = static_cast<int>(std::lround((hi[ua] - lo[ua]) / g.h));
    } else {
      g.n[ua] = 1;
    }
  }
  const std::size_t total = static_cast<std::size_t>(g.n[0]) * static_cast<std::size_t>(g.n[1]) *
                            static_cast<std::size_t>(g.n[2]);
  g.values.assign(total, 0.0);
  g.mask.assign(total, 0);
  return g;
}

std::vector<Pt> eval_points(const Scenario& s, const Oracle& oracle, std::vector<std::size_t>* indices) {
  const FieldGrid g = eval_grid_layout(s);
  std::vector<Pt> out;
  for (int k = 0; k < g.n[2]; ++k) {
    for (int j = 0; j < g.n[1]; ++j) {
      for (int i = 0; i < g.n[0]; ++i) {
        const Pt p = g.node(i, j, k);
        if (p[0] < s.eval_min_x) continue;
        if (!s.domain.contains(p) || !oracle.covers(p)) continue;
        out.push_back(p);
        if (indices) indices->push_back(g.index(i, j, k));
      }
    }
  }
  if (out.empty()) throw Error("eval_points: no evaluation points for scenario " + s.id);
  return out;
}

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

ModelOptions::ModelOptions() {
  real_spec.activation = Activation::tanh;
  complex_spec.activation = Activation::sin;
}

namespace {

InputMap input_map_for(const Scenario& s) {
  InputMap m;
  const Pt lo = s.domain.lo(), hi = s.domain.hi();
  double half = 0.0;
  for (int a = 0; a < s.dim; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    m.center[ua] = 0.5 * (lo[ua] + hi[ua]);
    half = std::max(half, 0.5 * (hi[ua] - lo[ua]));
  }
  m.scale = half;
  return m;
}

bool touches(const BoundarySegment& seg, const Domain& region) {
  for (const Pt& p : sample_boundary(seg, 11)) {
    if (region.contains_closed(p, 1e-9)) return true;
  }
  return false;
}

/// The Dirichlet pieces an hPINN unit on `region` builds in exactly: the
/// zero-valued ones touching the region, else those carrying the first value.
std::vector<BoundarySegment> hpinn_wrap(const Scenario& s, const Domain& region) {
  std::vector<BoundarySegment> zero, first;
  double first_value = 0.0;
  bool have_first = false;
  for (const auto& b : s.boundary) {
    if (b.kind != BoundaryKind::dirichlet || !touches(b, region)) continue;
    if (b.value == 0.0) zero.push_back(b);
    if (!have_first) {
      first_value = b.value;
      have_first = true;
    }
    if (b.value == first_value) first.push_back(b);
  }
  if (!zero.empty()) return zero;
  if (first.empty()) throw IncompatibleError("hpinn: region has no Dirichlet boundary to build in");
  return first;
}

template <int D>
Point<D> pt(const Pt& p) {
  return to_point<D>(p);
}

template <int D>
std::array<double, D> vec(const Pt& p) {
  std::array<double, D> r{};
  for (int i = 0; i < D; ++i) r[static_cast<std::size_t>(i)] = p[static_cast<std::size_t>(i)];
  return r;
}

std::string fmt(double v) { return fmt17(v); }

}  // namespace

template <int D>
Model<D> build_model(const Scenario& s, Method method, const ModelOptions& opts) {
  if (s.dim != D) throw Error("build_model: scenario dimension does not match");
  const ProblemTraits traits = s.traits();
  Model<D> m;
  m.terms = method_terms(method, traits);
  const InputMap map = input_map_for(s);

  const bool split = method == Method::multiholomorphic || method == Method::xpinn;
  std::vector<Domain> regions;
  if (split) {
    regions = s.decomposition->subdomains;
  } else if (s.dielectric) {
    regions = s.materials;
  }
  const std::size_t nunits = regions.empty() ? 1 : regions.size();

  std::vector<std::vector<BoundarySegment>> wraps(nunits);
  std::vector<std::unique_ptr<Unit<D>>> units;
  for (std::size_t r = 0; r < nunits; ++r) {
    const Domain& region = regions.empty() ? s.domain : regions[r];
    switch (method) {
      case Method::pinn:
      case Method::xpinn:
        units.push_back(std::make_unique<RealUnit<D>>(opts.real_spec, map));
        m.param_kind = nunits > 1 ? ParamKind::piecewise : ParamKind::real;
        break;
      case Method::hpinn: {
        wraps[r] = hpinn_wrap(s, region);
        units.push_back(std::make_unique<HpinnUnit<D>>(opts.real_spec, map, wraps[r], opts.hpinn_k));
        std::string names;
        for (const auto& w : wraps[r]) names += (names.empty() ? "" : "+") + w.name;
        m.notes.push_back("hpinn region " + std::to_string(r) + " wraps " + names + " at value " +
                          fmt(wraps[r].front().value) + ", k = " + fmt(opts.hpinn_k));
        m.param_kind = nunits > 1 ? ParamKind::piecewise : ParamKind::real;
        break;
      }
      case Method::curlnet:
        units.push_back(std::make_unique<CurlUnit<D>>(opts.real_spec, opts.real_spec, map));
        m.param_kind = nunits > 1 ? ParamKind::piecewise : ParamKind::curl_pair;
        break;
      case Method::holomorphic:
      case Method::multiholomorphic:
        if constexpr (D == 2) {
          units.push_back(std::make_unique<HarmonicUnit>(opts.complex_spec, map));
          m.param_kind = nunits > 1 ? ParamKind::piecewise : ParamKind::complex;
        }
        break;
      case Method::qholomorphic:
        if constexpr (D == 2) {
          units.push_back(std::make_unique<QHoloUnit>(opts.qubits, opts.depth));
          m.param_kind = ParamKind::quantum;
          m.notes.push_back("qholomorphic: " + std::to_string(opts.qubits) + " qubits, depth " +
                            std::to_string(opts.depth) +
                            ", feature map exp(-(x+iy) pi H), H = sum_j 2^j Z_j + 2^N, readout Re<0|psi> times a "
                            "trainable scale, raw coordinates");
        }
        break;
    }
  }
  if (units.size() != nunits) throw IncompatibleError(std::string(to_string(method)) + " is not available in this dimension");
  if (method == Method::curlnet) m.field_mode = FieldMode::curl;
  m.net = std::make_unique<PiecewiseNet<D>>(std::move(units), regions, s.domain);

  const auto has = [&](const char* t) { return std::find(m.terms.begin(), m.terms.end(), t) != m.terms.end(); };

  // Dirichlet samples: 100 per line (a 10 x 10 grid per face in 3D).
  for (const auto& b : s.boundary) {
    if (b.kind != BoundaryKind::dirichlet) continue;
    const int n = b.shape == BoundarySegment::Shape::face ? opts.face_points : opts.boundary_points;
    for (const Pt& p : sample_boundary(b, n)) {
      if (method == Method::hpinn) {
        // Points where every owning unit is exact carry no information.
        const auto own = m.net->owners(pt<D>(p));
        bool exact = !own.empty();
        for (int o : own) exact = exact && distance_to(wraps[static_cast<std::size_t>(o)], p) < 1e-12;
        if (exact) continue;
      }
      m.plan.dirichlet.push_back({pt<D>(p), b.value});
    }
  }
  if (has("neumann")) {
    for (const auto& b : s.boundary) {
      if (b.kind != BoundaryKind::insulated) continue;
      const int n = b.shape == BoundarySegment::Shape::face ? opts.face_points : opts.boundary_points;
      for (const Pt& p : sample_boundary(b, n)) m.plan.insulated.push_back({pt<D>(p), vec<D>(b.normal())});
    }
  }
  if (has("laplacian") || has("curl_match")) {
    for (std::size_t r = 0; r < nunits; ++r) {
      const Domain& region = regions.empty() ? s.domain : regions[r];
      for (const Pt& p : sample_interior(region, opts.collocation, opts.collocation_seed + r)) {
        m.plan.collocation.push_back({pt<D>(p), static_cast<int>(r)});
      }
    }
    m.notes.push_back(std::to_string(opts.collocation) + " collocation points per region, sampling seed " +
                      std::to_string(opts.collocation_seed) + " + region index");
  }
  if (has("interface")) {
    for (const auto& iface : s.decomposition->interfaces) {
      for (const Pt& p : sample_boundary(iface.segment, opts.interface_points)) {
        m.plan.interface.push_back({pt<D>(p), iface.first, iface.second, vec<D>(iface.normal)});
      }
    }
  }
  if (has("dielectric")) {
    const auto& iface = *s.material_interface;
    for (const Pt& p : sample_boundary(iface.segment, opts.interface_points)) {
      m.plan.dielectric.push_back({pt<D>(p), iface.first, iface.second, vec<D>(iface.normal)});
    }
    m.plan.eps1 = s.eps1;
    m.plan.eps2 = s.eps2;
  }
  return m;
}

template <int D>
std::vector<Jet<D>> field_jets(const PiecewiseNet<D>& net, std::span<const double> params, std::span<const Pt> points,
                               int order) {
  std::vector<Jet<D>> out(points.size());
  auto ws = net.batch_workspace();
  std::vector<UnitQuery<D>> q;
  std::vector<double> w;
  std::vector<std::size_t> owner;
  std::vector<UnitOutput<D>> res;
  constexpr std::size_t chunk = 4096;
  for (std::size_t start = 0; start < points.size(); start += chunk) {
    const std::size_t end = std::min(points.size(), start + chunk);
    q.clear();
    w.clear();
    owner.clear();
    for (std::size_t i = start; i < end; ++i) {
      net.owner_queries(to_point<D>(points[i]), q, w);
      owner.resize(q.size(), i);
    }
    net.eval_queries(params, q, order, ws, res);
    for (std::size_t k = 0; k < q.size(); ++k) out[owner[k]] = out[owner[k]] + res[k].phi * w[k];
  }
  return out;
}

template Model<2> build_model<2>(const Scenario&, Method, const ModelOptions&);
template Model<3> build_model<3>(const Scenario&, Method, const ModelOptions&);
template std::vector<Jet<2>> field_jets<2>(const PiecewiseNet<2>&, std::span<const double>, std::span<const Pt>, int);
template std::vector<Jet<3>> field_jets<3>(const PiecewiseNet<3>&, std::span<const double>, std::span<const Pt>, int);

}  // namespace harmonia
