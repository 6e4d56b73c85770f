#include "harmonia/losses.hpp"

#include <algorithm>
#include <cmath>

#include "harmonia/error.hpp"

namespace harmonia {

namespace {

constexpr Method kMethods[] = {Method::pinn,     Method::hpinn,           Method::holomorphic, Method::curlnet,
                               Method::multiholomorphic, Method::xpinn, Method::qholomorphic};

template <class S>
void require_nonempty(std::span<const S> s, const char* what) {
  if (s.empty()) throw Error(std::string(what) + ": empty sample set");
}

template <int D>
std::array<double, D> pick_field(const UnitOutput<D>& o, FieldMode mode) {
  return mode == FieldMode::curl ? o.field : o.phi.g;
}

/// Unit-level queries with one adjoint slot each.
template <int D>
struct Queries {
  explicit Queries(std::size_t reserve) { q.reserve(reserve); }

  void add(int unit, const Point<D>& x) { q.push_back({unit, x}); }

  void eval(const PiecewiseNet<D>& net, std::span<const double> params, int order) {
    ws = net.batch_workspace();
    net.eval_queries(params, q, order, ws, out);
    phi_adj.assign(q.size(), Jet<D>{});
    field_adj.assign(q.size(), std::array<double, D>{});
  }

  void backward(const PiecewiseNet<D>& net, std::span<const double> params, std::span<double> grad) {
    net.backward_queries(params, q, ws, phi_adj, field_adj, grad);
  }

  std::vector<UnitQuery<D>> q;
  typename PiecewiseNet<D>::BatchWorkspace ws;
  std::vector<UnitOutput<D>> out;
  std::vector<Jet<D>> phi_adj;
  std::vector<std::array<double, D>> field_adj;
};

/// The composite (owner-averaged) value at sample points.
template <int D>
struct Composite {
  Composite(const PiecewiseNet<D>& n, std::size_t count) : net(n), queries(count) {}

  void add(std::size_t sample, const Point<D>& x) {
    net.owner_queries(x, queries.q, weights);
    sample_of.resize(queries.q.size(), sample);
  }

  void eval(std::span<const double> params, int order) {
    queries.eval(net, params, order);
    std::size_t n = 0;
    for (std::size_t s : sample_of) n = std::max(n, s + 1);
    phi.assign(n, Jet<D>{});
    phi_adj.assign(n, Jet<D>{});
    for (std::size_t k = 0; k < queries.q.size(); ++k) phi[sample_of[k]] = phi[sample_of[k]] + queries.out[k].phi * weights[k];
  }

  void backward(std::span<const double> params, std::span<double> grad) {
    for (std::size_t k = 0; k < queries.q.size(); ++k) queries.phi_adj[k] = phi_adj[sample_of[k]] * weights[k];
    queries.backward(net, params, grad);
  }

  const PiecewiseNet<D>& net;
  Queries<D> queries;
  std::vector<double> weights;
  std::vector<std::size_t> sample_of;
  std::vector<Jet<D>> phi;
  std::vector<Jet<D>> phi_adj;
};

}  // namespace

const char* to_string(Method m) {
  switch (m) {
    case Method::pinn: return "pinn";
    case Method::hpinn: return "hpinn";
    case Method::holomorphic: return "holomorphic";
    case Method::curlnet: return "curlnet";
    case Method::multiholomorphic: return "multiholomorphic";
    case Method::xpinn: return "xpinn";
    case Method::qholomorphic: return "qholomorphic";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  for (Method m : kMethods) {
    if (s == to_string(m)) return m;
  }
  throw Error("unknown method '" + s + "'");
}

std::span<const Method> all_methods() { return kMethods; }

// ---------------------------------------------------------------------------
// Terms
// ---------------------------------------------------------------------------

template <int D>
double dirichlet_loss(const PiecewiseNet<D>& net, std::span<const double> params,
                      std::span<const DirichletSample<D>> samples, std::span<double> grad, double weight) {
  require_nonempty(samples, "dirichlet_loss");
  Composite<D> c(net, samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) c.add(i, samples[i].x);
  c.eval(params, 0);
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  double sum = 0.0;
  std::vector<double> r(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    r[i] = c.phi[i].v - samples[i].value;
    sum += r[i] * r[i];
  }
  if (!grad.empty()) {
    for (std::size_t i = 0; i < samples.size(); ++i) c.phi_adj[i].v = weight * 2.0 * r[i] * inv_n;
    c.backward(params, grad);
  }
  return sum * inv_n;
}

template <int D>
double laplacian_loss(const PiecewiseNet<D>& net, std::span<const double> params,
                      std::span<const CollocationSample<D>> samples, std::span<double> grad, double weight) {
  require_nonempty(samples, "laplacian_loss");
  Queries<D> q(samples.size());
  for (const auto& s : samples) q.add(s.region, s.x);
  q.eval(net, params, 2);
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double lap = q.out[i].phi.laplacian();
    sum += lap * lap;
    for (int k = 0; k < D; ++k) q.phi_adj[i].hess(k, k) = weight * 2.0 * lap * inv_n;
  }
  if (!grad.empty()) q.backward(net, params, grad);
  return sum * inv_n;
}

template <int D>
double interface_loss(const PiecewiseNet<D>& net, std::span<const double> params,
                      std::span<const PairSample<D>> samples, std::span<double> grad, double weight) {
  require_nonempty(samples, "interface_loss");
  Queries<D> q(2 * samples.size());
  for (const auto& s : samples) {
    if (s.first == s.second) throw Error("interface_loss: a sample must join two different regions");
    q.add(s.first, s.x);
    q.add(s.second, s.x);
  }
  q.eval(net, params, 1);
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  const double c = weight * 2.0 * inv_n;
  double sum = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& oa = q.out[2 * i];
    const auto& ob = q.out[2 * i + 1];
    const double dv = oa.phi.v - ob.phi.v;
    double term = dv * dv;
    Jet<D> adj;
    adj.v = c * dv;
    for (int k = 0; k < D; ++k) {
      const auto uk = static_cast<std::size_t>(k);
      const double dg = oa.phi.g[uk] - ob.phi.g[uk];
      term += dg * dg;
      adj.g[uk] = c * dg;
    }
    sum += term;
    q.phi_adj[2 * i] = adj;
    q.phi_adj[2 * i + 1] = -adj;
  }
  if (!grad.empty()) q.backward(net, params, grad);
  return sum * inv_n;
}

template <int D>
double curl_match_loss(const PiecewiseNet<D>& net, std::span<const double> params,
                       std::span<const CollocationSample<D>> samples, std::span<double> grad, double weight) {
  require_nonempty(samples, "curl_match_loss");
  Queries<D> q(samples.size());
  for (const auto& s : samples) {
    if (net.unit(static_cast<std::size_t>(s.region)).kind() != "curlnet") {
      throw Error("curl_match_loss: region unit is not a CurlNet pair");
    }
    q.add(s.region, s.x);
  }
  q.eval(net, params, 1);
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  const double c = weight * 2.0 * inv_n;
  double sum = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& out = q.out[i];
    for (int k = 0; k < D; ++k) {
      const auto uk = static_cast<std::size_t>(k);
      const double r = out.phi.g[uk] - out.field[uk];
      sum += r * r;
      q.phi_adj[i].g[uk] = c * r;
      q.field_adj[i][uk] = -c * r;
    }
  }
  if (!grad.empty()) q.backward(net, params, grad);
  return sum * inv_n;
}

template <int D>
double dielectric_loss(const PiecewiseNet<D>& net, std::span<const double> params,
                       std::span<const PairSample<D>> samples, double eps1, double eps2, FieldMode mode,
                       std::span<double> grad, double weight) {
  require_nonempty(samples, "dielectric_loss");
  if (!(eps1 > 0.0 && eps2 > 0.0)) throw Error("dielectric_loss: permittivities must be positive");
  Queries<D> q(2 * samples.size());
  for (const auto& s : samples) {
    double nn = 0.0;
    for (double v : s.normal) nn += v * v;
    if (std::abs(nn - 1.0) > 1e-9) throw Error("dielectric_loss: sample normal missing or not unit length");
    q.add(s.first, s.x);
    q.add(s.second, s.x);
  }
  q.eval(net, params, 1);
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  const double c = weight * 2.0 * inv_n;
  double sum = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    const auto& oa = q.out[2 * i];
    const auto& ob = q.out[2 * i + 1];
    const auto ea = pick_field<D>(oa, mode);
    const auto eb = pick_field<D>(ob, mode);
    double fa = 0.0, fb = 0.0;
    for (int k = 0; k < D; ++k) {
      fa += s.normal[static_cast<std::size_t>(k)] * ea[static_cast<std::size_t>(k)];
      fb += s.normal[static_cast<std::size_t>(k)] * eb[static_cast<std::size_t>(k)];
    }
    const double dv = oa.phi.v - ob.phi.v;
    const double df = eps1 * fa - eps2 * fb;
    sum += dv * dv + df * df;
    Jet<D>& adj_a = q.phi_adj[2 * i];
    Jet<D>& adj_b = q.phi_adj[2 * i + 1];
    adj_a.v = c * dv;
    adj_b.v = -c * dv;
    for (int k = 0; k < D; ++k) {
      const auto uk = static_cast<std::size_t>(k);
      const double ga = c * df * eps1 * s.normal[uk];
      const double gb = -c * df * eps2 * s.normal[uk];
      if (mode == FieldMode::curl) {
        q.field_adj[2 * i][uk] = ga;
        q.field_adj[2 * i + 1][uk] = gb;
      } else {
        adj_a.g[uk] = ga;
        adj_b.g[uk] = gb;
      }
    }
  }
  if (!grad.empty()) q.backward(net, params, grad);
  return sum * inv_n;
}

template <int D>
double neumann_loss(const PiecewiseNet<D>& net, std::span<const double> params,
                    std::span<const WallSample<D>> samples, std::span<double> grad, double weight) {
  require_nonempty(samples, "neumann_loss");
  Composite<D> c(net, samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) c.add(i, samples[i].x);
  c.eval(params, 1);
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& nrm = samples[i].normal;
    double f = 0.0;
    for (int k = 0; k < D; ++k) f += nrm[static_cast<std::size_t>(k)] * c.phi[i].g[static_cast<std::size_t>(k)];
    sum += f * f;
    for (int k = 0; k < D; ++k) {
      c.phi_adj[i].g[static_cast<std::size_t>(k)] = weight * 2.0 * f * inv_n * nrm[static_cast<std::size_t>(k)];
    }
  }
  if (!grad.empty()) c.backward(params, grad);
  return sum * inv_n;
}

// ---------------------------------------------------------------------------
// Composites
// ---------------------------------------------------------------------------

bool LossBundle::has(const std::string& name) const {
  return std::any_of(terms.begin(), terms.end(), [&](const LossTerm& t) { return t.name == name; });
}

double LossBundle::value(const std::string& name) const {
  for (const auto& t : terms) {
    if (t.name == name) return t.value;
  }
  throw Error("LossBundle: no term named '" + name + "'");
}

void check_compatible(Method method, const ProblemTraits& traits) {
  const bool split = method == Method::multiholomorphic || method == Method::xpinn;
  if (split && !traits.decomposed) {
    throw IncompatibleError(std::string(to_string(method)) +
                            " needs a decomposition into simply-connected subdomains; this scenario has none");
  }
  if (split && traits.dielectric) {
    throw IncompatibleError(std::string(to_string(method)) + " is not defined on the two-material problem");
  }
  if ((method == Method::holomorphic || method == Method::qholomorphic || method == Method::multiholomorphic) &&
      traits.dim != 2) {
    throw IncompatibleError(std::string(to_string(method)) +
                            " builds phi as the real part of a function of z = x + iy and exists only in 2D; "
                            "this scenario is " + std::to_string(traits.dim) + "D");
  }
  if (method == Method::qholomorphic && traits.dielectric) {
    throw IncompatibleError("qholomorphic is not coupled to the dielectric interface loss");
  }
}

std::vector<std::string> method_terms(Method method, const ProblemTraits& traits) {
  check_compatible(method, traits);
  std::vector<std::string> t;
  switch (method) {
    case Method::pinn: t = {"dirichlet", "laplacian"}; break;
    case Method::hpinn: t = {"laplacian", "dirichlet"}; break;
    case Method::holomorphic: t = {"dirichlet"}; break;
    case Method::curlnet: t = {"dirichlet", "curl_match"}; break;
    case Method::multiholomorphic: t = {"dirichlet", "interface"}; break;
    case Method::xpinn: t = {"dirichlet", "laplacian", "interface"}; break;
    case Method::qholomorphic: t = {"dirichlet"}; break;
  }
  if (traits.dielectric) t.emplace_back("dielectric");
  if (traits.insulated) t.emplace_back("neumann");
  return t;
}

template <int D>
LossEvaluator<D>::LossEvaluator(const PiecewiseNet<D>& net, SamplePlan<D> plan, std::vector<std::string> terms,
                                FieldMode field_mode)
    : net_(net), plan_(std::move(plan)), terms_(std::move(terms)), weights_(terms_.size(), 1.0), mode_(field_mode) {
  static const char* known[] = {"dirichlet", "laplacian", "interface", "curl_match", "dielectric", "neumann"};
  for (const auto& t : terms_) {
    if (std::find(std::begin(known), std::end(known), t) == std::end(known)) {
      throw Error("LossEvaluator: unknown term '" + t + "'");
    }
  }
}

template <int D>
void LossEvaluator<D>::set_weight(const std::string& name, double w) {
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (terms_[i] == name) {
      weights_[i] = w;
      return;
    }
  }
  throw Error("LossEvaluator: no term named '" + name + "'");
}

template <int D>
LossBundle LossEvaluator<D>::evaluate_exact(std::span<const double> params, std::span<double> grad) const {
  LossBundle b;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const std::string& name = terms_[i];
    const double w = weights_[i];
    double v = 0.0;
    if (name == "dirichlet") {
      if (plan_.dirichlet.empty()) continue;
      v = dirichlet_loss<D>(net_, params, plan_.dirichlet, grad, w);
    } else if (name == "laplacian") {
      v = laplacian_loss<D>(net_, params, plan_.collocation, grad, w);
    } else if (name == "interface") {
      v = interface_loss<D>(net_, params, plan_.interface, grad, w);
    } else if (name == "curl_match") {
      v = curl_match_loss<D>(net_, params, plan_.collocation, grad, w);
    } else if (name == "dielectric") {
      v = dielectric_loss<D>(net_, params, plan_.dielectric, plan_.eps1, plan_.eps2, mode_, grad, w);
    } else if (name == "neumann") {
      v = neumann_loss<D>(net_, params, plan_.insulated, grad, w);
    }
    b.terms.push_back({name, w, v});
    b.total += w * v;
  }
  return b;
}

template <int D>
LossBundle LossEvaluator<D>::evaluate(std::span<const double> params, std::vector<double>* grad) const {
  if (params.size() != net_.param_count()) throw Error("LossEvaluator: parameter vector has the wrong length");
  if (!grad) return evaluate_exact(params, {});
  grad->assign(params.size(), 0.0);
  if (net_.has_backward()) {
    LossBundle b = evaluate_exact(params, *grad);
    if (!std::isfinite(b.total)) throw NonFiniteError("loss is not finite");
    for (std::size_t i = 0; i < grad->size(); ++i) {
      if (!std::isfinite((*grad)[i])) throw NonFiniteError("non-finite gradient component", static_cast<std::ptrdiff_t>(i));
    }
    return b;
  }
  LossBundle b = evaluate_exact(params, {});
  std::vector<double> p(params.begin(), params.end());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double keep = p[i];
    p[i] = keep + fd_step;
    const double fp = evaluate_exact(p, {}).total;
    p[i] = keep - fd_step;
    const double fm = evaluate_exact(p, {}).total;
    p[i] = keep;
    (*grad)[i] = (fp - fm) / (2.0 * fd_step);
    if (!std::isfinite((*grad)[i])) throw NonFiniteError("non-finite gradient component", static_cast<std::ptrdiff_t>(i));
  }
  return b;
}

#define HARMONIA_LOSSES(D)                                                                                        \
  template double dirichlet_loss<D>(const PiecewiseNet<D>&, std::span<const double>,                            \
                                    std::span<const DirichletSample<D>>, std::span<double>, double);            \
  template double laplacian_loss<D>(const PiecewiseNet<D>&, std::span<const double>,                            \
                                    std::span<const CollocationSample<D>>, std::span<double>, double);          \
  template double interface_loss<D>(const PiecewiseNet<D>&, std::span<const double>,                            \
                                    std::span<const PairSample<D>>, std::span<double>, double);                 \
  template double curl_match_loss<D>(const PiecewiseNet<D>&, std::span<const double>,                           \
                                     std::span<const CollocationSample<D>>, std::span<double>, double);         \
  template double dielectric_loss<D>(const PiecewiseNet<D>&, std::span<const double>,                           \
                                     std::span<const PairSample<D>>, double, double, FieldMode,                 \
                                     std::span<double>, double);                                                \
  template double neumann_loss<D>(const PiecewiseNet<D>&, std::span<const double>, std::span<const WallSample<D>>, \
                                  std::span<double>, double);                                                   \
  template class LossEvaluator<D>;

HARMONIA_LOSSES(2)
HARMONIA_LOSSES(3)

#undef HARMONIA_LOSSES

}  // namespace harmonia
