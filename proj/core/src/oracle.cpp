#include "harmonia/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "harmonia/error.hpp"

namespace harmonia {

double analytic_box(double x, double y) {
  const double pi = std::numbers::pi;
  if (x <= 0.0) return (y > 0.0 && y < 1.0) ? 1.0 : 0.0;
  return 2.0 / pi * std::atan(std::sin(pi * y) / std::sinh(pi * x));
}

double analytic_box_series(double x, double y, int terms) {
  const double pi = std::numbers::pi;
  double s = 0.0;
  for (int t = 0; t < terms; ++t) {
    const int n = 2 * t + 1;
    s += 4.0 / (n * pi) * std::exp(-n * pi * x) * std::sin(n * pi * y);
  }
  return s;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double optimal_omega(int intervals) {
  if (intervals < 2) return 1.0;
  return 2.0 / (1.0 + std::sin(std::numbers::pi / intervals));
}

// ---------------------------------------------------------------------------
// SOR
// ---------------------------------------------------------------------------

namespace {

enum class NodeKind : std::uint8_t { free_node, fixed, fixed_masked, void_node };

}  // namespace

FieldGrid fd_laplace_solve(const Domain& domain, std::span<const BoundarySegment> boundary, double h,
                           const SorOptions& opts, SorReport* report) {
  if (!(h > 0.0)) throw Error("fd_laplace_solve: h must be positive");
  if (!(opts.omega > 0.0 && opts.omega < 2.0)) throw Error("fd_laplace_solve: omega must lie in (0, 2)");
  if (!(opts.tol > 0.0)) throw Error("fd_laplace_solve: tol must be positive");
  const int dim = domain.dim();
  for (const auto& s : boundary) {
    if (s.dim() != dim) throw Error("fd_laplace_solve: boundary piece dimension differs from the domain");
  }

  FieldGrid g;
  g.dim = dim;
  g.h = h;
  g.origin = domain.lo();
  const Pt hi = domain.hi();
  for (int a = 0; a < dim; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    const double cells = (hi[ua] - g.origin[ua]) / h;
    const long nc = std::lround(cells);
    if (std::abs(cells - static_cast<double>(nc)) > 1e-6) {
      throw Error("fd_laplace_solve: h must divide the bounding box");
    }
    g.n[ua] = static_cast<int>(nc) + 1;
  }
  if (dim == 2) g.n[2] = 1;
  const std::size_t total = static_cast<std::size_t>(g.n[0]) * static_cast<std::size_t>(g.n[1]) *
                            static_cast<std::size_t>(g.n[2]);
  g.values.assign(total, 0.0);
  g.mask.assign(total, 0);
  std::vector<NodeKind> kind(total, NodeKind::void_node);

  // Classify nodes.
  const double on_tol = 1e-9 * h;
  bool has_dirichlet = false;
  for (const auto& s : boundary) has_dirichlet = has_dirichlet || s.kind == BoundaryKind::dirichlet;
  if (!has_dirichlet) throw Error("fd_laplace_solve: no Dirichlet boundary");
  for (int k = 0; k < g.n[2]; ++k) {
    for (int j = 0; j < g.n[1]; ++j) {
      for (int i = 0; i < g.n[0]; ++i) {
        const std::size_t id = g.index(i, j, k);
        const Pt p = g.node(i, j, k);
        double best = INFINITY;
        double value = 0.0;
        bool on_insulated = false;
        for (const auto& s : boundary) {
          const double d = s.distance(p);
          if (s.kind == BoundaryKind::insulated) {
            on_insulated = on_insulated || d <= on_tol;
            continue;
          }
          if (d < best) {
            best = d;
            value = s.value;
          }
        }
        const bool inside = domain.contains_closed(p, on_tol);
        if (best <= on_tol) {
          kind[id] = NodeKind::fixed;
          g.values[id] = value;
          g.mask[id] = 1;
        } else if (best < 0.5 * h + on_tol && domain.kind() == Domain::Kind::rect_minus_polygon) {
          kind[id] = NodeKind::fixed_masked;
          g.values[id] = value;
        } else if (inside) {
          kind[id] = NodeKind::free_node;
          g.mask[id] = 1;
        } else if (domain.kind() == Domain::Kind::rect_minus_polygon && domain.rects()[0].contains_closed(p, on_tol)) {
          kind[id] = NodeKind::fixed_masked;  // inside the hole
          g.values[id] = value;
        }
        (void)on_insulated;
      }
    }
  }

  // Stencil: neighbour offsets and weights per free node.
  struct Stencil {
    std::size_t id;
    std::array<std::size_t, 6> nb;
    std::array<double, 6> w;
    int count;
    double wsum;
  };
  std::vector<Stencil> st;
  const std::array<std::array<int, 3>, 6> dirs = {{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}}};
  const int ndir = 2 * dim;
  auto valid_node = [&](int i, int j, int k) {
    return i >= 0 && j >= 0 && k >= 0 && i < g.n[0] && j < g.n[1] && k < g.n[2] &&
           kind[g.index(i, j, k)] != NodeKind::void_node;
  };
  for (int k = 0; k < g.n[2]; ++k) {
    for (int j = 0; j < g.n[1]; ++j) {
      for (int i = 0; i < g.n[0]; ++i) {
        const std::size_t id = g.index(i, j, k);
        if (kind[id] != NodeKind::free_node) continue;
        Stencil s{id, {}, {}, 0, 0.0};
        const Pt p = g.node(i, j, k);
        for (int d = 0; d < ndir; ++d) {
          const auto& o = dirs[static_cast<std::size_t>(d)];
          int a = i + o[0], b = j + o[1], c = k + o[2];
          if (!valid_node(a, b, c)) {
            // Zero normal flux: reflect through the wall.
            a = i - o[0];
            b = j - o[1];
            c = k - o[2];
            if (!valid_node(a, b, c)) {
              throw Error("fd_laplace_solve: node has no neighbours on either side along an axis");
            }
          }
          double w = 1.0;
          if (opts.permittivity) {
            const Pt mid = {p[0] + 0.5 * h * o[0], p[1] + 0.5 * h * o[1], p[2] + 0.5 * h * o[2]};
            w = opts.permittivity(mid);
            if (!(w > 0.0)) throw Error("fd_laplace_solve: permittivity must be positive");
          }
          s.nb[static_cast<std::size_t>(s.count)] = g.index(a, b, c);
          s.w[static_cast<std::size_t>(s.count)] = w;
          s.wsum += w;
          ++s.count;
        }
        st.push_back(s);
      }
    }
  }

  SorReport rep;
  double* u = g.values.data();
  for (long it = 1; it <= opts.max_iterations; ++it) {
    double maxd = 0.0;
    for (const auto& s : st) {
      double acc = 0.0;
      for (int q = 0; q < s.count; ++q) acc += s.w[static_cast<std::size_t>(q)] * u[s.nb[static_cast<std::size_t>(q)]];
      const double delta = opts.omega * (acc / s.wsum - u[s.id]);
      u[s.id] += delta;
      maxd = std::max(maxd, std::abs(delta));
    }
    rep.iterations = it;
    rep.max_update = maxd;
    if (maxd < opts.tol) break;
  }
  double res = 0.0;
  for (const auto& s : st) {
    double acc = 0.0;
    for (int q = 0; q < s.count; ++q) acc += s.w[static_cast<std::size_t>(q)] * u[s.nb[static_cast<std::size_t>(q)]];
    res = std::max(res, std::abs(acc / s.wsum - u[s.id]));
  }
  rep.residual = res;
  if (report) *report = rep;
  if (rep.max_update >= opts.tol) {
    throw ConvergenceError("fd_laplace_solve: no convergence after " + std::to_string(rep.iterations) +
                               " iterations (max update " + fmt17(rep.max_update) + ")",
                           rep.residual);
  }
  return g;
}

FieldGrid fd_laplace_solve(const Domain& domain, std::span<const BoundarySegment> boundary, double h, double omega,
                           double tol) {
  SorOptions o;
  o.omega = omega;
  o.tol = tol;
  return fd_laplace_solve(domain, boundary, h, o);
}

// ---------------------------------------------------------------------------
// Interpolation
// ---------------------------------------------------------------------------

namespace {

struct Cell {
  std::array<int, 3> i0{};
  std::array<double, 3> t{};
  bool ok = false;
};

Cell locate(const FieldGrid& g, const Pt& x) {
  Cell c;
  c.ok = true;
  for (int a = 0; a < 3; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    if (a >= g.dim) {
      c.i0[ua] = 0;
      c.t[ua] = 0.0;
      continue;
    }
    const double s = (x[ua] - g.origin[ua]) / g.h;
    const double top = g.n[ua] - 1;
    if (s < -1e-9 || s > top + 1e-9) {
      c.ok = false;
      return c;
    }
    int i = static_cast<int>(std::floor(s));
    i = std::clamp(i, 0, std::max(0, g.n[ua] - 2));
    c.i0[ua] = i;
    c.t[ua] = std::clamp(s - i, 0.0, 1.0);
  }
  return c;
}

template <class F>
void for_corners(const FieldGrid& g, const Cell& c, F&& f) {
  const int nk = g.dim == 3 ? 2 : 1;
  for (int dk = 0; dk < nk; ++dk) {
    for (int dj = 0; dj < 2; ++dj) {
      for (int di = 0; di < 2; ++di) f(di, dj, dk, g.index(c.i0[0] + di, c.i0[1] + dj, c.i0[2] + dk));
    }
  }
}

}  // namespace

bool grid_can_sample(const FieldGrid& g, const Pt& x) {
  const Cell c = locate(g, x);
  if (!c.ok) return false;
  bool ok = true;
  for_corners(g, c, [&](int di, int dj, int dk, std::size_t id) {
    // A zero interpolation weight makes the corner irrelevant.
    const double w = (di ? c.t[0] : 1 - c.t[0]) * (dj ? c.t[1] : 1 - c.t[1]) * (dk ? c.t[2] : 1 - c.t[2]);
    if (w > 0.0 && !g.mask[id]) ok = false;
  });
  return ok;
}

double grid_sample(const FieldGrid& g, const Pt& x) {
  if (!grid_can_sample(g, x)) throw Error("grid_sample: query outside the valid region of the grid");
  const Cell c = locate(g, x);
  double v = 0.0;
  for_corners(g, c, [&](int di, int dj, int dk, std::size_t id) {
    const double w = (di ? c.t[0] : 1 - c.t[0]) * (dj ? c.t[1] : 1 - c.t[1]) * (dk ? c.t[2] : 1 - c.t[2]);
    if (w > 0.0) v += w * g.values[id];
  });
  return v;
}

std::array<double, 3> grid_gradient(const FieldGrid& g, const Pt& x) {
  if (!grid_can_sample(g, x)) throw Error("grid_gradient: query outside the valid region of the grid");
  const Cell c = locate(g, x);
  std::array<double, 3> gr{};
  for_corners(g, c, [&](int di, int dj, int dk, std::size_t id) {
    const double wx = di ? c.t[0] : 1 - c.t[0];
    const double wy = dj ? c.t[1] : 1 - c.t[1];
    const double wz = dk ? c.t[2] : 1 - c.t[2];
    const double sx = di ? 1.0 : -1.0, sy = dj ? 1.0 : -1.0, sz = dk ? 1.0 : -1.0;
    const double v = g.values[id];
    gr[0] += sx * wy * wz * v / g.h;
    gr[1] += wx * sy * wz * v / g.h;
    if (g.dim == 3) gr[2] += wx * wy * sz * v / g.h;
  });
  return gr;
}

// ---------------------------------------------------------------------------
// Metrics and export
// ---------------------------------------------------------------------------

Metrics metrics(std::span<const double> field, std::span<const double> oracle, std::span<const double> laplacian) {
  if (field.empty()) throw Error("metrics: empty evaluation set");
  if (field.size() != oracle.size() || field.size() != laplacian.size()) throw Error("metrics: size mismatch");
  Metrics m;
  double sq = 0.0, ab = 0.0, lap = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    const double d = field[i] - oracle[i];
    sq += d * d;
    ab += std::abs(d);
    lap += std::abs(laplacian[i]);
  }
  const double n = static_cast<double>(field.size());
  m.rmse = std::sqrt(sq / n);
  m.paper_mae = ab / n;
  m.mean_abs_laplacian = lap / n;
  return m;
}

void write_grid_csv(const FieldGrid& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("write_grid_csv: cannot open " + path);
  out << (g.dim == 3 ? "x,y,z,value\n" : "x,y,value\n");
  for (int k = 0; k < g.n[2]; ++k) {
    for (int j = 0; j < g.n[1]; ++j) {
      for (int i = 0; i < g.n[0]; ++i) {
        const std::size_t id = g.index(i, j, k);
        if (!g.mask[id]) continue;
        const Pt p = g.node(i, j, k);
        out << fmt17(p[0]) << ',' << fmt17(p[1]) << ',';
        if (g.dim == 3) out << fmt17(p[2]) << ',';
        out << fmt17(g.values[id]) << '\n';
      }
    }
  }
}

void write_grid_text(const FieldGrid& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("write_grid_text: cannot open " + path);
  if (g.dim == 3) {
    out << g.n[0] << ' ' << g.n[1] << ' ' << g.n[2] << ' ' << fmt17(g.h) << ' ' << fmt17(g.origin[0]) << ' '
        << fmt17(g.origin[1]) << ' ' << fmt17(g.origin[2]) << '\n';
  } else {
    out << g.n[0] << ' ' << g.n[1] << ' ' << fmt17(g.h) << ' ' << fmt17(g.origin[0]) << ' ' << fmt17(g.origin[1])
        << '\n';
  }
  for (int k = 0; k < g.n[2]; ++k) {
    for (int j = 0; j < g.n[1]; ++j) {
      for (int i = 0; i < g.n[0]; ++i) {
        const std::size_t id = g.index(i, j, k);
        if (i) out << ' ';
        out << (g.mask[id] ? fmt17(g.values[id]) : std::string("nan"));
      }
      out << '\n';
    }
  }
}

}  // namespace harmonia
