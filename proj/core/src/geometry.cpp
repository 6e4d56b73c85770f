#include "harmonia/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "harmonia/error.hpp"
#include "harmonia/rng.hpp"

namespace harmonia {

namespace {

double seg_distance(const Pt& a, const Pt& b, const Pt& p) {
  const double dx = b[0] - a[0], dy = b[1] - a[1];
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p[0] - (a[0] + t * dx), p[1] - (a[1] + t * dy));
}

double cross(const Pt& o, const Pt& a, const Pt& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

bool segments_intersect(const Pt& p1, const Pt& p2, const Pt& q1, const Pt& q2) {
  const double d1 = cross(q1, q2, p1), d2 = cross(q1, q2, p2);
  const double d3 = cross(p1, p2, q1), d4 = cross(p1, p2, q2);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

bool rect_union_closed(const std::vector<Rect>& rects, const Pt& p, double tol) {
  return std::any_of(rects.begin(), rects.end(), [&](const Rect& r) { return r.contains_closed(p, tol); });
}

}  // namespace

double polygon_area(const Polygon& poly) {
  double s = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Pt& a = poly[i];
    const Pt& b = poly[(i + 1) % poly.size()];
    s += a[0] * b[1] - b[0] * a[1];
  }
  return 0.5 * s;
}

bool point_in_polygon(const Polygon& poly, const Pt& p) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Pt& a = poly[i];
    const Pt& b = poly[j];
    if ((a[1] > p[1]) != (b[1] > p[1])) {
      const double xc = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
      if (p[0] < xc) inside = !inside;
    }
  }
  return inside;
}

double distance_to_polygon_boundary(const Polygon& poly, const Pt& p) {
  double best = INFINITY;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    best = std::min(best, seg_distance(poly[i], poly[(i + 1) % poly.size()], p));
  }
  return best;
}

bool polygon_is_simple(const Polygon& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n])) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Domain
// ---------------------------------------------------------------------------

Domain Domain::rect(Rect r) {
  if (!(r.x1 > r.x0 && r.y1 > r.y0)) throw Error("Domain::rect: empty rectangle");
  Domain d;
  d.kind_ = Kind::rect;
  d.rects_ = {r};
  d.lo_ = {r.x0, r.y0, 0};
  d.hi_ = {r.x1, r.y1, 0};
  return d;
}

Domain Domain::rect_union(std::vector<Rect> rects) {
  if (rects.empty()) throw Error("Domain::rect_union: no rectangles");
  Domain d;
  d.kind_ = Kind::rect_union;
  d.lo_ = {INFINITY, INFINITY, 0};
  d.hi_ = {-INFINITY, -INFINITY, 0};
  for (const auto& r : rects) {
    if (!(r.x1 > r.x0 && r.y1 > r.y0)) throw Error("Domain::rect_union: empty rectangle");
    d.lo_[0] = std::min(d.lo_[0], r.x0);
    d.lo_[1] = std::min(d.lo_[1], r.y0);
    d.hi_[0] = std::max(d.hi_[0], r.x1);
    d.hi_[1] = std::max(d.hi_[1], r.y1);
  }
  d.rects_ = std::move(rects);
  return d;
}

Domain Domain::rect_minus_polygon(Rect outer, Polygon hole) {
  Domain d = rect(outer);
  if (hole.size() < 3) throw Error("Domain::rect_minus_polygon: hole needs at least three vertices");
  for (const auto& v : hole) {
    if (!(v[0] > outer.x0 && v[0] < outer.x1 && v[1] > outer.y0 && v[1] < outer.y1)) {
      throw Error("Domain::rect_minus_polygon: hole must lie strictly inside the rectangle");
    }
  }
  if (polygon_area(hole) < 0) std::reverse(hole.begin(), hole.end());
  d.kind_ = Kind::rect_minus_polygon;
  d.poly_ = std::move(hole);
  return d;
}

Domain Domain::polygon(Polygon poly) {
  if (poly.size() < 3) throw Error("Domain::polygon: need at least three vertices");
  if (polygon_area(poly) < 0) std::reverse(poly.begin(), poly.end());
  Domain d;
  d.kind_ = Kind::polygon;
  d.lo_ = {INFINITY, INFINITY, 0};
  d.hi_ = {-INFINITY, -INFINITY, 0};
  for (const auto& v : poly) {
    d.lo_[0] = std::min(d.lo_[0], v[0]);
    d.lo_[1] = std::min(d.lo_[1], v[1]);
    d.hi_[0] = std::max(d.hi_[0], v[0]);
    d.hi_[1] = std::max(d.hi_[1], v[1]);
  }
  d.poly_ = std::move(poly);
  return d;
}

Domain Domain::cube(Pt lo, Pt hi) {
  for (int i = 0; i < 3; ++i) {
    if (!(hi[static_cast<std::size_t>(i)] > lo[static_cast<std::size_t>(i)])) throw Error("Domain::cube: empty box");
  }
  Domain d;
  d.kind_ = Kind::cube;
  d.lo_ = lo;
  d.hi_ = hi;
  return d;
}

bool Domain::contains(const Pt& p) const {
  switch (kind_) {
    case Kind::rect: {
      const Rect& r = rects_[0];
      return p[0] > r.x0 && p[0] < r.x1 && p[1] > r.y0 && p[1] < r.y1;
    }
    case Kind::rect_union: {
      // Interior of a union of closed rectangles: a small neighbourhood of p
      // must stay inside. Shared edges between rectangles count as interior.
      constexpr double eps = 1e-9;
      if (!rect_union_closed(rects_, p, 0.0)) return false;
      for (int dx = -1; dx <= 1; ++dx) {
        for (int dy = -1; dy <= 1; ++dy) {
          if (!rect_union_closed(rects_, {p[0] + dx * eps, p[1] + dy * eps, 0}, 0.0)) return false;
        }
      }
      return true;
    }
    case Kind::rect_minus_polygon: {
      const Rect& r = rects_[0];
      const bool in_rect = p[0] > r.x0 && p[0] < r.x1 && p[1] > r.y0 && p[1] < r.y1;
      if (!in_rect) return false;
      if (point_in_polygon(poly_, p)) return false;
      return distance_to_polygon_boundary(poly_, p) > 0.0;
    }
    case Kind::polygon:
      return point_in_polygon(poly_, p) && distance_to_polygon_boundary(poly_, p) > 0.0;
    case Kind::cube:
      for (std::size_t i = 0; i < 3; ++i) {
        if (!(p[i] > lo_[i] && p[i] < hi_[i])) return false;
      }
      return true;
  }
  return false;
}

bool Domain::contains_closed(const Pt& p, double tol) const {
  switch (kind_) {
    case Kind::rect:
      return rects_[0].contains_closed(p, tol);
    case Kind::rect_union:
      return rect_union_closed(rects_, p, tol);
    case Kind::rect_minus_polygon:
      if (!rects_[0].contains_closed(p, tol)) return false;
      return !point_in_polygon(poly_, p) || distance_to_polygon_boundary(poly_, p) <= tol;
    case Kind::polygon:
      return point_in_polygon(poly_, p) || distance_to_polygon_boundary(poly_, p) <= tol;
    case Kind::cube:
      for (std::size_t i = 0; i < 3; ++i) {
        if (p[i] < lo_[i] - tol || p[i] > hi_[i] + tol) return false;
      }
      return true;
  }
  return false;
}

double Domain::measure() const {
  switch (kind_) {
    case Kind::rect:
      return rects_[0].area();
    case Kind::rect_union: {
      double a = 0.0;
      for (const auto& r : rects_) a += r.area();
      if (rects_.size() > 2) throw Error("Domain::measure: unions of more than two rectangles are not supported");
      if (rects_.size() == 2) {
        const Rect& r = rects_[0];
        const Rect& s = rects_[1];
        const double w = std::max(0.0, std::min(r.x1, s.x1) - std::max(r.x0, s.x0));
        const double h = std::max(0.0, std::min(r.y1, s.y1) - std::max(r.y0, s.y0));
        a -= w * h;
      }
      return a;
    }
    case Kind::rect_minus_polygon:
      return rects_[0].area() - std::abs(polygon_area(poly_));
    case Kind::polygon:
      return std::abs(polygon_area(poly_));
    case Kind::cube:
      return (hi_[0] - lo_[0]) * (hi_[1] - lo_[1]) * (hi_[2] - lo_[2]);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Boundary pieces
// ---------------------------------------------------------------------------

BoundarySegment BoundarySegment::segment(Pt a, Pt b, double value, std::string name) {
  BoundarySegment s;
  s.shape = Shape::segment;
  s.a = a;
  s.b = b;
  s.value = value;
  s.name = std::move(name);
  if (s.length() <= 0.0) throw Error("BoundarySegment: degenerate segment");
  return s;
}

BoundarySegment BoundarySegment::insulated_segment(Pt a, Pt b, std::string name) {
  BoundarySegment s = segment(a, b, 0.0, std::move(name));
  s.kind = BoundaryKind::insulated;
  return s;
}

BoundarySegment BoundarySegment::face(int axis, double coord, Pt lo, Pt hi, double value, std::string name) {
  if (axis < 0 || axis > 2) throw Error("BoundarySegment::face: axis must be 0, 1 or 2");
  BoundarySegment s;
  s.shape = Shape::face;
  s.axis = axis;
  s.a = lo;
  s.b = hi;
  s.a[static_cast<std::size_t>(axis)] = coord;
  s.b[static_cast<std::size_t>(axis)] = coord;
  s.value = value;
  s.name = std::move(name);
  for (int i = 0; i < 3; ++i) {
    if (i != axis && !(s.b[static_cast<std::size_t>(i)] > s.a[static_cast<std::size_t>(i)])) {
      throw Error("BoundarySegment::face: degenerate face");
    }
  }
  return s;
}

double BoundarySegment::length() const {
  if (shape == Shape::segment) return std::hypot(b[0] - a[0], b[1] - a[1]);
  double area = 1.0;
  for (int i = 0; i < 3; ++i) {
    if (i != axis) area *= b[static_cast<std::size_t>(i)] - a[static_cast<std::size_t>(i)];
  }
  return area;
}

Pt BoundarySegment::nearest(const Pt& p) const {
  if (shape == Shape::segment) {
    const double dx = b[0] - a[0], dy = b[1] - a[1];
    const double t = std::clamp(((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / (dx * dx + dy * dy), 0.0, 1.0);
    return {a[0] + t * dx, a[1] + t * dy, 0.0};
  }
  Pt q{};
  for (std::size_t i = 0; i < 3; ++i) q[i] = std::clamp(p[i], std::min(a[i], b[i]), std::max(a[i], b[i]));
  return q;
}

double BoundarySegment::distance(const Pt& p) const {
  if (shape == Shape::segment) return seg_distance(a, b, p);
  const Pt q = nearest(p);
  return std::sqrt((p[0] - q[0]) * (p[0] - q[0]) + (p[1] - q[1]) * (p[1] - q[1]) + (p[2] - q[2]) * (p[2] - q[2]));
}

Pt BoundarySegment::normal() const {
  if (shape == Shape::face) {
    Pt n{};
    n[static_cast<std::size_t>(axis)] = 1.0;
    return n;
  }
  const double len = length();
  return {-(b[1] - a[1]) / len, (b[0] - a[0]) / len, 0.0};
}

std::vector<int> DomainDecomposition::owners(const Pt& p, double tol) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < subdomains.size(); ++i) {
    if (subdomains[i].contains_closed(p, tol)) out.push_back(static_cast<int>(i));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

std::vector<Pt> sample_boundary(const BoundarySegment& seg, int n) {
  if (n < 2) throw Error("sample_boundary: need at least two points");
  std::vector<Pt> out;
  if (seg.shape == BoundarySegment::Shape::segment) {
    if (seg.length() <= 0.0) throw Error("sample_boundary: degenerate segment");
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / (n - 1);
      out.push_back({seg.a[0] + t * (seg.b[0] - seg.a[0]), seg.a[1] + t * (seg.b[1] - seg.a[1]), 0.0});
    }
    // Pin the far endpoint exactly.
    out.back() = {seg.b[0], seg.b[1], 0.0};
    return out;
  }
  int u = (seg.axis + 1) % 3, v = (seg.axis + 2) % 3;
  if (u > v) std::swap(u, v);
  const auto uu = static_cast<std::size_t>(u), vv = static_cast<std::size_t>(v);
  out.reserve(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Pt p = seg.a;
      p[uu] = i == n - 1 ? seg.b[uu] : seg.a[uu] + (seg.b[uu] - seg.a[uu]) * i / (n - 1);
      p[vv] = j == n - 1 ? seg.b[vv] : seg.a[vv] + (seg.b[vv] - seg.a[vv]) * j / (n - 1);
      out.push_back(p);
    }
  }
  return out;
}

std::vector<Pt> sample_interior(const Domain& domain, int n, std::uint64_t seed) {
  if (n < 0) throw Error("sample_interior: negative sample count");
  if (domain.measure() <= 0.0) throw Error("sample_interior: domain has no interior");
  Rng rng(seed);
  const Pt lo = domain.lo(), hi = domain.hi();
  const int dim = domain.dim();
  std::vector<Pt> out;
  out.reserve(static_cast<std::size_t>(n));
  std::size_t trials = 0;
  while (static_cast<int>(out.size()) < n) {
    Pt p{};
    for (int i = 0; i < dim; ++i) p[static_cast<std::size_t>(i)] = rng.uniform(lo[static_cast<std::size_t>(i)], hi[static_cast<std::size_t>(i)]);
    ++trials;
    if (domain.contains(p)) out.push_back(p);
    if (trials >= 1000 && static_cast<double>(out.size()) < 0.01 * static_cast<double>(trials)) {
      throw Error("sample_interior: acceptance rate below 1%; the domain looks malformed");
    }
  }
  return out;
}

double distance_to(std::span<const BoundarySegment> set, const Pt& p) {
  double best = INFINITY;
  for (const auto& s : set) best = std::min(best, s.distance(p));
  return best;
}

Interface make_interface(const BoundarySegment& segment, int first, int second,
                         const std::vector<Domain>& subdomains) {
  Interface iface;
  iface.segment = segment;
  iface.first = std::min(first, second);
  iface.second = std::max(first, second);
  Pt n = segment.normal();
  const Pt mid = {0.5 * (segment.a[0] + segment.b[0]), 0.5 * (segment.a[1] + segment.b[1]), 0.0};
  const double probe = 1e-6 * std::max(1.0, segment.length());
  const Pt ahead = {mid[0] + probe * n[0], mid[1] + probe * n[1], 0.0};
  const Domain& hi = subdomains.at(static_cast<std::size_t>(iface.second));
  if (!hi.contains_closed(ahead, 0.0)) {
    n[0] = -n[0];
    n[1] = -n[1];
  }
  iface.normal = n;
  return iface;
}

Pt interface_normal(const Interface& iface, const Pt& p) {
  if (iface.segment.distance(p) > 1e-9) throw Error("interface_normal: point is not on the interface");
  return iface.normal;
}

DomainDecomposition heater_decomposition(const Domain& domain) {
  if (domain.kind() != Domain::Kind::rect_minus_polygon) {
    throw IncompatibleError("heater_decomposition: expects a rectangle with a polygonal hole");
  }
  const Rect box = domain.rects()[0];
  Polygon hole = domain.poly();  // CCW
  const std::size_t nv = hole.size();
  Pt c{0, 0, 0};
  for (const auto& v : hole) {
    c[0] += v[0] / static_cast<double>(nv);
    c[1] += v[1] / static_cast<double>(nv);
  }
  auto angle_of = [&](const Pt& p) {
    double a = std::atan2(p[1] - c[1], p[0] - c[0]);
    if (a < 0) a += 2 * std::numbers::pi;
    return a;
  };
  // Order vertices by angle around the centroid.
  std::sort(hole.begin(), hole.end(), [&](const Pt& a, const Pt& b) { return angle_of(a) < angle_of(b); });

  // Ray from each vertex away from the centroid to the box boundary.
  std::vector<Pt> hits;
  for (const auto& v : hole) {
    const double dx = v[0] - c[0], dy = v[1] - c[1];
    double t = INFINITY;
    if (dx > 0) t = std::min(t, (box.x1 - v[0]) / dx);
    if (dx < 0) t = std::min(t, (box.x0 - v[0]) / dx);
    if (dy > 0) t = std::min(t, (box.y1 - v[1]) / dy);
    if (dy < 0) t = std::min(t, (box.y0 - v[1]) / dy);
    Pt h = {v[0] + t * dx, v[1] + t * dy, 0.0};
    // Snap onto the box edge that was hit.
    if (std::abs(h[0] - box.x0) < 1e-12) h[0] = box.x0;
    if (std::abs(h[0] - box.x1) < 1e-12) h[0] = box.x1;
    if (std::abs(h[1] - box.y0) < 1e-12) h[1] = box.y0;
    if (std::abs(h[1] - box.y1) < 1e-12) h[1] = box.y1;
    hits.push_back(h);
  }
  const std::array<Pt, 4> corners = {Pt{box.x0, box.y0, 0}, Pt{box.x1, box.y0, 0}, Pt{box.x1, box.y1, 0},
                                     Pt{box.x0, box.y1, 0}};

  DomainDecomposition dec;
  for (std::size_t i = 0; i < nv; ++i) {
    const std::size_t j = (i + 1) % nv;
    double a0 = angle_of(hits[i]);
    double a1 = angle_of(hits[j]);
    if (a1 <= a0) a1 += 2 * std::numbers::pi;
    std::vector<std::pair<double, Pt>> between;
    for (const auto& k : corners) {
      double ak = angle_of(k);
      if (ak <= a0) ak += 2 * std::numbers::pi;
      if (ak > a0 && ak < a1) between.emplace_back(ak, k);
    }
    std::sort(between.begin(), between.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    Polygon poly;
    poly.push_back(hole[i]);
    poly.push_back(hits[i]);
    for (const auto& [ang, k] : between) poly.push_back(k);
    poly.push_back(hits[j]);
    poly.push_back(hole[j]);
    dec.subdomains.push_back(Domain::polygon(std::move(poly)));
  }
  // Cut i separates region i-1 and region i.
  for (std::size_t i = 0; i < nv; ++i) {
    const int left = static_cast<int>((i + nv - 1) % nv);
    const int right = static_cast<int>(i);
    const auto seg = BoundarySegment::segment(hole[i], hits[i], 0.0, "cut" + std::to_string(i));
    dec.interfaces.push_back(make_interface(seg, left, right, dec.subdomains));
  }
  return dec;
}

}  // namespace harmonia
