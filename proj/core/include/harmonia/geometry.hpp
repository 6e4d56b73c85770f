#pragma once

// Scenario geometry: domains, boundary pieces, interfaces, decompositions,
// samplers and distance fields.
//
// Points are stored as Pt = {x, y, z}; two-dimensional geometry ignores z.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "harmonia/jet.hpp"

namespace harmonia {

using Pt = std::array<double, 3>;

inline Pt make_pt(double x, double y, double z = 0.0) { return {x, y, z}; }

struct Rect {
  double x0 = 0, y0 = 0, x1 = 1, y1 = 1;
  double area() const { return (x1 - x0) * (y1 - y0); }
  bool contains_closed(const Pt& p, double tol = 1e-12) const {
    return p[0] >= x0 - tol && p[0] <= x1 + tol && p[1] >= y0 - tol && p[1] <= y1 + tol;
  }
};

using Polygon = std::vector<Pt>;

double polygon_area(const Polygon& poly);  // signed, positive for CCW
bool point_in_polygon(const Polygon& poly, const Pt& p);
double distance_to_polygon_boundary(const Polygon& poly, const Pt& p);
/// True when no two non-adjacent edges intersect.
bool polygon_is_simple(const Polygon& poly);

class Domain {
 public:
  enum class Kind { rect, rect_union, rect_minus_polygon, polygon, cube };

  static Domain rect(Rect r);
  static Domain rect_union(std::vector<Rect> rects);
  /// Outer rectangle with a polygonal hole strictly inside it.
  static Domain rect_minus_polygon(Rect outer, Polygon hole);
  static Domain polygon(Polygon poly);
  static Domain cube(Pt lo, Pt hi);

  Kind kind() const { return kind_; }
  int dim() const { return kind_ == Kind::cube ? 3 : 2; }

  /// Strict interior membership.
  bool contains(const Pt& p) const;
  /// Membership in the closure, with tolerance.
  bool contains_closed(const Pt& p, double tol = 1e-12) const;

  Pt lo() const { return lo_; }
  Pt hi() const { return hi_; }
  double measure() const;

  const std::vector<Rect>& rects() const { return rects_; }
  const Polygon& poly() const { return poly_; }

 private:
  Kind kind_ = Kind::rect;
  std::vector<Rect> rects_;
  Polygon poly_;
  Pt lo_{}, hi_{};
};

enum class BoundaryKind { dirichlet, insulated };

/// A straight boundary piece: a 2D segment from a to b, or an axis-aligned
/// face of a box in 3D spanning the box [a, b] with a[axis] == b[axis].
struct BoundarySegment {
  enum class Shape { segment, face };

  Shape shape = Shape::segment;
  Pt a{}, b{};
  int axis = -1;
  BoundaryKind kind = BoundaryKind::dirichlet;
  double value = 0.0;
  std::string name;

  static BoundarySegment segment(Pt a, Pt b, double value, std::string name = {});
  static BoundarySegment insulated_segment(Pt a, Pt b, std::string name = {});
  static BoundarySegment face(int axis, double coord, Pt lo, Pt hi, double value, std::string name = {});

  int dim() const { return shape == Shape::face ? 3 : 2; }
  double length() const;
  Pt nearest(const Pt& p) const;
  double distance(const Pt& p) const;
  /// A unit normal (orientation is not meaningful for boundary pieces).
  Pt normal() const;
};

struct Interface {
  BoundarySegment segment;
  int first = 0;   // lower subdomain index
  int second = 1;  // higher subdomain index
  Pt normal{};     // unit normal pointing from `first` into `second`
};

struct DomainDecomposition {
  std::vector<Domain> subdomains;
  std::vector<Interface> interfaces;

  /// Subdomains whose closure holds p.
  std::vector<int> owners(const Pt& p, double tol = 1e-9) const;
};

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// n equally spaced points including both endpoints; faces give an n x n grid.
std::vector<Pt> sample_boundary(const BoundarySegment& seg, int n = 100);

/// n i.i.d. uniform interior points by rejection from the bounding box.
std::vector<Pt> sample_interior(const Domain& domain, int n, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Queries
// ---------------------------------------------------------------------------

inline bool in_domain(const Domain& domain, const Pt& p) { return domain.contains(p); }

/// Euclidean distance from p to the nearest point of the union of `set`.
double distance_to(std::span<const BoundarySegment> set, const Pt& p);

/// Unit normal of an interface at p, oriented from the lower-indexed
/// subdomain to the higher one. Throws if p is farther than 1e-9 from it.
Pt interface_normal(const Interface& iface, const Pt& p);

/// Split the box-minus-convex-polygon domain into simply-connected pieces by
/// straight cuts from the polygon's vertices radially away from its centroid.
DomainDecomposition heater_decomposition(const Domain& domain);

/// Interface between two subdomains sharing `segment`; the normal is derived
/// from the subdomain geometry.
Interface make_interface(const BoundarySegment& segment, int first, int second,
                         const std::vector<Domain>& subdomains);

// ---------------------------------------------------------------------------
// Distance fields with spatial derivatives (for exact-boundary networks)
// ---------------------------------------------------------------------------

/// Distance to the nearest piece of `set`, carried as a jet. At points on the
/// set the derivative is undefined; the jet then has zero gradient and Hessian.
template <int D>
Jet<D> distance_jet(std::span<const BoundarySegment> set, const Point<D>& x) {
  Pt p{};
  for (int i = 0; i < D; ++i) p[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)];
  double best = INFINITY;
  const BoundarySegment* nearest = nullptr;
  for (const auto& s : set) {
    const double d = s.distance(p);
    if (d < best) {
      best = d;
      nearest = &s;
    }
  }
  if (!nearest) throw Error("distance_jet: empty boundary set");
  if (best < 1e-14) return Jet<D>::constant(0.0);

  const auto xs = lift<D>(x);
  // r = x - q(x), where q is the nearest-point map; q is affine in x near p.
  std::array<Jet<D>, D> r;
  const BoundarySegment& s = *nearest;
  if (s.shape == BoundarySegment::Shape::segment) {
    const double dx = s.b[0] - s.a[0], dy = s.b[1] - s.a[1];
    const double len2 = dx * dx + dy * dy;
    const double t = ((p[0] - s.a[0]) * dx + (p[1] - s.a[1]) * dy) / len2;
    if (t <= 0.0 || t >= 1.0) {
      const Pt& q = t <= 0.0 ? s.a : s.b;
      for (int i = 0; i < D; ++i) r[static_cast<std::size_t>(i)] = xs[static_cast<std::size_t>(i)] - q[static_cast<std::size_t>(i)];
    } else {
      const double len = std::sqrt(len2);
      const double nx = -dy / len, ny = dx / len;
      // Only the normal component survives: r = n (n . (x - a)).
      const Jet<D> s_n = (xs[0] - s.a[0]) * nx + (xs[1] - s.a[1]) * ny;
      r[0] = s_n * nx;
      r[1] = s_n * ny;
      for (int i = 2; i < D; ++i) r[static_cast<std::size_t>(i)] = Jet<D>::constant(0.0);
    }
  } else {
    for (int i = 0; i < D; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      if (i == s.axis) {
        r[ui] = xs[ui] - s.a[ui];
      } else {
        const double lo = std::min(s.a[ui], s.b[ui]), hi = std::max(s.a[ui], s.b[ui]);
        if (p[ui] < lo) {
          r[ui] = xs[ui] - lo;
        } else if (p[ui] > hi) {
          r[ui] = xs[ui] - hi;
        } else {
          r[ui] = Jet<D>::constant(0.0);
        }
      }
    }
  }
  Jet<D> sum = square(r[0]);
  for (int i = 1; i < D; ++i) sum = sum + square(r[static_cast<std::size_t>(i)]);
  return sqrt(sum);
}

}  // namespace harmonia
