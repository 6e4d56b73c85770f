#include <cmath>

#include "doctest.h"
#include "fd_oracle.hpp"
#include "harmonia/geometry.hpp"
#include "harmonia/scenario.hpp"

using namespace harmonia;

TEST_CASE("polygon primitives") {
  const Polygon sq{{0, 0, 0}, {2, 0, 0}, {2, 1, 0}, {0, 1, 0}};
  CHECK(polygon_area(sq) == doctest::Approx(2.0));
  Polygon cw(sq.rbegin(), sq.rend());
  CHECK(polygon_area(cw) == doctest::Approx(-2.0));
  CHECK(point_in_polygon(sq, {1.0, 0.5, 0}));
  CHECK_FALSE(point_in_polygon(sq, {2.5, 0.5, 0}));
  CHECK(distance_to_polygon_boundary(sq, {1.0, 0.25, 0}) == doctest::Approx(0.25));
  CHECK(polygon_is_simple(sq));
  const Polygon bow{{0, 0, 0}, {1, 1, 0}, {1, 0, 0}, {0, 1, 0}};
  CHECK_FALSE(polygon_is_simple(bow));
}

TEST_CASE("domains answer membership") {
  const Domain l = Domain::rect_union({{0, 0, 0.5, 0.6}, {0.5, 0.4, 1, 1}});
  CHECK(l.contains({0.25, 0.3, 0}));
  CHECK(l.contains({0.75, 0.8, 0}));
  CHECK_FALSE(l.contains({0.75, 0.2, 0}));
  CHECK(l.contains_closed({0.5, 0.5, 0}));
  CHECK(l.measure() == doctest::Approx(0.3 + 0.3));

  const Scenario h = make_scenario("heater");
  CHECK_FALSE(h.domain.contains({5.0, 5.0, 0}));
  CHECK(h.domain.contains({1.0, 1.0, 0}));
  const double side = std::hypot(h.domain.poly()[1][0] - h.domain.poly()[0][0],
                                 h.domain.poly()[1][1] - h.domain.poly()[0][1]);
  CHECK(side == doctest::Approx(4.0));
  CHECK(h.domain.measure() == doctest::Approx(100.0 - std::sqrt(3.0) / 4 * 16));

  const Domain c = Domain::cube({0, 0, 0}, {1, 1, 1});
  CHECK(c.dim() == 3);
  CHECK(c.contains({0.5, 0.5, 0.5}));
  CHECK_FALSE(c.contains({0.5, 1.5, 0.5}));
}

TEST_CASE("boundary sampling includes endpoints and spacing is uniform") {
  const auto seg = BoundarySegment::segment({0, 0, 0}, {1, 0, 0}, 1.0);
  const auto pts = sample_boundary(seg, 100);
  REQUIRE(pts.size() == 100);
  CHECK(pts.front()[0] == 0.0);
  CHECK(pts.back()[0] == doctest::Approx(1.0));
  CHECK(pts[1][0] == doctest::Approx(1.0 / 99));
  const auto face = BoundarySegment::face(0, 1.0, {0, 0, 0}, {1, 1, 1}, -1.0);
  const auto fp = sample_boundary(face, 10);
  CHECK(fp.size() == 100);
  for (const auto& p : fp) CHECK(p[0] == 1.0);
  CHECK(face.normal()[0] == 1.0);
  CHECK(seg.normal()[1] == doctest::Approx(1.0));
}

TEST_CASE("interior sampling is seeded and stays inside") {
  const Scenario h = make_scenario("heater");
  const auto a = sample_interior(h.domain, 500, 4);
  const auto b = sample_interior(h.domain, 500, 4);
  CHECK(a == b);
  for (const auto& p : a) CHECK(h.domain.contains(p));
  CHECK(sample_interior(h.domain, 500, 5) != a);
}

TEST_CASE("heater decomposition covers the domain with simply-connected pieces") {
  const Scenario h = make_scenario("heater");
  REQUIRE(h.decomposition.has_value());
  const auto& dd = *h.decomposition;
  CHECK(dd.subdomains.size() >= 2);
  double area = 0.0;
  for (const auto& s : dd.subdomains) area += s.measure();
  CHECK(area == doctest::Approx(h.domain.measure()).epsilon(1e-9));
  for (const auto& p : sample_interior(h.domain, 400, 1)) CHECK(dd.owners(p).size() >= 1);
  for (const auto& iface : dd.interfaces) {
    const Pt mid{0.5 * (iface.segment.a[0] + iface.segment.b[0]), 0.5 * (iface.segment.a[1] + iface.segment.b[1]), 0};
    const auto own = dd.owners(mid);
    CHECK(std::find(own.begin(), own.end(), iface.first) != own.end());
    CHECK(std::find(own.begin(), own.end(), iface.second) != own.end());
    const Pt n = interface_normal(iface, mid);
    const Pt step{mid[0] + 1e-4 * n[0], mid[1] + 1e-4 * n[1], 0};
    CHECK(dd.subdomains[static_cast<std::size_t>(iface.second)].contains_closed(step, 1e-9));
  }
}

TEST_CASE("distance jets match finite differences away from kinks") {
  const std::vector<BoundarySegment> set{BoundarySegment::segment({0, 0, 0}, {1, 0, 0}, 0.0),
                                         BoundarySegment::segment({1, 0, 0}, {1, 1, 0}, 0.0)};
  const std::function<double(const fd::Vec<2>&)> f = [&](const fd::Vec<2>& x) {
    return distance_to(set, {x[0], x[1], 0});
  };
  for (const Point<2> x : {Point<2>{0.3, 0.2}, Point<2>{1.4, 0.5}, Point<2>{1.3, -0.4}, Point<2>{0.6, 0.1}}) {
    const Jet<2> d = distance_jet<2>(set, x);
    CHECK(d.v == doctest::Approx(f({x[0], x[1]})));
    const auto g = fd::gradient<2>(f, {x[0], x[1]});
    const auto H = fd::hessian<2>(f, {x[0], x[1]}, 1e-3);
    for (int i = 0; i < 2; ++i) CHECK(d.g[static_cast<std::size_t>(i)] == doctest::Approx(g[static_cast<std::size_t>(i)]).epsilon(1e-6));
    for (int i = 0; i < 4; ++i) CHECK(d.h[static_cast<std::size_t>(i)] == doctest::Approx(H[static_cast<std::size_t>(i)]).epsilon(1e-4).scale(1));
  }
  CHECK(distance_jet<2>(set, Point<2>{0.5, 0.0}).v == 0.0);
}

TEST_CASE("scenario parameters") {
  const Scenario e = make_scenario("electrostatics");
  CHECK(e.eps1 == 1.0);
  CHECK(e.eps2 == 0.01);
  CHECK(e.material_interface->segment.a[1] == 0.5);
  CHECK(e.boundary[0].value == 1.0);
  CHECK(e.permittivity({0.5, 0.25, 0}) == 1.0);
  CHECK(e.permittivity({0.5, 0.75, 0}) == 0.01);

  const Scenario r = make_scenario("robot");
  int dirichlet = 0;
  for (const auto& b : r.boundary) dirichlet += b.kind == BoundaryKind::dirichlet;
  CHECK(dirichlet == 2);
  CHECK(r.path_starts.size() == 5);

  const Scenario p = make_scenario("pipe3d");
  CHECK(p.dim == 3);
  CHECK(p.boundary.size() == 6);
  CHECK(p.boundary[0].value == 1.0);
  CHECK(p.boundary[1].value == -1.0);
  CHECK_THROWS_AS(make_scenario("poisson"), Error);
}
