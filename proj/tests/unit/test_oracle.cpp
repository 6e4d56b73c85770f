#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "harmonia/error.hpp"
#include "harmonia/oracle.hpp"
#include "harmonia/rng.hpp"

using namespace harmonia;

namespace {

constexpr double pi = std::numbers::pi;

std::vector<BoundarySegment> square_sides(double left, double right, double bottom, double top) {
  return {BoundarySegment::segment({0, 0, 0}, {0, 1, 0}, left), BoundarySegment::segment({1, 0, 0}, {1, 1, 0}, right),
          BoundarySegment::segment({0, 0, 0}, {1, 0, 0}, bottom), BoundarySegment::segment({0, 1, 0}, {1, 1, 0}, top)};
}

SorOptions tight(double h) {
  SorOptions o;
  o.omega = optimal_omega(static_cast<int>(std::lround(1.0 / h)));
  o.tol = 1e-13;
  return o;
}

// Unit box with the closed form on the left, bottom and top, and its
// nodal values on x = 1 as short per-node pieces.
std::vector<BoundarySegment> matched_box(double h) {
  std::vector<BoundarySegment> b{BoundarySegment::segment({0, 0, 0}, {0, 1, 0}, 1.0),
                                 BoundarySegment::segment({0, 0, 0}, {1, 0, 0}, 0.0),
                                 BoundarySegment::segment({0, 1, 0}, {1, 1, 0}, 0.0)};
  const int n = static_cast<int>(std::lround(1.0 / h));
  for (int j = 1; j < n; ++j) {
    const double y = j * h;
    b.push_back(BoundarySegment::segment({1, y - h / 4, 0}, {1, y + h / 4, 0}, analytic_box(1.0, y)));
  }
  return b;
}

double max_error_vs_closed_form(double h) {
  const Domain box = Domain::rect({0, 0, 1, 1});
  const auto b = matched_box(h);
  const FieldGrid g = fd_laplace_solve(box, b, h, tight(h));
  double worst = 0.0;
  for (int j = 1; j < g.n[1] - 1; ++j) {
    for (int i = 0; i < g.n[0]; ++i) {
      const Pt p = g.node(i, j);
      if (p[0] < 0.25) continue;
      worst = std::max(worst, std::abs(g.values[g.index(i, j)] - analytic_box(p[0], p[1])));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("closed-form heated box") {
  CHECK(analytic_box(0.5, 0.5) == doctest::Approx(2 / pi * std::atan(1 / std::sinh(pi / 2))).epsilon(1e-14));
  CHECK(analytic_box(0.0, 0.3) == 1.0);
  CHECK(analytic_box(0.4, 0.0) == doctest::Approx(0.0));
  Rng rng(2);
  for (int k = 0; k < 50; ++k) {
    const double x = rng.uniform(0.1, 1.0), y = rng.uniform(0.0, 1.0);
    CHECK(analytic_box_series(x, y, 400) == doctest::Approx(analytic_box(x, y)).epsilon(1e-10));
    // Harmonic: five-point Laplacian at O(h^2).
    const double h = 1e-3;
    const double lap = (analytic_box(x + h, y) + analytic_box(x - h, y) + analytic_box(x, y + h) +
                        analytic_box(x, y - h) - 4 * analytic_box(x, y)) /
                       (h * h);
    CHECK(std::abs(lap) < 1e-3);
  }
}

TEST_CASE("constant boundary data gives a constant solution") {
  const Domain box = Domain::rect({0, 0, 1, 1});
  const auto b = square_sides(0.7, 0.7, 0.7, 0.7);
  const FieldGrid g = fd_laplace_solve(box, b, 1.0 / 16, tight(1.0 / 16));
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(g.values[i] == doctest::Approx(0.7).epsilon(1e-11));

  const Domain cube = Domain::cube({0, 0, 0}, {1, 1, 1});
  std::vector<BoundarySegment> faces;
  for (int a = 0; a < 3; ++a) {
    faces.push_back(BoundarySegment::face(a, 0.0, {0, 0, 0}, {1, 1, 1}, 0.3));
    faces.push_back(BoundarySegment::face(a, 1.0, {0, 0, 0}, {1, 1, 1}, 0.3));
  }
  const FieldGrid c = fd_laplace_solve(cube, faces, 1.0 / 8, tight(1.0 / 8));
  CHECK(c.n[2] == 9);
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(c.values[i] == doctest::Approx(0.3).epsilon(1e-11));
}

TEST_CASE("linear solution between insulated walls is reproduced exactly") {
  const Domain box = Domain::rect({0, 0, 1, 1});
  const std::vector<BoundarySegment> b{BoundarySegment::segment({0, 0, 0}, {0, 1, 0}, 0.0),
                                       BoundarySegment::segment({1, 0, 0}, {1, 1, 0}, 1.0),
                                       BoundarySegment::insulated_segment({0, 0, 0}, {1, 0, 0}),
                                       BoundarySegment::insulated_segment({0, 1, 0}, {1, 1, 0})};
  const FieldGrid g = fd_laplace_solve(box, b, 1.0 / 20, tight(1.0 / 20));
  for (int j = 0; j < g.n[1]; ++j) {
    for (int i = 0; i < g.n[0]; ++i) CHECK(g.values[g.index(i, j)] == doctest::Approx(g.node(i, j)[0]).epsilon(1e-9));
  }
}

TEST_CASE("layered permittivity matches the one-dimensional flux-continuous profile") {
  const Domain box = Domain::rect({0, 0, 1, 1});
  const std::vector<BoundarySegment> b{BoundarySegment::segment({0, 0, 0}, {1, 0, 0}, 0.0),
                                       BoundarySegment::segment({0, 1, 0}, {1, 1, 0}, 1.0),
                                       BoundarySegment::insulated_segment({0, 0, 0}, {0, 1, 0}),
                                       BoundarySegment::insulated_segment({1, 0, 0}, {1, 1, 0})};
  SorOptions o = tight(1.0 / 32);
  o.permittivity = [](const Pt& p) { return p[1] < 0.5 ? 1.0 : 0.01; };
  const FieldGrid g = fd_laplace_solve(box, b, 1.0 / 32, o);
  // phi = a y below the interface; slope 100 a above; phi(1) = 1.
  const double a = 1.0 / 50.5;
  for (int j = 0; j < g.n[1]; ++j) {
    const double y = g.node(0, j)[1];
    const double exact = y <= 0.5 ? a * y : a * 0.5 + 100 * a * (y - 0.5);
    for (int i = 0; i < g.n[0]; ++i) CHECK(g.values[g.index(i, j)] == doctest::Approx(exact).epsilon(1e-8).scale(1));
  }
}

TEST_CASE("finite differences converge at second order with a matched far trace") {
  const double coarse = max_error_vs_closed_form(1.0 / 32);
  const double fine = max_error_vs_closed_form(1.0 / 64);
  INFO("coarse " << coarse << " fine " << fine);
  CHECK(fine < coarse);
  CHECK(coarse / fine >= 3.0);
}

TEST_CASE("SOR reports non-convergence") {
  const Domain box = Domain::rect({0, 0, 1, 1});
  const auto b = square_sides(1, 0, 0, 0);
  SorOptions o;
  o.max_iterations = 5;
  CHECK_THROWS_AS(fd_laplace_solve(box, b, 1.0 / 32, o), ConvergenceError);
  CHECK_THROWS_AS(fd_laplace_solve(box, b, 0.3, o), Error);
  CHECK(optimal_omega(64) == doctest::Approx(2 / (1 + std::sin(pi / 64))));
}

TEST_CASE("interpolation is exact on linear data") {
  FieldGrid g;
  g.dim = 2;
  g.h = 0.25;
  g.origin = {-1, 0, 0};
  g.n = {9, 5, 1};
  for (int j = 0; j < 5; ++j) {
    for (int i = 0; i < 9; ++i) {
      const Pt p = g.node(i, j);
      g.values.push_back(2 * p[0] + 3 * p[1] + 1);
      g.mask.push_back(1);
    }
  }
  Rng rng(8);
  for (int k = 0; k < 50; ++k) {
    const Pt p{rng.uniform(-1, 1), rng.uniform(0, 1), 0};
    CHECK(grid_sample(g, p) == doctest::Approx(2 * p[0] + 3 * p[1] + 1).epsilon(1e-13));
    const auto gr = grid_gradient(g, p);
    CHECK(gr[0] == doctest::Approx(2.0));
    CHECK(gr[1] == doctest::Approx(3.0));
  }
  g.mask[g.index(4, 2)] = 0;
  CHECK_FALSE(grid_can_sample(g, {0.1, 0.6, 0}));
  CHECK_THROWS_AS(grid_sample(g, {0.1, 0.6, 0}), Error);
  CHECK_THROWS_AS(grid_sample(g, {1.5, 0.6, 0}), Error);
}

TEST_CASE("metrics") {
  const std::vector<double> f{1, 2, 3}, o{1, 1, 1}, lap{0.1, -0.2, 0.3};
  const Metrics m = metrics(f, o, lap);
  CHECK(m.rmse == doctest::Approx(std::sqrt(5.0 / 3)));
  CHECK(m.paper_mae == doctest::Approx(1.0));
  CHECK(m.mean_abs_laplacian == doctest::Approx(0.2));
  CHECK_THROWS_AS(metrics(std::vector<double>{}, std::vector<double>{}, std::vector<double>{}), Error);
  CHECK(fmt17(0.1) == "0.10000000000000001");
}

TEST_CASE("grid text format") {
  const Domain box = Domain::rect({0, 0, 1, 1});
  const auto b = square_sides(1, 0, 0, 0);
  const FieldGrid g = fd_laplace_solve(box, b, 0.25, tight(0.25));
  const auto path = std::filesystem::temp_directory_path() / "harmonia_grid_text.txt";
  write_grid_text(g, path.string());
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  int nx = 0, ny = 0;
  double h = 0, x0 = -1, y0 = -1;
  hs >> nx >> ny >> h >> x0 >> y0;
  CHECK(nx == 5);
  CHECK(ny == 5);
  CHECK(h == 0.25);
  CHECK(x0 == 0.0);
  CHECK(y0 == 0.0);
  int rows = 0;
  for (std::string line; std::getline(in, line);) {
    std::istringstream ls(line);
    int cols = 0;
    for (std::string tok; ls >> tok;) ++cols;
    CHECK(cols == 5);
    ++rows;
  }
  CHECK(rows == 5);
  std::filesystem::remove(path);
}
