#pragma once

// Reference solutions and evaluation metrics.

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "harmonia/geometry.hpp"

namespace harmonia {

/// (2/pi) arctan(sin(pi y) / sinh(pi x)); the x = 0 limit is 1 for 0 < y < 1.
double analytic_box(double x, double y);

/// Truncated series sum over odd n <= 2 terms - 1 of 4/(n pi) e^{-n pi x} sin(n pi y).
double analytic_box_series(double x, double y, int terms);

/// Uniform node grid. Two-dimensional grids have n[2] == 1.
struct FieldGrid {
  int dim = 2;
  Pt origin{};
  double h = 0.0;
  std::array<int, 3> n{1, 1, 1};
  std::vector<double> values;
  std::vector<std::uint8_t> mask;  // 1 where `values` holds a solution value

  std::size_t size() const { return values.size(); }
  std::size_t index(int i, int j, int k = 0) const {
    return (static_cast<std::size_t>(k) * static_cast<std::size_t>(n[1]) + static_cast<std::size_t>(j)) *
               static_cast<std::size_t>(n[0]) +
           static_cast<std::size_t>(i);
  }
  Pt node(int i, int j, int k = 0) const {
    return {origin[0] + i * h, origin[1] + j * h, dim == 3 ? origin[2] + k * h : 0.0};
  }
};

struct SorOptions {
  double omega = 1.9;
  double tol = 1e-10;
  long max_iterations = 1000000;
  /// Permittivity at a point; face weights use its value at face midpoints.
  std::function<double(const Pt&)> permittivity;
};

struct SorReport {
  long iterations = 0;
  double max_update = 0.0;
  double residual = 0.0;  // max |weighted neighbour mean - u| over free nodes
};

/// SOR omega that is optimal for the 5/7-point stencil on a box with
/// `intervals` grid intervals along its longest side.
double optimal_omega(int intervals);

/// Finite-difference Laplace solve on the bounding box of `domain` with
/// spacing h. Nodes on (or, for polygon edges, within h/2 of) a Dirichlet
/// segment take its value; nodes outside the domain that are inside the
/// outer boundary (holes) are clamped to the nearest Dirichlet value; nodes
/// on insulated walls mirror their missing neighbours (zero normal flux).
/// Throws ConvergenceError after max_iterations.
FieldGrid fd_laplace_solve(const Domain& domain, std::span<const BoundarySegment> boundary, double h,
                           const SorOptions& opts = {}, SorReport* report = nullptr);

/// Convenience overload matching (domain, boundary, h, omega, tol).
FieldGrid fd_laplace_solve(const Domain& domain, std::span<const BoundarySegment> boundary, double h, double omega,
                           double tol);

/// True when every node of the cell holding x carries a solution value.
bool grid_can_sample(const FieldGrid& grid, const Pt& x);

/// Bilinear (2D) or trilinear (3D) interpolation. Throws outside the mask.
double grid_sample(const FieldGrid& grid, const Pt& x);

/// Gradient of the bilinear/trilinear interpolant.
std::array<double, 3> grid_gradient(const FieldGrid& grid, const Pt& x);

struct Metrics {
  double rmse = 0.0;
  double paper_mae = 0.0;
  double mean_abs_laplacian = 0.0;
};

/// rmse and paper_mae of field - oracle; mean |laplacian| over the same points.
Metrics metrics(std::span<const double> field, std::span<const double> oracle, std::span<const double> laplacian);

/// CSV with header x,y[,z],value; masked nodes are skipped.
void write_grid_csv(const FieldGrid& grid, const std::string& path);

/// First line "nx ny h x0 y0" (3D: "nx ny nz h x0 y0 z0"), then one row of
/// values per line; masked nodes are written as nan.
void write_grid_text(const FieldGrid& grid, const std::string& path);

/// "%.17g"
std::string fmt17(double v);

}  // namespace harmonia
