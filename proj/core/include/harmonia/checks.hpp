#pragma once

// Invariant suites: exact-harmonicity, divergence-free construction,
// gradient correctness and oracle sanity. Each returns the worst observed
// value against its limit.

#include <cstdint>
#include <string>
#include <vector>

namespace harmonia {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;  // worst observed
  double limit = 0.0;
  std::string detail;
};

/// max |laplacian| of random holomorphic nets over random points in the unit
/// square, before and after a short Dirichlet fit.
CheckResult check_holomorphic_harmonicity(int nets = 20, int points = 1000, int fit_epochs = 500,
                                          std::uint64_t seed = 1);

/// max |laplacian| of the quantum net over random angle settings.
CheckResult check_quantum_harmonicity(int settings = 20, int points = 100, std::uint64_t seed = 2);

/// max |spectral - circuit| evaluation difference of the quantum net.
CheckResult check_quantum_spectral(int settings = 20, int points = 100, std::uint64_t seed = 3);

/// max |div curl A| for random potentials in dimensions 2, 3 and 4.
CheckResult check_divergence_free(int nets = 5, int points = 100, std::uint64_t seed = 4);

/// Worst relative error of every loss term's parameter gradient against
/// central differences, over every compatible (scenario, method) pair.
CheckResult check_loss_gradients(int width = 8, std::uint64_t seed = 5);

/// Constant and linear boundary data reproduced by the FD solver.
CheckResult check_fd_exactness();

/// 16-term series against the closed form at x >= 0.1.
CheckResult check_analytic_series();

/// The quick suite run by `harmonia check`.
std::vector<CheckResult> run_checks();

}  // namespace harmonia
