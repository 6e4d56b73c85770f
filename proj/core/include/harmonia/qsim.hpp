#pragma once

// Statevector simulation of the quantum holomorphic network
//   phi_QH(x, y) = Re <0| U(theta2) IQFM(x, y) U(theta1) |0>,
// with IQFM(x, y) = exp(-(x + iy) pi H) for the diagonal Hamiltonian
// H = sum_j 2^j Z_j + 2^N. Qubit j is bit j of the basis index.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "harmonia/jet.hpp"

namespace harmonia {

using cplx = std::complex<double>;

class StateVector {
 public:
  explicit StateVector(int qubits);  // |0...0>

  int qubits() const { return qubits_; }
  std::size_t size() const { return amp_.size(); }
  cplx& operator[](std::size_t i) { return amp_[i]; }
  const cplx& operator[](std::size_t i) const { return amp_[i]; }
  std::span<cplx> amplitudes() { return amp_; }
  std::span<const cplx> amplitudes() const { return amp_; }
  double norm() const;

 private:
  int qubits_;
  std::vector<cplx> amp_;
};

void apply_rz(StateVector& s, int qubit, double theta);
void apply_ry(StateVector& s, int qubit, double theta);
void apply_cnot(StateVector& s, int control, int target);

/// Layers of Rz-Ry-Rz on every qubit followed by a CNOT chain j -> j+1.
struct VarBlock {
  int qubits = 4;
  int depth = 8;

  std::size_t angle_count() const { return static_cast<std::size_t>(3 * qubits * depth); }
  void apply(StateVector& s, std::span<const double> angles) const;
  /// Applies the adjoint of apply().
  void apply_inverse(StateVector& s, std::span<const double> angles) const;
};

inline void apply_block(StateVector& s, const VarBlock& b, std::span<const double> angles) { b.apply(s, angles); }

struct DiagonalHamiltonian {
  std::vector<double> energies;

  /// sum_j 2^j Z_j + 2^N with Z|0> = |0>; eigenvalues are 1, 3, ..., 2^(N+1) - 1.
  static DiagonalHamiltonian standard(int qubits);
};

/// Multiplies amplitude m by exp(-(x + iy) pi E_m). Not renormalized.
void iqfm_apply(StateVector& s, double x, double y, const DiagonalHamiltonian& h);

struct QHoloConfig {
  int qubits = 4;
  int depth = 8;
};

/// Direct circuit simulation.
double qholo_eval(std::span<const double> theta1, std::span<const double> theta2, double x, double y,
                  const QHoloConfig& cfg = {});

/// phi = Re sum_m c_m exp(-(x + iy) pi E_m).
struct QHoloSpectrum {
  std::vector<cplx> coeffs;
  std::vector<double> energies;

  double eval(double x, double y) const;
  /// Value, gradient and Hessian from the spectral form.
  Jet<2> jet(double x, double y) const;
};

/// c_m = conj(w_m) (U1|0>)_m with w = U2^dagger |0>.
QHoloSpectrum qholo_spectrum(std::span<const double> theta1, std::span<const double> theta2,
                             const QHoloConfig& cfg = {});

struct QHoloDerivatives {
  double value = 0.0;
  std::array<double, 2> grad{};
  double laplacian = 0.0;
};

QHoloDerivatives qholo_derivatives(std::span<const double> theta1, std::span<const double> theta2, double x,
                                   double y, const QHoloConfig& cfg = {});

/// Least-squares fit of sum_m Re(c_m exp(-(x + iy) pi E_m)) to (point,
/// value) samples; returns the RMS residual.
double exponential_fit_residual(std::span<const Point<2>> points, std::span<const double> values,
                                std::span<const double> energies);

}  // namespace harmonia
