#include "harmonia/qsim.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "harmonia/error.hpp"

namespace harmonia {

StateVector::StateVector(int qubits) : qubits_(qubits) {
  if (qubits < 1 || qubits > 20) throw Error("StateVector: qubit count must be in 1..20");
  amp_.assign(std::size_t{1} << qubits, cplx(0.0, 0.0));
  amp_[0] = 1.0;
}

double StateVector::norm() const {
  double s = 0.0;
  for (const auto& a : amp_) s += std::norm(a);
  return std::sqrt(s);
}

namespace {

void check_qubit(const StateVector& s, int q) {
  if (q < 0 || q >= s.qubits()) throw Error("qsim: qubit index out of range");
}

}  // namespace

void apply_rz(StateVector& s, int qubit, double theta) {
  check_qubit(s, qubit);
  const cplx p0 = std::polar(1.0, -0.5 * theta);
  const cplx p1 = std::polar(1.0, 0.5 * theta);
  const std::size_t bit = std::size_t{1} << qubit;
  for (std::size_t i = 0; i < s.size(); ++i) s[i] *= (i & bit) ? p1 : p0;
}

void apply_ry(StateVector& s, int qubit, double theta) {
  check_qubit(s, qubit);
  const double c = std::cos(0.5 * theta);
  const double sn = std::sin(0.5 * theta);
  const std::size_t bit = std::size_t{1} << qubit;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i & bit) continue;
    const cplx a0 = s[i];
    const cplx a1 = s[i | bit];
    s[i] = c * a0 - sn * a1;
    s[i | bit] = sn * a0 + c * a1;
  }
}

void apply_cnot(StateVector& s, int control, int target) {
  check_qubit(s, control);
  check_qubit(s, target);
  if (control == target) throw Error("apply_cnot: control equals target");
  const std::size_t cb = std::size_t{1} << control;
  const std::size_t tb = std::size_t{1} << target;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if ((i & cb) && !(i & tb)) std::swap(s[i], s[i | tb]);
  }
}

void VarBlock::apply(StateVector& s, std::span<const double> angles) const {
  if (angles.size() != angle_count()) throw Error("VarBlock::apply: wrong number of angles");
  if (s.qubits() != qubits) throw Error("VarBlock::apply: qubit count mismatch");
  std::size_t k = 0;
  for (int l = 0; l < depth; ++l) {
    for (int q = 0; q < qubits; ++q) {
      apply_rz(s, q, angles[k++]);
      apply_ry(s, q, angles[k++]);
      apply_rz(s, q, angles[k++]);
    }
    for (int q = 0; q + 1 < qubits; ++q) apply_cnot(s, q, q + 1);
  }
}

void VarBlock::apply_inverse(StateVector& s, std::span<const double> angles) const {
  if (angles.size() != angle_count()) throw Error("VarBlock::apply_inverse: wrong number of angles");
  if (s.qubits() != qubits) throw Error("VarBlock::apply_inverse: qubit count mismatch");
  for (int l = depth - 1; l >= 0; --l) {
    for (int q = qubits - 2; q >= 0; --q) apply_cnot(s, q, q + 1);
    for (int q = qubits - 1; q >= 0; --q) {
      const std::size_t k = static_cast<std::size_t>(3 * (l * qubits + q));
      apply_rz(s, q, -angles[k + 2]);
      apply_ry(s, q, -angles[k + 1]);
      apply_rz(s, q, -angles[k]);
    }
  }
}

DiagonalHamiltonian DiagonalHamiltonian::standard(int qubits) {
  DiagonalHamiltonian h;
  const std::size_t dim = std::size_t{1} << qubits;
  h.energies.resize(dim);
  for (std::size_t m = 0; m < dim; ++m) {
    double e = std::ldexp(1.0, qubits);
    for (int j = 0; j < qubits; ++j) {
      const double z = (m >> j) & 1U ? -1.0 : 1.0;
      e += std::ldexp(z, j);
    }
    h.energies[m] = e;
  }
  return h;
}

void iqfm_apply(StateVector& s, double x, double y, const DiagonalHamiltonian& h) {
  if (h.energies.size() != s.size()) throw Error("iqfm_apply: Hamiltonian dimension mismatch");
  for (std::size_t m = 0; m < s.size(); ++m) {
    const double e = std::numbers::pi * h.energies[m];
    const double mag = std::exp(-x * e);
    if (!std::isfinite(mag)) throw NonFiniteError("iqfm_apply: amplitude overflow", static_cast<std::ptrdiff_t>(m));
    s[m] *= std::polar(mag, -y * e);
  }
}

double qholo_eval(std::span<const double> theta1, std::span<const double> theta2, double x, double y,
                  const QHoloConfig& cfg) {
  const VarBlock block{cfg.qubits, cfg.depth};
  StateVector s(cfg.qubits);
  block.apply(s, theta1);
  iqfm_apply(s, x, y, DiagonalHamiltonian::standard(cfg.qubits));
  block.apply(s, theta2);
  return s[0].real();
}

QHoloSpectrum qholo_spectrum(std::span<const double> theta1, std::span<const double> theta2,
                             const QHoloConfig& cfg) {
  const VarBlock block{cfg.qubits, cfg.depth};
  StateVector a(cfg.qubits);
  block.apply(a, theta1);
  StateVector w(cfg.qubits);
  block.apply_inverse(w, theta2);
  QHoloSpectrum sp;
  sp.energies = DiagonalHamiltonian::standard(cfg.qubits).energies;
  sp.coeffs.resize(a.size());
  for (std::size_t m = 0; m < a.size(); ++m) sp.coeffs[m] = std::conj(w[m]) * a[m];
  return sp;
}

double QHoloSpectrum::eval(double x, double y) const {
  double s = 0.0;
  for (std::size_t m = 0; m < coeffs.size(); ++m) {
    const double e = std::numbers::pi * energies[m];
    s += (coeffs[m] * std::polar(std::exp(-x * e), -y * e)).real();
  }
  return s;
}

Jet<2> QHoloSpectrum::jet(double x, double y) const {
  // d/dx brings down -pi E, d/dy brings down -i pi E.
  cplx v, gx, gy, hxx, hxy, hyy;
  const cplx I(0.0, 1.0);
  for (std::size_t m = 0; m < coeffs.size(); ++m) {
    const double e = std::numbers::pi * energies[m];
    const cplx t = coeffs[m] * std::polar(std::exp(-x * e), -y * e);
    const cplx dx = -e;
    const cplx dy = -I * e;
    v += t;
    gx += dx * t;
    gy += dy * t;
    hxx += dx * dx * t;
    hxy += dx * dy * t;
    hyy += dy * dy * t;
  }
  Jet<2> j;
  j.v = v.real();
  j.g = {gx.real(), gy.real()};
  j.h = {hxx.real(), hxy.real(), hxy.real(), hyy.real()};
  return j;
}

QHoloDerivatives qholo_derivatives(std::span<const double> theta1, std::span<const double> theta2, double x,
                                   double y, const QHoloConfig& cfg) {
  const Jet<2> j = qholo_spectrum(theta1, theta2, cfg).jet(x, y);
  return {j.v, j.g, j.laplacian()};
}

double exponential_fit_residual(std::span<const Point<2>> points, std::span<const double> values,
                                std::span<const double> energies) {
  if (points.size() != values.size()) throw Error("exponential_fit_residual: size mismatch");
  if (points.size() < 2 * energies.size()) throw Error("exponential_fit_residual: too few samples");
  const auto n = static_cast<Eigen::Index>(points.size());
  const auto k = static_cast<Eigen::Index>(energies.size());
  Eigen::MatrixXd A(n, 2 * k);
  Eigen::VectorXd b(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& p = points[static_cast<std::size_t>(r)];
    for (Eigen::Index m = 0; m < k; ++m) {
      const double e = std::numbers::pi * energies[static_cast<std::size_t>(m)];
      const double mag = std::exp(-p[0] * e);
      // Re(c exp(-(x+iy) pi E)) = Re(c) mag cos(pi E y) + Im(c) mag sin(pi E y)
      A(r, 2 * m) = mag * std::cos(e * p[1]);
      A(r, 2 * m + 1) = mag * std::sin(e * p[1]);
    }
    b(r) = values[static_cast<std::size_t>(r)];
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
  return std::sqrt((A * c - b).squaredNorm() / static_cast<double>(n));
}

}  // namespace harmonia
