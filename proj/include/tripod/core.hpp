#pragma once

// Shared domain types: unit conventions, medium parameters, spatial grid and
// the polarization qubit with its Bloch-sphere view.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>

#include "tripod/errors.hpp"

namespace tripod {

using real = double;
using complex = std::complex<double>;

inline constexpr real pi = std::numbers::pi;
inline constexpr complex I{0.0, 1.0};

// Default tolerances: exact algebra vs. quantities coming out of the PDE solvers.
inline constexpr real algebra_tol = 1e-12;
inline constexpr real pde_tol = 1e-6;

/// Dimensionless units used by every module: hbar = c = 1, lengths in units of
/// the sample length L, times in units of L/c. Rabi frequencies, kappa, |W| and
/// Zeeman rates are therefore in units of c/L.
struct SimUnits {
  static constexpr real hbar = 1.0;
  static constexpr real c = 1.0;
};

/// Converts SI inputs into SimUnits for a sample of physical length `length_m`.
struct SiScale {
  static constexpr real speed_of_light = 299792458.0;       // m/s
  static constexpr real electron_charge = 1.602176634e-19;  // C
  static constexpr real electron_mass = 9.1093837015e-31;   // kg

  real length_m = 1.0;

  real time_unit_s() const { return length_m / speed_of_light; }
  real rate(real per_second) const { return per_second * time_unit_s(); }
  real time(real seconds) const { return seconds / time_unit_s(); }
  real length(real meters) const { return meters / length_m; }
  // e/2m in SimUnits per tesla; multiply by g_F and B to get a phase rate.
  real zeeman_rate_per_tesla() const {
    return rate(electron_charge / (2.0 * electron_mass));
  }
};

// Composite trapezoid rule over uniformly spaced samples.
template <class T>
T trapezoid(std::span<const T> samples, real dt) {
  if (samples.size() < 2) return T{};
  T acc = 0.5 * (samples.front() + samples.back());
  for (std::size_t k = 1; k + 1 < samples.size(); ++k) acc += samples[k];
  return acc * dt;
}

// Same rule for a callable sampled at n+1 points on [a, b].
template <class F>
real trapezoid(F&& f, real a, real b, std::size_t n) {
  if (n == 0 || b == a) return 0.0;
  const real h = (b - a) / static_cast<real>(n);
  real acc = 0.5 * (f(a) + f(b));
  for (std::size_t k = 1; k < n; ++k) acc += f(a + h * static_cast<real>(k));
  return acc * h;
}

struct MediumParams {
  real kappa = 1000.0;  // coupling strength, c/L
  real length = 1.0;
  std::size_t n_z = 512;
  real atom_count = 1.0;  // N0, enters only the polariton prefactor

  void validate() const {
    if (!(kappa > 0.0) || !std::isfinite(kappa))
      throw ValidationError("medium.kappa must be positive and finite");
    if (!(length > 0.0) || !std::isfinite(length))
      throw ValidationError("medium.length must be positive and finite");
    if (n_z < 16) throw ValidationError("medium.n_z must be at least 16");
    if (!(atom_count > 0.0)) throw ValidationError("medium.atom_count must be positive");
  }

  // sqrt(N0 / (kappa^2 L)), the dark-state polariton normalization.
  real polariton_prefactor() const { return std::sqrt(atom_count / (kappa * kappa * length)); }
};

/// Uniform cell-centred grid on [0, L]: n cells of width dz, so n*dz == L.
class Grid1D {
 public:
  Grid1D(std::size_t n, real length) : n_(n), length_(length), dz_(length / static_cast<real>(n)) {
    if (n == 0) throw ValidationError("grid needs at least one cell");
    if (!(length > 0.0)) throw ValidationError("grid length must be positive");
  }

  explicit Grid1D(const MediumParams& p) : Grid1D(p.n_z, p.length) {}

  std::size_t size() const { return n_; }
  real dz() const { return dz_; }
  real length() const { return length_; }
  real z(std::size_t j) const { return (static_cast<real>(j) + 0.5) * dz_; }

  friend bool operator==(const Grid1D& a, const Grid1D& b) {
    return a.n_ == b.n_ && a.length_ == b.length_;
  }

 private:
  std::size_t n_;
  real length_;
  real dz_;
};

/// Photon polarization in the circular basis {|+>, |->}.
class PolarizationQubit {
 public:
  PolarizationQubit() = default;  // |+>

  // Wraps amplitudes without normalizing them. Operations that require a
  // normalized qubit check and reject these if the norm is off.
  static PolarizationQubit unnormalized(complex plus, complex minus) {
    return PolarizationQubit(plus, minus);
  }

  complex plus() const { return plus_; }
  complex minus() const { return minus_; }
  std::array<complex, 2> amplitudes() const { return {plus_, minus_}; }
  real norm() const { return std::sqrt(std::norm(plus_) + std::norm(minus_)); }

 private:
  PolarizationQubit(complex plus, complex minus) : plus_(plus), minus_(minus) {}

  complex plus_{1.0, 0.0};
  complex minus_{0.0, 0.0};
};

inline PolarizationQubit make_qubit(complex plus, complex minus) {
  const real n = std::sqrt(std::norm(plus) + std::norm(minus));
  if (!(n > 0.0) || !std::isfinite(n))
    throw ValidationError("qubit amplitudes must be finite and not both zero");
  return PolarizationQubit::unnormalized(plus / n, minus / n);
}

inline PolarizationQubit make_qubit(std::array<complex, 2> amps) {
  return make_qubit(amps[0], amps[1]);
}

inline void require_normalized(const PolarizationQubit& q, const char* what = "qubit") {
  if (std::abs(q.norm() - 1.0) > 1e-10)
    throw ValidationError(std::string(what) + " is not normalized");
}

struct BlochVector {
  real x = 0.0;
  real y = 0.0;
  real z = 1.0;

  real norm() const { return std::sqrt(x * x + y * y + z * z); }
};

// x = 2 Re(c+* c-), y = 2 Im(c+* c-), z = |c+|^2 - |c-|^2. With these signs the
// matrices rotation_x/y/z(b), acting on (c+, c-) by plain multiplication, turn
// the vector by +b about x/y/z.
inline BlochVector qubit_to_bloch(const PolarizationQubit& q) {
  require_normalized(q);
  const complex r = std::conj(q.plus()) * q.minus();
  return {2.0 * r.real(), 2.0 * r.imag(), std::norm(q.plus()) - std::norm(q.minus())};
}

inline PolarizationQubit bloch_to_qubit(const BlochVector& b) {
  const real n = b.norm();
  if (!(n > 0.0)) throw ValidationError("Bloch vector must be nonzero");
  const real theta = std::acos(std::clamp(b.z / n, -1.0, 1.0));
  const real phi = std::atan2(b.y, b.x);
  return make_qubit(std::cos(theta / 2.0), std::polar(std::sin(theta / 2.0), phi));
}

// |<a|b>|^2
inline real fidelity(const PolarizationQubit& a, const PolarizationQubit& b) {
  require_normalized(a, "first fidelity argument");
  require_normalized(b, "second fidelity argument");
  const complex overlap = std::conj(a.plus()) * b.plus() + std::conj(a.minus()) * b.minus();
  return std::clamp(std::norm(overlap), 0.0, 1.0);
}

// arg(c- / c+) in (-pi, pi]; the azimuth of the Bloch vector.
inline real relative_phase(const PolarizationQubit& q) {
  return std::arg(q.minus() * std::conj(q.plus()));
}

// Linear <-> circular basis. Convention: e_+- = (e_x -+ i e_y)/sqrt2, so a
// field a_x e_x + a_y e_y has c+- = (a_x +- i a_y)/sqrt2.
inline PolarizationQubit from_linear(complex a_x, complex a_y) {
  const real s = 1.0 / std::numbers::sqrt2;
  return make_qubit(s * (a_x + I * a_y), s * (a_x - I * a_y));
}

inline std::array<complex, 2> to_linear(const PolarizationQubit& q) {
  const real s = 1.0 / std::numbers::sqrt2;
  return {s * (q.plus() + q.minus()), -I * s * (q.plus() - q.minus())};
}

// Polarization e = e_x cos(t/2) e^{-i p/2} + e_y sin(t/2) e^{i p/2}.
inline PolarizationQubit from_polarization_angles(real vartheta, real varphi) {
  return from_linear(std::polar(std::cos(vartheta / 2.0), -varphi / 2.0),
                     std::polar(std::sin(vartheta / 2.0), varphi / 2.0));
}

}  // namespace tripod
