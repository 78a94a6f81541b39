#pragma once

// Analytic single-qubit gate algebra for the stored-light protocol: the
// Raman-coupling gate family, named rotations, effective two-photon coupling,
// Zeeman phase areas and Z-Y-Z synthesis into physical pulses.

#include <array>
#include <cmath>
#include <span>
#include <variant>
#include <vector>

#include "tripod/core.hpp"

namespace tripod {

/// Row-major 2x2 complex matrix.
struct Matrix2 {
  std::array<complex, 4> e{complex{1.0}, complex{}, complex{}, complex{1.0}};

  static Matrix2 identity() { return {}; }
  static Matrix2 from_entries(complex g11, complex g12, complex g21, complex g22) {
    return Matrix2{{g11, g12, g21, g22}};
  }

  complex operator()(int row, int col) const { return e[static_cast<std::size_t>(2 * row + col)]; }
  complex& operator()(int row, int col) { return e[static_cast<std::size_t>(2 * row + col)]; }

  Matrix2 adjoint() const {
    return from_entries(std::conj(e[0]), std::conj(e[2]), std::conj(e[1]), std::conj(e[3]));
  }
  complex det() const { return e[0] * e[3] - e[1] * e[2]; }
  complex trace() const { return e[0] + e[3]; }

  friend Matrix2 operator*(const Matrix2& a, const Matrix2& b) {
    return from_entries(a.e[0] * b.e[0] + a.e[1] * b.e[2], a.e[0] * b.e[1] + a.e[1] * b.e[3],
                        a.e[2] * b.e[0] + a.e[3] * b.e[2], a.e[2] * b.e[1] + a.e[3] * b.e[3]);
  }
  friend Matrix2 operator*(complex s, const Matrix2& a) {
    return from_entries(s * a.e[0], s * a.e[1], s * a.e[2], s * a.e[3]);
  }
  friend Matrix2 operator-(const Matrix2& a, const Matrix2& b) {
    return from_entries(a.e[0] - b.e[0], a.e[1] - b.e[1], a.e[2] - b.e[2], a.e[3] - b.e[3]);
  }
  friend std::array<complex, 2> operator*(const Matrix2& a, const std::array<complex, 2>& v) {
    return {a.e[0] * v[0] + a.e[1] * v[1], a.e[2] * v[0] + a.e[3] * v[1]};
  }
};

inline real max_abs_diff(const Matrix2& a, const Matrix2& b) {
  real m = 0.0;
  for (std::size_t k = 0; k < 4; ++k) m = std::max(m, std::abs(a.e[k] - b.e[k]));
  return m;
}

inline bool is_unitary(const Matrix2& m, real tol = algebra_tol) {
  return max_abs_diff(m.adjoint() * m, Matrix2::identity()) <= tol;
}

// Phase alpha that best aligns e^{i alpha} b with a (maximizes Re tr(a^dag e^{i alpha} b)).
inline real relative_global_phase(const Matrix2& a, const Matrix2& b) {
  return std::arg((b.adjoint() * a).trace());
}

// Entrywise max distance after removing the best global phase.
inline real distance_up_to_phase(const Matrix2& a, const Matrix2& b) {
  return max_abs_diff(a, std::polar(1.0, relative_global_phase(a, b)) * b);
}

/// A 2x2 matrix known to satisfy G^dag G = I.
class Unitary2 {
 public:
  Unitary2() = default;

  static Unitary2 checked(const Matrix2& m, real tol = 1e-10) {
    if (!is_unitary(m, tol)) throw ValidationError("matrix is not unitary");
    return Unitary2(m);
  }

  const Matrix2& matrix() const { return m_; }
  complex operator()(int row, int col) const { return m_(row, col); }
  Unitary2 adjoint() const { return Unitary2(m_.adjoint()); }
  Unitary2 with_phase(real alpha) const { return Unitary2(std::polar(1.0, alpha) * m_); }

  friend Unitary2 operator*(const Unitary2& a, const Unitary2& b) { return Unitary2(a.m_ * b.m_); }

 private:
  explicit Unitary2(const Matrix2& m) : m_(m) {}
  // Closed-form constructors below build exact unitaries.
  friend Unitary2 gate_matrix(real, real);
  friend Unitary2 rotation_z(real);

  Matrix2 m_;
};

/// G(chi, beta) = [[cos b/2, i e^{i chi} sin b/2], [i e^{-i chi} sin b/2, cos b/2]],
/// the map on (s_bc, s_b'c) produced by a Raman pulse of phase chi and area beta.
inline Unitary2 gate_matrix(real chi, real beta) {
  const real c = std::cos(beta / 2.0);
  const real s = std::sin(beta / 2.0);
  return Unitary2(Matrix2::from_entries(c, I * std::polar(s, chi), I * std::polar(s, -chi), c));
}

inline Unitary2 rotation_x(real beta) {
  // [[cos, -i sin], [-i sin, cos]]
  return gate_matrix(pi, beta);
}

inline Unitary2 rotation_y(real beta) {
  // [[cos, -sin], [sin, cos]]
  return gate_matrix(pi / 2.0, beta);
}

inline Unitary2 rotation_z(real phi) {
  return Unitary2(Matrix2::from_entries(std::polar(1.0, -phi / 2.0), 0.0, 0.0, std::polar(1.0, phi / 2.0)));
}

// H~ = (1/sqrt2)[[1, 1], [-1, 1]], i.e. R_Y(-pi/2) = gate_matrix(-pi/2, pi/2).
// This is the matrix for which both Hadamard compositions below hold exactly.
inline Unitary2 h_tilde() { return rotation_y(-pi / 2.0); }

// e^{i pi/2} R_Z(pi) H~
inline Unitary2 hadamard() { return (rotation_z(pi) * h_tilde()).with_phase(pi / 2.0); }

// e^{i pi/2} H~ R_X(pi); equal to hadamard().
inline Unitary2 hadamard_via_x() { return (h_tilde() * rotation_x(pi)).with_phase(pi / 2.0); }

/// The transformation of photon amplitudes under gate G as it appears in the
/// release formula: c+ -> G11* c+ + G21* c-, c- -> G12* c+ + G22* c-. This is
/// the adjoint action G^dag on (c+, c-).
inline PolarizationQubit apply_to_state(const Unitary2& g, const PolarizationQubit& q) {
  require_normalized(q);
  const complex p = std::conj(g(0, 0)) * q.plus() + std::conj(g(1, 0)) * q.minus();
  const complex m = std::conj(g(0, 1)) * q.plus() + std::conj(g(1, 1)) * q.minus();
  return make_qubit(p, m);
}

/// Plain matrix action (Omega+, Omega-) -> G (Omega+, Omega-).
inline std::array<complex, 2> apply_to_fields(const Unitary2& g, const std::array<complex, 2>& omega) {
  return g.matrix() * omega;
}

// Pointwise over a grid; both spans must have the same length.
inline void apply_to_fields(const Unitary2& g, std::span<complex> plus, std::span<complex> minus) {
  if (plus.size() != minus.size()) throw ValidationError("field components differ in length");
  for (std::size_t j = 0; j < plus.size(); ++j) {
    const auto out = g.matrix() * std::array<complex, 2>{plus[j], minus[j]};
    plus[j] = out[0];
    minus[j] = out[1];
  }
}

// Amplitude pair transformed by plain multiplication, renormalized. This is
// what the linear storage/release dynamics does to the envelope amplitudes.
inline PolarizationQubit apply_as_field_map(const Unitary2& g, const PolarizationQubit& q) {
  require_normalized(q);
  return make_qubit(g.matrix() * q.amplitudes());
}

/// Raman pulse: constant phase chi, envelope |W|(t) sampled at spacing dt.
class GatePulse {
 public:
  static GatePulse constant(real chi, real omega_w, real tau) {
    if (!(tau > 0.0)) throw ValidationError("gate pulse duration must be positive");
    if (!(omega_w >= 0.0)) throw ValidationError("gate pulse |W| must be non-negative");
    return GatePulse(chi, {omega_w, omega_w}, tau);
  }

  // Constant pulse of duration tau realizing area beta.
  static GatePulse from_area(real chi, real beta, real tau = 0.01) {
    if (!(beta >= 0.0)) throw ValidationError("gate pulse area must be non-negative");
    return constant(chi, beta / (2.0 * tau), tau);
  }

  static GatePulse sampled(real chi, std::vector<real> omega_w, real dt) {
    if (omega_w.size() < 2) throw ValidationError("sampled gate pulse needs at least two samples");
    if (!(dt > 0.0)) throw ValidationError("sample spacing must be positive");
    for (real w : omega_w)
      if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("gate pulse |W| must be non-negative");
    const real tau = dt * static_cast<real>(omega_w.size() - 1);
    return GatePulse(chi, std::move(omega_w), tau);
  }

  real chi() const { return chi_; }
  real tau() const { return tau_; }
  const std::vector<real>& envelope() const { return omega_w_; }
  real dt() const { return tau_ / static_cast<real>(omega_w_.size() - 1); }

  // beta = 2 * integral of |W| over the pulse.
  real beta() const { return 2.0 * trapezoid(std::span<const real>(omega_w_), dt()); }

  Unitary2 gate() const { return gate_matrix(chi_, beta()); }

 private:
  GatePulse(real chi, std::vector<real> omega_w, real tau)
      : chi_(chi), omega_w_(std::move(omega_w)), tau_(tau) {}

  real chi_;
  std::vector<real> omega_w_;
  real tau_;
};

/// Magnetic pulse: phase rate g_F * rate_per_field * B(t), B sampled at spacing dt.
/// rate_per_field is e/2m expressed in SimUnits per unit of B.
class ZeemanPulse {
 public:
  static ZeemanPulse sampled(real g_factor, real rate_per_field, std::vector<real> b_field, real dt) {
    if (b_field.size() < 2) throw ValidationError("sampled Zeeman pulse needs at least two samples");
    if (!(dt > 0.0)) throw ValidationError("sample spacing must be positive");
    for (real b : b_field)
      if (!std::isfinite(b)) throw ValidationError("magnetic field samples must be finite");
    return ZeemanPulse(g_factor, rate_per_field, std::move(b_field), dt);
  }

  static ZeemanPulse constant(real g_factor, real rate_per_field, real b_field, real tau) {
    if (!(tau > 0.0)) throw ValidationError("Zeeman pulse duration must be positive");
    return sampled(g_factor, rate_per_field, {b_field, b_field}, tau);
  }

  // Unit rate, constant field over tau, realizing area phi.
  static ZeemanPulse from_area(real phi, real tau = 0.01) { return constant(1.0, 1.0, phi / (2.0 * tau), tau); }

  real g_factor() const { return g_factor_; }
  real rate_per_field() const { return rate_; }
  const std::vector<real>& b_field() const { return b_; }
  real dt() const { return dt_; }
  real tau() const { return dt_ * static_cast<real>(b_.size() - 1); }

  Unitary2 gate() const;

 private:
  ZeemanPulse(real g, real rate, std::vector<real> b, real dt) : g_factor_(g), rate_(rate), b_(std::move(b)), dt_(dt) {}

  real g_factor_;
  real rate_;
  std::vector<real> b_;
  real dt_;
};

// phi = 2 * integral of g_F * rate * B(t) dt (trapezoid rule).
inline real zeeman_area(const ZeemanPulse& pulse) {
  return 2.0 * pulse.g_factor() * pulse.rate_per_field() *
         trapezoid(std::span<const real>(pulse.b_field()), pulse.dt());
}

inline Unitary2 ZeemanPulse::gate() const { return rotation_z(zeeman_area(*this)); }

/// Two-photon b - f - b' coupling through far-detuned U+ and U-.
struct RamanCouplingSpec {
  complex u_plus;   // <b|U+|f>
  complex u_minus;  // <f|U-|b'>
  real detuning;    // E_b + hbar*omega_U+ - E_f
};

struct EffectiveCoupling {
  complex w;
  real magnitude;
  real chi;
};

inline EffectiveCoupling effective_coupling(const RamanCouplingSpec& spec) {
  if (spec.detuning == 0.0 || !std::isfinite(spec.detuning))
    throw ValidationError("Raman detuning must be nonzero: the effective coupling diverges on resonance");
  const complex w = spec.u_plus * spec.u_minus / spec.detuning;
  return {w, std::abs(w), std::abs(w) > 0.0 ? std::arg(w) : 0.0};
}

using Manipulation = std::variant<GatePulse, ZeemanPulse>;

inline Unitary2 manipulation_gate(const Manipulation& m) {
  return std::visit([](const auto& p) { return p.gate(); }, m);
}

// Product of the maps applied in order: the last manipulation acts leftmost.
inline Unitary2 compose(std::span<const Manipulation> sequence) {
  Unitary2 total;
  for (const auto& m : sequence) total = manipulation_gate(m) * total;
  return total;
}

/// target = e^{i alpha} R_Z(phi2) R_Y(beta) R_Z(phi1).
struct EulerZYZ {
  real phi1 = 0.0;
  real beta = 0.0;
  real phi2 = 0.0;
  real alpha = 0.0;

  Unitary2 compose() const { return (rotation_z(phi2) * rotation_y(beta) * rotation_z(phi1)).with_phase(alpha); }

  // Zeeman(phi1), Raman(chi = pi/2, beta), Zeeman(phi2); zero-area steps are skipped.
  std::vector<Manipulation> pulses(real tau = 0.01) const {
    std::vector<Manipulation> out;
    if (phi1 != 0.0) out.emplace_back(ZeemanPulse::from_area(phi1, tau));
    if (beta != 0.0) out.emplace_back(GatePulse::from_area(pi / 2.0, beta, tau));
    if (phi2 != 0.0) out.emplace_back(ZeemanPulse::from_area(phi2, tau));
    return out;
  }
};

inline EulerZYZ synthesize(const Matrix2& target) {
  if (!is_unitary(target, 1e-10)) throw ValidationError("synthesis target is not unitary");
  // R_Z(p2) R_Y(b) R_Z(p1) = [[e^{-i(p1+p2)/2} c, -e^{i(p1-p2)/2} s], [e^{i(p2-p1)/2} s, e^{i(p1+p2)/2} c]]
  const real alpha = std::arg(target.det()) / 2.0;
  const Matrix2 v = std::polar(1.0, -alpha) * target;
  const complex a = v(0, 0);
  const complex b = v(1, 0);
  const real beta = 2.0 * std::atan2(std::abs(b), std::abs(a));
  const real arg_a = std::abs(a) > 1e-14 ? std::arg(a) : 0.0;
  const real arg_b = std::abs(b) > 1e-14 ? std::arg(b) : 0.0;
  EulerZYZ out;
  out.alpha = alpha;
  out.beta = beta;
  out.phi2 = arg_b - arg_a;
  out.phi1 = -arg_a - arg_b;
  return out;
}

inline EulerZYZ synthesize(const Unitary2& target) { return synthesize(target.matrix()); }

inline real wrap_angle(real a) {
  a = std::remainder(a, 2.0 * pi);
  return a <= -pi ? a + 2.0 * pi : a;
}

/// Shortest physical schedule for a target: at most one Raman pulse followed
/// by one Zeeman pulse. Uses R_Z(-p) G(chi, b) R_Z(p) = G(chi + p, b), so
/// e^{ia} R_Z(p2) R_Y(b) R_Z(p1) = e^{ia} R_Z(p1 + p2) G(pi/2 + p1, b).
struct PulsePlan {
  std::vector<Manipulation> pulses;
  Unitary2 realized;          // product of the pulses
  real global_phase = 0.0;    // target = e^{i global_phase} realized
  real distance = 0.0;        // entrywise, after removing the global phase
};

inline PulsePlan plan_pulses(const Unitary2& target, real tau = 0.01) {
  const EulerZYZ e = synthesize(target);
  PulsePlan plan;
  const real zeeman = wrap_angle(e.phi1 + e.phi2);
  if (std::abs(e.beta) > 1e-12) plan.pulses.emplace_back(GatePulse::from_area(wrap_angle(pi / 2.0 + e.phi1), e.beta, tau));
  if (std::abs(zeeman) > 1e-12) plan.pulses.emplace_back(ZeemanPulse::from_area(zeeman, tau));
  plan.realized = compose(plan.pulses);
  plan.global_phase = relative_global_phase(target.matrix(), plan.realized.matrix());
  plan.distance = distance_up_to_phase(target.matrix(), plan.realized.matrix());
  return plan;
}

}  // namespace tripod
