#pragma once

// Atomic coherences of the tripod medium: the linearized Bloch equations and
// the storage-stage maps (Raman rotation of the b/b' coherences, Zeeman phase).
//
// Level order for 3x3 matrices is {b, c, b'}. Populations are fixed at
// p_b = p_b' = 1/2, p_c = p_a = 0; they do not change at first order in the probe.

#include <array>
#include <cmath>
#include <vector>

#include "tripod/fields.hpp"
#include "tripod/gates.hpp"

namespace tripod {

struct MediumState {
  static constexpr real p_b = 0.5;
  static constexpr real p_bprime = 0.5;
  static constexpr real p_c = 0.0;
  static constexpr real p_a = 0.0;

  Grid1D grid;
  std::vector<complex> s_bc;
  std::vector<complex> s_bprime_c;
  std::vector<complex> s_ba;
  std::vector<complex> s_bprime_a;
  std::vector<complex> s_bbprime;

  explicit MediumState(const Grid1D& g)
      : grid(g), s_bc(g.size()), s_bprime_c(g.size()), s_ba(g.size()), s_bprime_a(g.size()), s_bbprime(g.size()) {}

  real max_abs_bbprime() const {
    real m = 0.0;
    for (const auto& v : s_bbprime) m = std::max(m, std::abs(v));
    return m;
  }
};

/// Optical and spin coherences at one point, plus the probe fields there.
struct LocalAmplitudes {
  complex omega_plus;
  complex omega_minus;
  complex s_ba;
  complex s_bprime_a;
  complex s_bc;
  complex s_bprime_c;
};

// Time derivatives of the four dynamical coherences (hbar = 1):
//   i ds_ba/dt  = -Omega+/2 - Omega_c s_bc  - Omega- s_bb'
//   i ds_b'a/dt = -Omega-/2 - Omega_c s_b'c - Omega+ s_b'b
//   i ds_bc/dt  = -Omega_c s_ba
//   i ds_b'c/dt = -Omega_c s_b'a
// s_b'b = conj(s_bb'). Field entries of the result are left zero.
inline LocalAmplitudes bloch_rates(const LocalAmplitudes& x, complex s_bbprime, real omega_c) {
  LocalAmplitudes r{};
  r.s_ba = I * (0.5 * x.omega_plus + omega_c * x.s_bc + x.omega_minus * s_bbprime);
  r.s_bprime_a = I * (0.5 * x.omega_minus + omega_c * x.s_bprime_c + x.omega_plus * std::conj(s_bbprime));
  r.s_bc = I * omega_c * x.s_ba;
  r.s_bprime_c = I * omega_c * x.s_bprime_a;
  return r;
}

/// Pointwise Bloch right-hand side over the grid. The returned state holds
/// time derivatives; its s_bbprime entries are zero (no first-order dynamics).
inline MediumState bloch_rhs(const MediumState& state, const FieldState& fields, real omega_c) {
  require_same_grid(state.grid, fields.grid);
  MediumState d(state.grid);
  for (std::size_t j = 0; j < state.grid.size(); ++j) {
    const LocalAmplitudes x{fields.plus[j], fields.minus[j], state.s_ba[j], state.s_bprime_a[j],
                            state.s_bc[j], state.s_bprime_c[j]};
    const auto r = bloch_rates(x, state.s_bbprime[j], omega_c);
    d.s_ba[j] = r.s_ba;
    d.s_bprime_a[j] = r.s_bprime_a;
    d.s_bc[j] = r.s_bc;
    d.s_bprime_c[j] = r.s_bprime_c;
  }
  return d;
}

/// Raman pulse during storage: (s_bc, s_b'c) -> G (s_bc, s_b'c) pointwise with
/// G = gate_matrix(chi, beta). The coupling acts on level b/b' only, so the
/// optical pair (s_ba, s_b'a) turns the same way. Populations and s_bb' are
/// untouched; with p_b = p_b' no s_bb' is generated.
inline MediumState apply_raman(MediumState state, const Unitary2& g) {
  apply_to_fields(g, std::span<complex>(state.s_bc), std::span<complex>(state.s_bprime_c));
  apply_to_fields(g, std::span<complex>(state.s_ba), std::span<complex>(state.s_bprime_a));
  return state;
}

inline MediumState apply_raman(MediumState state, const GatePulse& pulse) {
  return apply_raman(std::move(state), pulse.gate());
}

/// Magnetic pulse: s_bc -> s_bc e^{-i phi/2}, s_b'c -> s_b'c e^{i phi/2}. Level a
/// (M = 0) does not shift, so s_ba / s_b'a pick up the same factors, and s_bb'
/// picks up e^{-i phi}.
inline MediumState apply_zeeman(MediumState state, real phi) {
  const complex down = std::polar(1.0, -phi / 2.0);
  const complex up = std::polar(1.0, phi / 2.0);
  const complex cross = std::polar(1.0, -phi);
  for (std::size_t j = 0; j < state.grid.size(); ++j) {
    state.s_bc[j] *= down;
    state.s_ba[j] *= down;
    state.s_bprime_c[j] *= up;
    state.s_bprime_a[j] *= up;
    state.s_bbprime[j] *= cross;
  }
  return state;
}

inline MediumState apply_manipulation(MediumState state, const Manipulation& m) {
  if (const auto* g = std::get_if<GatePulse>(&m)) return apply_raman(std::move(state), *g);
  return apply_zeeman(std::move(state), zeeman_area(std::get<ZeemanPulse>(m)));
}

using Matrix3 = std::array<std::array<complex, 3>, 3>;

inline bool is_hermitian(const Matrix3& m, real tol = algebra_tol) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (std::abs(m[i][j] - std::conj(m[j][i])) > tol) return false;
  return true;
}

// e^{iV tau} in the {b, c, b'} basis for V = W|b><b'| + W*|b'><b|.
inline Matrix3 raman_propagator(real chi, real beta) {
  const auto g = gate_matrix(chi, beta);
  Matrix3 u{};
  u[0][0] = g(0, 0);
  u[0][2] = g(0, 1);
  u[2][0] = g(1, 0);
  u[2][2] = g(1, 1);
  u[1][1] = 1.0;
  return u;
}

/// Full conjugation sigma(tau) = e^{iV tau} sigma(0) e^{-iV tau} of the 3x3
/// coherence matrix over {b, c, b'}, for arbitrary populations.
inline Matrix3 apply_raman_full_matrix(const Matrix3& sigma, const GatePulse& pulse) {
  if (!is_hermitian(sigma)) throw ValidationError("coherence matrix must be Hermitian");
  const Matrix3 u = raman_propagator(pulse.chi(), pulse.beta());
  Matrix3 tmp{};
  Matrix3 out{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) tmp[i][j] += u[i][k] * sigma[k][j];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) out[i][j] += tmp[i][k] * std::conj(u[j][k]);
  return out;
}

}  // namespace tripod
