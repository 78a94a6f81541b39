#pragma once

// Two-mode probe propagation through the tripod medium.
//
// Full engine: (d_t + d_z) Omega+- = i kappa^2 s_{ba|b'a}, coupled to the Bloch
// equations, advanced by Strang splitting (local RK4 half step, upwind
// advection, local RK4 half step). With dt == dz the upwind step is an exact
// one-cell shift.
//
// Adiabatic engine: the dark-state limit, written for the stored coherence
// s = -Omega/(2 Omega_c):  ds/dt = -cos^2(theta) ds/dz - b(t) s,
// b = Omega_c Omega_c' / (Omega_c^2 + kappa^2/2).
//
// Polariton engine: psi = P (Omega cos(theta) - sqrt2 kappa s_bc sin(theta)) is
// carried rigidly at velocity cos^2(theta).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "tripod/fields.hpp"
#include "tripod/medium.hpp"

namespace tripod {

/// Control Rabi frequency Omega_c(t) >= 0 over the protocol timeline.
class ControlSchedule {
 public:
  enum class Kind { constant, store_release, step_off, sampled };

  ControlSchedule() = default;

  static ControlSchedule constant(real omega_c) {
    ControlSchedule s;
    s.kind_ = Kind::constant;
    s.omega0_ = omega_c;
    s.validate();
    return s;
  }

  // Omega0 [(1 - tanh((t - t_off)/T))/2 + (1 + tanh((t - t_on)/T))/2]: on, ramp
  // off around t_off, hold, ramp back on around t_on. t_on may be +inf.
  static ControlSchedule store_release(real omega_c0, real t_off, real t_on, real ramp_time) {
    ControlSchedule s;
    s.kind_ = Kind::store_release;
    s.omega0_ = omega_c0;
    s.t_off_ = t_off;
    s.t_on_ = t_on;
    s.ramp_ = ramp_time;
    s.validate();
    return s;
  }

  // Omega0 for t < t_switch, 0 afterwards.
  static ControlSchedule step_off(real omega_c0, real t_switch) {
    ControlSchedule s;
    s.kind_ = Kind::step_off;
    s.omega0_ = omega_c0;
    s.t_off_ = t_switch;
    s.validate();
    return s;
  }

  // Linear interpolation between samples at t = k*dt, held constant outside.
  static ControlSchedule sampled(std::vector<real> values, real dt) {
    ControlSchedule s;
    s.kind_ = Kind::sampled;
    s.samples_ = std::move(values);
    s.dt_ = dt;
    s.validate();
    return s;
  }

  Kind kind() const { return kind_; }
  real omega_c0() const { return kind_ == Kind::sampled ? *std::max_element(samples_.begin(), samples_.end()) : omega0_; }
  real t_off() const { return t_off_; }
  real t_on() const { return t_on_; }
  real ramp_time() const { return ramp_; }

  real omega_c(real t) const {
    switch (kind_) {
      case Kind::constant:
        return omega0_;
      case Kind::store_release: {
        const real off = 0.5 * (1.0 - std::tanh((t - t_off_) / ramp_));
        const real on = std::isfinite(t_on_) ? 0.5 * (1.0 + std::tanh((t - t_on_) / ramp_)) : 0.0;
        return omega0_ * (off + on);
      }
      case Kind::step_off:
        return t < t_off_ ? omega0_ : 0.0;
      case Kind::sampled: {
        if (t <= 0.0) return samples_.front();
        const real u = t / dt_;
        const auto k = static_cast<std::size_t>(u);
        if (k + 1 >= samples_.size()) return samples_.back();
        const real f = u - static_cast<real>(k);
        return (1.0 - f) * samples_[k] + f * samples_[k + 1];
      }
    }
    return 0.0;
  }

  // dOmega_c/dt; infinite at the discontinuity of a step schedule.
  real derivative(real t) const {
    switch (kind_) {
      case Kind::constant:
        return 0.0;
      case Kind::store_release: {
        const real a = 1.0 / std::cosh((t - t_off_) / ramp_);
        const real b = std::isfinite(t_on_) ? 1.0 / std::cosh((t - t_on_) / ramp_) : 0.0;
        return omega0_ * (b * b - a * a) / (2.0 * ramp_);
      }
      case Kind::step_off:
        return t == t_off_ ? -std::numeric_limits<real>::infinity() : 0.0;
      case Kind::sampled: {
        if (t < 0.0) return 0.0;
        const auto k = static_cast<std::size_t>(t / dt_);
        if (k + 1 >= samples_.size()) return 0.0;
        return (samples_[k + 1] - samples_[k]) / dt_;
      }
    }
    return 0.0;
  }

  // tan(theta) = kappa / (sqrt2 Omega_c), theta in (0, pi/2].
  real theta(real t, real kappa) const { return std::atan2(kappa, std::numbers::sqrt2 * omega_c(t)); }

  real cos2_theta(real t, real kappa) const {
    const real oc = omega_c(t);
    return 2.0 * oc * oc / (2.0 * oc * oc + kappa * kappa);
  }

  real dtheta_dt(real t, real kappa) const {
    const real oc = omega_c(t);
    const real a = kappa / std::numbers::sqrt2;
    return -a * derivative(t) / (oc * oc + a * a);
  }

  // Time scale on which Omega_c changes; used to pick quadrature resolution.
  real time_scale() const {
    switch (kind_) {
      case Kind::store_release:
        return ramp_;
      case Kind::sampled:
        return dt_;
      default:
        return std::numeric_limits<real>::infinity();
    }
  }

  // Points in [t0, t1] where Omega_c is not smooth.
  std::vector<real> breakpoints(real t0, real t1) const {
    std::vector<real> out;
    if (kind_ == Kind::step_off && t_off_ > t0 && t_off_ < t1) out.push_back(t_off_);
    if (kind_ == Kind::sampled) {
      const auto k0 = static_cast<long long>(std::ceil(std::max(t0, 0.0) / dt_));
      for (auto k = k0; k < static_cast<long long>(samples_.size()); ++k) {
        const real tk = dt_ * static_cast<real>(k);
        if (tk >= t1) break;
        if (tk > t0) out.push_back(tk);
      }
    }
    return out;
  }

 private:
  void validate() const {
    switch (kind_) {
      case Kind::constant:
      case Kind::step_off:
        if (!(omega0_ >= 0.0) || !std::isfinite(omega0_))
          throw ValidationError("control Rabi frequency must be finite and non-negative");
        break;
      case Kind::store_release:
        if (!(omega0_ > 0.0) || !std::isfinite(omega0_))
          throw ValidationError("control Rabi frequency must be positive");
        if (!(ramp_ > 0.0)) throw ValidationError("ramp time must be positive");
        if (!(t_on_ > t_off_)) throw ValidationError("control must switch back on after it switches off");
        break;
      case Kind::sampled:
        if (samples_.size() < 2 || !(dt_ > 0.0))
          throw ValidationError("sampled schedule needs two or more samples and dt > 0");
        for (real v : samples_)
          if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("control samples must be non-negative");
        break;
    }
  }

  Kind kind_ = Kind::constant;
  real omega0_ = 0.0;
  real t_off_ = 0.0;
  real t_on_ = std::numeric_limits<real>::infinity();
  real ramp_ = 1.0;
  std::vector<real> samples_;
  real dt_ = 1.0;
};

inline real group_velocity(real theta) {
  const real c = std::cos(theta);
  return c * c;
}

/// D = integral of cos^2(theta) from t0 to t1 (composite Simpson, split at
/// breakpoints of the schedule).
inline real displacement(const ControlSchedule& schedule, real kappa, real t0, real t1) {
  if (t1 <= t0) return 0.0;
  auto f = [&](real t) { return schedule.cos2_theta(t, kappa); };
  auto simpson = [&](real a, real b) {
    const real scale = schedule.time_scale();
    std::size_t n = std::isfinite(scale) ? static_cast<std::size_t>(std::ceil((b - a) / (scale / 100.0))) : 2;
    n = std::clamp<std::size_t>(n + (n & 1u), 2, 20'000'000);
    const real h = (b - a) / static_cast<real>(n);
    real acc = f(a) + f(b);
    for (std::size_t k = 1; k < n; ++k) acc += (k & 1u ? 4.0 : 2.0) * f(a + h * static_cast<real>(k));
    return acc * h / 3.0;
  };
  real total = 0.0;
  real a = t0;
  for (real bp : schedule.breakpoints(t0, t1)) {
    // just inside each side of a jump
    const real eps = 1e-12 * std::max(1.0, std::abs(bp));
    total += simpson(a, bp - eps);
    a = bp + eps;
  }
  total += simpson(a, t1);
  return total;
}

/// psi+- = P (Omega+- cos(theta) - sqrt2 kappa s_{bc|b'c} sin(theta)).
inline PolaritonState polariton_transform(const FieldState& fields, const MediumState& medium, real theta,
                                          const MediumParams& params) {
  require_same_grid(fields.grid, medium.grid);
  const real pf = params.polariton_prefactor();
  const real c = std::cos(theta);
  const real s = std::numbers::sqrt2 * params.kappa * std::sin(theta);
  PolaritonState psi(fields.grid);
  for (std::size_t j = 0; j < fields.grid.size(); ++j) {
    psi.plus[j] = pf * (fields.plus[j] * c - s * medium.s_bc[j]);
    psi.minus[j] = pf * (fields.minus[j] * c - s * medium.s_bprime_c[j]);
  }
  return psi;
}

namespace detail {

// Central first derivative with zero boundary values outside the grid.
inline std::vector<complex> derivative_z(const std::vector<complex>& u, real dz) {
  const std::size_t n = u.size();
  std::vector<complex> d(n);
  for (std::size_t j = 0; j < n; ++j) {
    const complex l = j > 0 ? u[j - 1] : complex{};
    const complex r = j + 1 < n ? u[j + 1] : complex{};
    d[j] = (r - l) / (2.0 * dz);
  }
  return d;
}

// Adiabatic rate coefficients for s: velocity cos^2(theta) and damping b.
struct AdiabaticCoefficients {
  real velocity;
  real damping;
};

inline AdiabaticCoefficients adiabatic_coefficients(const ControlSchedule& s, real t, real kappa) {
  const real oc = s.omega_c(t);
  const real den = oc * oc + 0.5 * kappa * kappa;
  return {oc * oc / den, oc * s.derivative(t) / den};
}

}  // namespace detail

/// Inverse of polariton_transform for a state on the dark manifold at time t:
/// Omega = psi cos(theta)/P, s_bc = -psi sin(theta)/(sqrt2 kappa P), and the
/// optical coherence from i ds_bc/dt = -Omega_c s_ba.
inline std::pair<FieldState, MediumState> dark_state_from_polariton(const PolaritonState& psi,
                                                                    const ControlSchedule& schedule, real t,
                                                                    const MediumParams& params) {
  const real kappa = params.kappa;
  const real pf = params.polariton_prefactor();
  const real theta = schedule.theta(t, kappa);
  const real c = std::cos(theta);
  const real s = std::sin(theta) / (std::numbers::sqrt2 * kappa);
  FieldState f(psi.grid);
  MediumState m(psi.grid);
  for (std::size_t j = 0; j < psi.grid.size(); ++j) {
    f.plus[j] = psi.plus[j] * c / pf;
    f.minus[j] = psi.minus[j] * c / pf;
    m.s_bc[j] = -psi.plus[j] * s / pf;
    m.s_bprime_c[j] = -psi.minus[j] * s / pf;
  }
  const real oc = schedule.omega_c(t);
  if (oc > 0.0) {
    const auto k = detail::adiabatic_coefficients(schedule, t, kappa);
    const auto dp = detail::derivative_z(m.s_bc, psi.grid.dz());
    const auto dm = detail::derivative_z(m.s_bprime_c, psi.grid.dz());
    for (std::size_t j = 0; j < psi.grid.size(); ++j) {
      const complex rate_p = -k.velocity * dp[j] - k.damping * m.s_bc[j];
      const complex rate_m = -k.velocity * dm[j] - k.damping * m.s_bprime_c[j];
      m.s_ba[j] = -I * rate_p / oc;
      m.s_bprime_a[j] = -I * rate_m / oc;
    }
  }
  return {std::move(f), std::move(m)};
}

// Four-point Lagrange interpolation of cell-centred samples at position x;
// samples outside the grid count as zero.
inline complex interpolate_cubic(const std::vector<complex>& u, const Grid1D& grid, real x) {
  const real pos = x / grid.dz() - 0.5;
  const real fl = std::floor(pos);
  const long long i = static_cast<long long>(fl);
  const real f = pos - fl;
  const long long n = static_cast<long long>(u.size());
  auto at = [&](long long k) { return (k >= 0 && k < n) ? u[static_cast<std::size_t>(k)] : complex{}; };
  const real w0 = -f * (f - 1.0) * (f - 2.0) / 6.0;
  const real w1 = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0;
  const real w2 = -(f + 1.0) * f * (f - 2.0) / 2.0;
  const real w3 = (f + 1.0) * f * (f - 1.0) / 6.0;
  return w0 * at(i - 1) + w1 * at(i) + w2 * at(i + 1) + w3 * at(i + 2);
}

/// Fraction of the profile's norm that a rigid shift by d would carry past z = L.
inline real fraction_shifted_out(const PolaritonState& psi, real d) {
  real total = 0.0;
  real out = 0.0;
  for (std::size_t j = 0; j < psi.grid.size(); ++j) {
    const real w = std::norm(psi.plus[j]) + std::norm(psi.minus[j]);
    total += w;
    if (psi.grid.z(j) + d > psi.grid.length()) out += w;
  }
  return total > 0.0 ? out / total : 0.0;
}

// Rigid translation by d with cubic interpolation.
inline PolaritonState translate(const PolaritonState& psi, real d) {
  PolaritonState out(psi.grid);
  for (std::size_t j = 0; j < psi.grid.size(); ++j) {
    const real x = psi.grid.z(j) - d;
    out.plus[j] = interpolate_cubic(psi.plus, psi.grid, x);
    out.minus[j] = interpolate_cubic(psi.minus, psi.grid, x);
  }
  return out;
}

/// psi(z, t) = psi(z - D, t0) with D = integral_t0^t cos^2(theta). Throws if
/// more than `max_loss` of the norm would leave the grid.
inline PolaritonState analytic_polariton_evolve(const PolaritonState& initial, const ControlSchedule& schedule,
                                                real kappa, real t, real t0 = 0.0, real max_loss = 1e-3) {
  const real d = displacement(schedule, kappa, t0, t);
  const real lost = fraction_shifted_out(initial, d);
  if (lost > max_loss)
    throw ValidationError("polariton profile advected off the grid: displacement " + std::to_string(d) +
                          " carries fraction " + std::to_string(lost) + " of the norm past z = L");
  return translate(initial, d);
}

struct StepOptions {
  int substeps = 0;  // RK4 substeps per half step; 0 picks them from the local frequencies
  real overflow_guard = 1e150;
  complex inflow_plus{};   // Omega+ entering at z = 0 during the step
  complex inflow_minus{};
};

// Omega at the last cell during the step, the value handed to the readout.
struct Outflow {
  complex plus;
  complex minus;
};

namespace detail {

inline int auto_substeps(real kappa, real omega_c_max, real h) {
  const real w = std::sqrt(0.5 * kappa * kappa + omega_c_max * omega_c_max);
  return std::max(1, static_cast<int>(std::ceil(w * h / 0.25)));
}

// Local (advection-free) system at one cell: fields sourced by i kappa^2 s_{ba|b'a}.
inline LocalAmplitudes local_rates(const LocalAmplitudes& x, complex s_bbprime, real omega_c, real kappa2) {
  LocalAmplitudes r = bloch_rates(x, s_bbprime, omega_c);
  r.omega_plus = I * kappa2 * x.s_ba;
  r.omega_minus = I * kappa2 * x.s_bprime_a;
  return r;
}

inline LocalAmplitudes axpy(const LocalAmplitudes& x, real h, const LocalAmplitudes& k) {
  return {x.omega_plus + h * k.omega_plus, x.omega_minus + h * k.omega_minus, x.s_ba + h * k.s_ba,
          x.s_bprime_a + h * k.s_bprime_a, x.s_bc + h * k.s_bc, x.s_bprime_c + h * k.s_bprime_c};
}

// RK4 over [t, t + h] in m substeps for every cell.
inline void local_half_step(FieldState& f, MediumState& m, const ControlSchedule& schedule, real t, real h,
                            real kappa, int substeps) {
  const real hs = h / substeps;
  std::vector<real> oc(static_cast<std::size_t>(2 * substeps + 1));
  for (std::size_t k = 0; k < oc.size(); ++k) oc[k] = schedule.omega_c(t + 0.5 * hs * static_cast<real>(k));
  const real kappa2 = kappa * kappa;
  for (std::size_t j = 0; j < f.grid.size(); ++j) {
    LocalAmplitudes x{f.plus[j], f.minus[j], m.s_ba[j], m.s_bprime_a[j], m.s_bc[j], m.s_bprime_c[j]};
    const complex sbb = m.s_bbprime[j];
    for (int s = 0; s < substeps; ++s) {
      const real o0 = oc[static_cast<std::size_t>(2 * s)];
      const real o1 = oc[static_cast<std::size_t>(2 * s + 1)];
      const real o2 = oc[static_cast<std::size_t>(2 * s + 2)];
      const auto k1 = local_rates(x, sbb, o0, kappa2);
      const auto k2 = local_rates(axpy(x, 0.5 * hs, k1), sbb, o1, kappa2);
      const auto k3 = local_rates(axpy(x, 0.5 * hs, k2), sbb, o1, kappa2);
      const auto k4 = local_rates(axpy(x, hs, k3), sbb, o2, kappa2);
      x.omega_plus += hs / 6.0 * (k1.omega_plus + 2.0 * k2.omega_plus + 2.0 * k3.omega_plus + k4.omega_plus);
      x.omega_minus += hs / 6.0 * (k1.omega_minus + 2.0 * k2.omega_minus + 2.0 * k3.omega_minus + k4.omega_minus);
      x.s_ba += hs / 6.0 * (k1.s_ba + 2.0 * k2.s_ba + 2.0 * k3.s_ba + k4.s_ba);
      x.s_bprime_a += hs / 6.0 * (k1.s_bprime_a + 2.0 * k2.s_bprime_a + 2.0 * k3.s_bprime_a + k4.s_bprime_a);
      x.s_bc += hs / 6.0 * (k1.s_bc + 2.0 * k2.s_bc + 2.0 * k3.s_bc + k4.s_bc);
      x.s_bprime_c += hs / 6.0 * (k1.s_bprime_c + 2.0 * k2.s_bprime_c + 2.0 * k3.s_bprime_c + k4.s_bprime_c);
    }
    f.plus[j] = x.omega_plus;
    f.minus[j] = x.omega_minus;
    m.s_ba[j] = x.s_ba;
    m.s_bprime_a[j] = x.s_bprime_a;
    m.s_bc[j] = x.s_bc;
    m.s_bprime_c[j] = x.s_bprime_c;
  }
}

// First-order upwind for c = 1; exact shift when dt == dz.
inline void upwind_advect(std::vector<complex>& u, real courant, complex inflow) {
  if (courant == 1.0) {
    std::move_backward(u.begin(), u.end() - 1, u.end());
    u.front() = inflow;
    return;
  }
  for (std::size_t j = u.size(); j-- > 0;) {
    const complex left = j > 0 ? u[j - 1] : inflow;
    u[j] -= courant * (u[j] - left);
  }
}

inline void check_finite(const FieldState& f, const MediumState& m, real guard) {
  auto bad = [guard](complex v) { return !std::isfinite(v.real()) || !std::isfinite(v.imag()) || std::abs(v) > guard; };
  for (std::size_t j = 0; j < f.grid.size(); ++j) {
    if (bad(f.plus[j]) || bad(f.minus[j]) || bad(m.s_ba[j]) || bad(m.s_bprime_a[j]) || bad(m.s_bc[j]) ||
        bad(m.s_bprime_c[j]))
      throw DivergenceError("solution diverged at cell " + std::to_string(j) + " (z = " + std::to_string(f.grid.z(j)) + ")", j);
  }
}

}  // namespace detail

inline void require_cfl(const Grid1D& grid, real dt) {
  if (!(dt > 0.0)) throw ValidationError("time step must be positive");
  if (dt > grid.dz() * (1.0 + 1e-12))
    throw ValidationError("CFL condition violated: dt = " + std::to_string(dt) + " exceeds dz = " + std::to_string(grid.dz()));
}

/// One full Maxwell-Bloch step over [t, t + dt], in place.
inline Outflow step_full(FieldState& fields, MediumState& medium, const ControlSchedule& schedule, real t, real dt,
                         const MediumParams& params, const StepOptions& opt = {}) {
  require_same_grid(fields.grid, medium.grid);
  require_cfl(fields.grid, dt);
  const real h = 0.5 * dt;
  int m = opt.substeps;
  if (m <= 0) {
    const real oc_max = std::max({schedule.omega_c(t), schedule.omega_c(t + h), schedule.omega_c(t + dt)});
    m = detail::auto_substeps(params.kappa, oc_max, h);
  }
  detail::local_half_step(fields, medium, schedule, t, h, params.kappa, m);
  const Outflow out{fields.plus.back(), fields.minus.back()};
  const real courant = std::abs(dt - fields.grid.dz()) <= 1e-12 * fields.grid.dz() ? 1.0 : dt / fields.grid.dz();
  detail::upwind_advect(fields.plus, courant, opt.inflow_plus);
  detail::upwind_advect(fields.minus, courant, opt.inflow_minus);
  detail::local_half_step(fields, medium, schedule, t + h, h, params.kappa, m);
  detail::check_finite(fields, medium, opt.overflow_guard);
  return out;
}

// Value form with a constant control field over the step.
inline std::pair<FieldState, MediumState> step_full(FieldState fields, MediumState medium, real omega_c, real dt,
                                                    const MediumParams& params) {
  step_full(fields, medium, ControlSchedule::constant(omega_c), 0.0, dt, params);
  return {std::move(fields), std::move(medium)};
}

struct AdiabaticOptions {
  // Below this control strength the adiabatic form is singular; callers should
  // switch to the polariton representation.
  real min_omega_c_fraction_of_kappa = 1e-2;
  complex inflow_plus{};  // Omega entering at z = 0
  complex inflow_minus{};
};

/// One step of the adiabatic-limit equation over [t, t + dt], in place. The
/// stored coherences s_bc, s_b'c carry the state; fields and optical
/// coherences are rebuilt from them at t + dt.
inline void adiabatic_step(FieldState& fields, MediumState& medium, const ControlSchedule& schedule, real t, real dt,
                           const MediumParams& params, const AdiabaticOptions& opt = {}) {
  require_same_grid(fields.grid, medium.grid);
  require_cfl(fields.grid, dt);
  const real kappa = params.kappa;
  const real threshold = opt.min_omega_c_fraction_of_kappa * kappa;
  for (real ts : {t, t + 0.5 * dt, t + dt}) {
    if (schedule.omega_c(ts) < threshold)
      throw ValidationError("control field below the adiabatic-engine threshold at t = " + std::to_string(ts) +
                            "; use the polariton engine across storage");
  }
  if (medium.max_abs_bbprime() > 0.0)
    throw ValidationError("adiabatic engine requires s_bb' = 0 (decoupled polarization modes)");

  const Grid1D& g = fields.grid;
  const std::size_t n = g.size();
  const real dz = g.dz();

  auto rhs = [&](const std::vector<complex>& s, real tt, complex inflow_field) {
    const auto k = detail::adiabatic_coefficients(schedule, tt, kappa);
    const complex ghost = -inflow_field / (2.0 * schedule.omega_c(tt));
    auto at = [&](long long j) { return j < 0 ? ghost : s[static_cast<std::size_t>(j)]; };
    std::vector<complex> r(n);
    for (std::size_t j = 0; j < n; ++j) {
      const auto jj = static_cast<long long>(j);
      complex dsdz;
      if (j + 1 < n)
        dsdz = (at(jj - 2) - 6.0 * at(jj - 1) + 3.0 * at(jj) + 2.0 * s[j + 1]) / (6.0 * dz);
      else
        dsdz = (3.0 * at(jj) - 4.0 * at(jj - 1) + at(jj - 2)) / (2.0 * dz);
      r[j] = -k.velocity * dsdz - k.damping * s[j];
    }
    return r;
  };

  auto advance = [&](std::vector<complex>& s, complex inflow) {
    auto k1 = rhs(s, t, inflow);
    std::vector<complex> tmp(n);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = s[j] + 0.5 * dt * k1[j];
    auto k2 = rhs(tmp, t + 0.5 * dt, inflow);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = s[j] + 0.5 * dt * k2[j];
    auto k3 = rhs(tmp, t + 0.5 * dt, inflow);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = s[j] + dt * k3[j];
    auto k4 = rhs(tmp, t + dt, inflow);
    for (std::size_t j = 0; j < n; ++j) s[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
  };

  advance(medium.s_bc, opt.inflow_plus);
  advance(medium.s_bprime_c, opt.inflow_minus);

  const real t1 = t + dt;
  const real oc = schedule.omega_c(t1);
  const auto rate_p = rhs(medium.s_bc, t1, complex{});
  const auto rate_m = rhs(medium.s_bprime_c, t1, complex{});
  for (std::size_t j = 0; j < n; ++j) {
    fields.plus[j] = -2.0 * oc * medium.s_bc[j];
    fields.minus[j] = -2.0 * oc * medium.s_bprime_c[j];
    medium.s_ba[j] = -I * rate_p[j] / oc;
    medium.s_bprime_a[j] = -I * rate_m[j] / oc;
  }
  detail::check_finite(fields, medium, 1e150);
}

/// Time series of Omega+- at the readout cell (last cell of the grid).
struct OutputRecord {
  std::vector<real> t;
  std::vector<complex> plus;
  std::vector<complex> minus;

  void push(real time, complex p, complex m) {
    t.push_back(time);
    plus.push_back(p);
    minus.push_back(m);
  }
  std::size_t size() const { return t.size(); }
  real dt() const { return t.size() > 1 ? t[1] - t[0] : 0.0; }

  // Integral over time of |Omega+|^2 + |Omega-|^2.
  real energy() const {
    real acc = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) acc += std::norm(plus[k]) + std::norm(minus[k]);
    return acc * dt();
  }

  // Intensity-weighted mean arrival time.
  real centroid() const {
    real num = 0.0;
    real den = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
      const real w = std::norm(plus[k]) + std::norm(minus[k]);
      num += w * t[k];
      den += w;
    }
    return den > 0.0 ? num / den : std::numeric_limits<real>::quiet_NaN();
  }
};

struct TransitMeasurement {
  real delay;           // arrival time minus vacuum transit time, scaled to length L
  real expected_delay;  // (1/cos^2(theta) - 1) L
  real transmitted_fraction;
};

/// Injects a Gaussian pulse exp(-(t - t_in)^2 / (2 width^2)) at z = 0 into a
/// medium with constant control field and measures the group delay at z = L
/// with the full engine.
inline TransitMeasurement measure_group_delay(const MediumParams& params, real cos2_theta, real width) {
  params.validate();
  if (!(cos2_theta > 0.0 && cos2_theta < 1.0)) throw ValidationError("cos^2(theta) must lie in (0, 1)");
  const Grid1D grid(params);
  const real a = params.kappa / std::numbers::sqrt2;
  const auto schedule = ControlSchedule::constant(a * std::sqrt(cos2_theta / (1.0 - cos2_theta)));
  const real dt = grid.dz();
  // injection at z = 0 happens at step midpoints; readout sits half a cell before L
  const real path = grid.length() - 0.5 * grid.dz();
  const real t_in = 5.0 * width;
  const real t_end = t_in + path / cos2_theta + 8.0 * width;
  FieldState f(grid);
  MediumState m(grid);
  OutputRecord rec;
  real injected = 0.0;
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt));
  for (std::size_t k = 0; k < steps; ++k) {
    const real t = dt * static_cast<real>(k);
    const real x = (t + 0.5 * dt - t_in) / width;
    StepOptions opt;
    opt.inflow_plus = std::exp(-0.5 * x * x);
    injected += std::norm(opt.inflow_plus) * dt;
    const auto out = step_full(f, m, schedule, t, dt, params, opt);
    rec.push(t + 0.5 * dt, out.plus, out.minus);
  }
  const real delay = (rec.centroid() - t_in - path) * grid.length() / path;
  return {delay, (1.0 / cos2_theta - 1.0) * grid.length(), rec.energy() / injected};
}

/// Plot rows: t, z, Re/Im of Omega+, Omega-, s_bc, s_b'c, psi+, psi-.
inline void write_snapshot_header(std::ostream& os) {
  os << "# schema: tripod-snapshots/1\n"
        "t,z,re_omega_plus,im_omega_plus,re_omega_minus,im_omega_minus,re_s_bc,im_s_bc,"
        "re_s_bprime_c,im_s_bprime_c,re_psi_plus,im_psi_plus,re_psi_minus,im_psi_minus\n";
}

inline void write_snapshot_rows(std::ostream& os, real t, const FieldState& f, const MediumState& m,
                                const PolaritonState& psi) {
  char buf[512];
  for (std::size_t j = 0; j < f.grid.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  t, f.grid.z(j), f.plus[j].real(), f.plus[j].imag(), f.minus[j].real(), f.minus[j].imag(),
                  m.s_bc[j].real(), m.s_bc[j].imag(), m.s_bprime_c[j].real(), m.s_bprime_c[j].imag(),
                  psi.plus[j].real(), psi.plus[j].imag(), psi.minus[j].real(), psi.minus[j].imag());
    os << buf;
  }
}

}  // namespace tripod
