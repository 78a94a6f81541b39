#pragma once

// Store, manipulate, release: runs the three-stage protocol on one input qubit
// with a chosen engine, reads the released photon back out as a qubit, and
// reconstructs the realized gate from four probe inputs.

#include <algorithm>
#include <cmath>
#include <future>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tripod/gates.hpp"
#include "tripod/medium.hpp"
#include "tripod/propagation.hpp"

namespace tripod {

enum class Engine { full, polariton, hybrid };

inline const char* to_string(Engine e) {
  switch (e) {
    case Engine::full:
      return "full";
    case Engine::polariton:
      return "polariton";
    case Engine::hybrid:
      return "hybrid";
  }
  return "?";
}

enum class InputMode { initial_value, boundary };

// Initial-value mode: polariton profile exp(-(z - center)^2 / (2 width^2)) at t = 0.
// Boundary mode: field exp(-(t - center)^2 / (2 width^2)) entering at z = 0.
struct Envelope {
  real center = 0.25;
  real width = 0.05;
};

struct ProtocolSpec {
  MediumParams medium;
  PolarizationQubit input_qubit;
  InputMode input_mode = InputMode::initial_value;
  Envelope envelope;
  ControlSchedule schedule = ControlSchedule::store_release(1000.0 / std::numbers::sqrt2, 0.2, 0.7, 0.05);
  std::vector<Manipulation> manipulations;
  Engine engine = Engine::full;
  real dt = 0.0;     // 0: dt = dz
  real t_end = 0.0;  // 0: until the released pulse has left the medium
  int substeps = 0;  // full engine RK4 substeps per half step, 0: automatic
  std::vector<real> snapshot_times;
  real adiabaticity_threshold = 0.05;
  real hybrid_switch_fraction = 1e-2;  // of kappa
  real off_fraction = 1e-3;            // of Omega_c0; defines the storage window

  real hold_midpoint() const { return 0.5 * (schedule.t_off() + schedule.t_on()); }
  real time_step() const { return dt > 0.0 ? dt : medium.length / static_cast<real>(medium.n_z); }
};

/// Interval around the hold midpoint where Omega_c < fraction * Omega_c0.
inline std::pair<real, real> storage_window(const ControlSchedule& s, real fraction) {
  const real mid = 0.5 * (s.t_off() + s.t_on());
  const real level = fraction * s.omega_c0();
  if (s.omega_c(mid) >= level) return {mid, mid};
  auto bisect = [&](real inside, real outside) {
    for (int it = 0; it < 200; ++it) {
      const real m = 0.5 * (inside + outside);
      (s.omega_c(m) < level ? inside : outside) = m;
    }
    return inside;
  };
  return {bisect(mid, s.t_off() - 40.0 * s.ramp_time()), bisect(mid, s.t_on() + 40.0 * s.ramp_time())};
}

namespace detail {

// Fraction of exp(-x^2/sigma^2) (the intensity of a Gaussian amplitude of
// width sigma centred at c) lying in [a, b].
inline real gaussian_fraction(real c, real sigma, real a, real b) {
  return 0.5 * (std::erf((b - c) / sigma) - std::erf((a - c) / sigma));
}

// Spatial width of the polariton inside the medium.
inline real spatial_width(const ProtocolSpec& spec) {
  if (spec.input_mode == InputMode::initial_value) return spec.envelope.width;
  return spec.schedule.cos2_theta(spec.envelope.center, spec.medium.kappa) * spec.envelope.width;
}

// Polariton centre at time t (valid once the pulse is inside the medium).
inline real polariton_center(const ProtocolSpec& spec, real t) {
  const real k = spec.medium.kappa;
  if (spec.input_mode == InputMode::initial_value)
    return spec.envelope.center + displacement(spec.schedule, k, 0.0, t);
  return displacement(spec.schedule, k, spec.envelope.center, t);
}

}  // namespace detail

inline void validate(const ProtocolSpec& spec) {
  spec.medium.validate();
  require_normalized(spec.input_qubit, "input qubit");
  if (spec.schedule.kind() != ControlSchedule::Kind::store_release || !std::isfinite(spec.schedule.t_on()))
    throw ValidationError("protocol schedule must switch the control off and back on (store_release)");
  const Grid1D grid(spec.medium);
  require_cfl(grid, spec.time_step());
  if (!(spec.envelope.width > 0.0)) throw ValidationError("envelope width must be positive");
  if (spec.engine != Engine::full && spec.input_mode == InputMode::boundary)
    throw ValidationError("boundary injection is only supported by the full engine");

  const auto [w0, w1] = storage_window(spec.schedule, spec.off_fraction);
  if (!(w1 > w0))
    throw ValidationError("hold too short: the control field never drops below the storage threshold");
  real total = 0.0;
  for (const auto& m : spec.manipulations) total += std::visit([](const auto& p) { return p.tau(); }, m);
  const real mid = spec.hold_midpoint();
  if (!(mid - 0.5 * total > w0 && mid + 0.5 * total < w1))
    throw ValidationError("manipulation pulses (total duration " + std::to_string(total) +
                          ") do not fit inside the storage window [" + std::to_string(w0) + ", " +
                          std::to_string(w1) + "]");

  const real len = spec.medium.length;
  const real sigma = detail::spatial_width(spec);
  if (spec.input_mode == InputMode::initial_value &&
      detail::gaussian_fraction(spec.envelope.center, sigma, 0.0, len) < 0.999)
    throw ValidationError("input envelope clipped by the grid at t = 0");
  if (detail::gaussian_fraction(detail::polariton_center(spec, mid), sigma, 0.0, len) < 0.999)
    throw ValidationError("input envelope clipped by the grid at storage time");
}

/// max over t of |dtheta/dt| / (kappa max(cos(theta), eps)); capped at 1e6.
inline real adiabaticity_metric(const ControlSchedule& s, real kappa, real t0, real t1, real eps = 1e-3) {
  constexpr real cap = 1e6;
  if (s.kind() == ControlSchedule::Kind::step_off && s.t_off() >= t0 && s.t_off() <= t1 && s.omega_c0() > 0.0)
    return cap;
  const real scale = s.time_scale();
  std::size_t n = 20000;
  if (std::isfinite(scale)) n = std::max(n, static_cast<std::size_t>(std::ceil((t1 - t0) / (scale / 50.0))));
  real worst = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    const real t = t0 + (t1 - t0) * static_cast<real>(k) / static_cast<real>(n);
    const real v = std::abs(s.dtheta_dt(t, kappa)) / (kappa * std::max(std::cos(s.theta(t, kappa)), eps));
    if (!std::isfinite(v)) return cap;
    worst = std::max(worst, v);
  }
  return std::min(worst, cap);
}

/// Projects the two-row readout record onto its dominant temporal mode and
/// returns the normalized (c+, c-). The mode's phase is fixed so that it is
/// real and positive at its peak, which makes outputs of runs sharing a mode
/// shape phase-comparable. Throws ReleaseError if the record carries less than
/// `min_fraction` of `expected_energy` (when given) or no energy at all.
inline PolarizationQubit extract_qubit(const OutputRecord& rec, real expected_energy = 0.0, real min_fraction = 0.99) {
  const real e = rec.energy();
  if (!(e > 0.0) || !std::isfinite(e)) throw ReleaseError("release failed: no output energy in the readout window");
  if (expected_energy > 0.0 && e < min_fraction * expected_energy)
    throw ReleaseError("release failed: readout window holds only " + std::to_string(e / expected_energy) +
                       " of the stored norm");
  real a = 0.0;
  real d = 0.0;
  complex b{};
  for (std::size_t k = 0; k < rec.size(); ++k) {
    a += std::norm(rec.plus[k]);
    d += std::norm(rec.minus[k]);
    b += rec.plus[k] * std::conj(rec.minus[k]);
  }
  const real lambda = 0.5 * (a + d) + std::sqrt(0.25 * (a - d) * (a - d) + std::norm(b));
  std::array<complex, 2> u = a >= d ? std::array<complex, 2>{lambda - d, std::conj(b)}
                                    : std::array<complex, 2>{b, lambda - a};
  // temporal mode v = R^dag u
  std::size_t peak = 0;
  real peak_abs = -1.0;
  std::vector<complex> v(rec.size());
  real vnorm2 = 0.0;
  for (std::size_t k = 0; k < rec.size(); ++k) {
    v[k] = std::conj(u[0]) * rec.plus[k] + std::conj(u[1]) * rec.minus[k];
    vnorm2 += std::norm(v[k]);
    if (std::abs(v[k]) > peak_abs) {
      peak_abs = std::abs(v[k]);
      peak = k;
    }
  }
  const complex gauge = std::polar(1.0 / std::sqrt(vnorm2), -std::arg(v[peak]));
  complex cp{};
  complex cm{};
  for (std::size_t k = 0; k < rec.size(); ++k) {
    const complex mode = v[k] * gauge;
    cp += std::conj(mode) * rec.plus[k];
    cm += std::conj(mode) * rec.minus[k];
  }
  return make_qubit(cp, cm);
}

struct Snapshot {
  real t;
  FieldState fields;
  MediumState medium;
  PolaritonState polariton;
};

struct ProtocolDiagnostics {
  real max_abs_s_bbprime = 0.0;
  real population_b = MediumState::p_b;
  real population_bprime = MediumState::p_bprime;
  real norm_drift = 0.0;        // |stored norm - initial norm| / initial norm
  real release_fraction = 0.0;  // readout energy / initial polariton norm
  real adiabaticity = 0.0;
  real peak_delay = 0.0;  // centroid arrival minus vacuum transit time
  real t_end = 0.0;
  std::size_t steps = 0;
  std::vector<std::string> warnings;
};

struct ReconstructedGate {
  Matrix2 matrix;  // least-squares fit, largest entry made real positive
  Unitary2 nearest_unitary;
  real residual = 0.0;  // rms of |M x_k - y_k| over the probes
  bool flagged = false;
};

struct ProtocolResult {
  PolarizationQubit output_qubit;
  PolarizationQubit expected_qubit;  // target gate acting on the input amplitudes
  Unitary2 target_gate;
  real fidelity_to_target = 0.0;
  real fidelity_to_input = 0.0;
  real fidelity_to_state_picture = 0.0;  // against apply_to_state(target, input)
  std::optional<ReconstructedGate> realized_gate;
  ProtocolDiagnostics diagnostics;
  OutputRecord record;
  std::vector<Snapshot> snapshots;
};

namespace detail {

inline PolaritonState initial_polariton(const ProtocolSpec& spec, const Grid1D& grid) {
  PolaritonState psi(grid);
  if (spec.input_mode == InputMode::boundary) return psi;
  const real pf = spec.medium.polariton_prefactor();
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const real x = (grid.z(j) - spec.envelope.center) / spec.envelope.width;
    const real g = pf * std::exp(-0.5 * x * x);
    psi.plus[j] = spec.input_qubit.plus() * g;
    psi.minus[j] = spec.input_qubit.minus() * g;
  }
  return psi;
}

inline real automatic_t_end(const ProtocolSpec& spec) {
  const real len = spec.medium.length;
  const real sigma = spatial_width(spec);
  const real start = spec.input_mode == InputMode::boundary ? spec.envelope.center : 0.0;
  const real base = spec.input_mode == InputMode::boundary ? 0.0 : spec.envelope.center;
  const real target = len + 6.0 * sigma - base;
  const real step = std::max(spec.time_step(), 1e-3);
  real t = std::max(start, spec.schedule.t_on());
  real d = displacement(spec.schedule, spec.medium.kappa, start, t);
  for (int k = 0; k < 10'000'000 && d < target; ++k) {
    d += displacement(spec.schedule, spec.medium.kappa, t, t + step);
    t += step;
  }
  if (d < target) throw ValidationError("released pulse never leaves the medium");
  return t;
}

inline PolaritonState apply_to_polariton(PolaritonState psi, const Unitary2& g) {
  apply_to_fields(g, std::span<complex>(psi.plus), std::span<complex>(psi.minus));
  return psi;
}

class SnapshotTaker {
 public:
  SnapshotTaker(std::vector<real> times) : times_(std::move(times)) { std::sort(times_.begin(), times_.end()); }

  bool due(real t) const { return next_ < times_.size() && t >= times_[next_]; }
  void take(std::vector<Snapshot>& out, real t, const FieldState& f, const MediumState& m, const PolaritonState& psi) {
    while (due(t)) ++next_;
    out.push_back(Snapshot{t, f, m, psi});
  }

 private:
  std::vector<real> times_;
  std::size_t next_ = 0;
};

}  // namespace detail

/// Runs store / manipulate / release on spec.input_qubit. Manipulations act at
/// the first time step at or after the hold midpoint.
inline ProtocolResult run_protocol(const ProtocolSpec& spec) {
  validate(spec);
  const Grid1D grid(spec.medium);
  const MediumParams& params = spec.medium;
  const real kappa = params.kappa;
  const real pf = params.polariton_prefactor();
  const real dt = spec.time_step();
  const real t_mid = spec.hold_midpoint();
  const real t_end = spec.t_end > 0.0 ? spec.t_end : detail::automatic_t_end(spec);
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  const Unitary2 target = compose(spec.manipulations);

  ProtocolResult result;
  ProtocolDiagnostics& diag = result.diagnostics;
  OutputRecord& rec = result.record;
  detail::SnapshotTaker snaps(spec.snapshot_times);

  PolaritonState psi0 = detail::initial_polariton(spec, grid);
  real norm0 = psi0.norm2();
  real norm_mid = -1.0;
  bool applied = false;

  auto [fields, medium] = dark_state_from_polariton(psi0, spec.schedule, 0.0, params);
  diag.max_abs_s_bbprime = medium.max_abs_bbprime();

  if (spec.engine == Engine::full) {
    StepOptions opt;
    opt.substeps = spec.substeps;
    real injected = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
      const real t = dt * static_cast<real>(k);
      if (!applied && t >= t_mid) {
        norm_mid = polariton_transform(fields, medium, spec.schedule.theta(t, kappa), params).norm2();
        for (const auto& m : spec.manipulations) medium = apply_manipulation(std::move(medium), m);
        applied = true;
      }
      if (snaps.due(t))
        snaps.take(result.snapshots, t, fields, medium,
                   polariton_transform(fields, medium, spec.schedule.theta(t, kappa), params));
      if (spec.input_mode == InputMode::boundary) {
        const real x = (t + 0.5 * dt - spec.envelope.center) / spec.envelope.width;
        const real g = std::exp(-0.5 * x * x);
        opt.inflow_plus = spec.input_qubit.plus() * g;
        opt.inflow_minus = spec.input_qubit.minus() * g;
        injected += g * g * dt;
      }
      const Outflow out = step_full(fields, medium, spec.schedule, t, dt, params, opt);
      rec.push(t + 0.5 * dt, out.plus, out.minus);
      diag.max_abs_s_bbprime = std::max(diag.max_abs_s_bbprime, medium.max_abs_bbprime());
    }
    if (spec.input_mode == InputMode::boundary) norm0 = pf * pf * injected;
  } else if (spec.engine == Engine::polariton) {
    PolaritonState psi = psi0;
    real d = 0.0;  // displacement since t = 0
    real t_prev = 0.0;
    const real z_read = grid.length() - 0.5 * grid.dz();
    for (std::size_t k = 0; k < steps; ++k) {
      const real t = dt * static_cast<real>(k);
      if (!applied && t >= t_mid) {
        norm_mid = translate(psi, d).norm2();
        for (const auto& m : spec.manipulations) psi = detail::apply_to_polariton(std::move(psi), manipulation_gate(m));
        applied = true;
      }
      if (snaps.due(t)) {
        const real dd = d + displacement(spec.schedule, kappa, t_prev, t);
        const auto now = translate(psi, dd);
        auto [f, m] = dark_state_from_polariton(now, spec.schedule, t, params);
        snaps.take(result.snapshots, t, f, m, now);
      }
      const real ts = t + 0.5 * dt;
      d += displacement(spec.schedule, kappa, t_prev, ts);
      t_prev = ts;
      const real c = std::cos(spec.schedule.theta(ts, kappa)) / pf;
      rec.push(ts, c * interpolate_cubic(psi.plus, grid, z_read - d), c * interpolate_cubic(psi.minus, grid, z_read - d));
    }
  } else {
    // Hybrid: adiabatic PDE while the control is on, rigid polariton transport
    // while it is below the switch threshold.
    const real threshold = spec.hybrid_switch_fraction * kappa;
    AdiabaticOptions aopt;
    aopt.min_omega_c_fraction_of_kappa = spec.hybrid_switch_fraction;
    bool stored = false;
    PolaritonState psi(grid);
    real t_store = 0.0;
    const real z_read = grid.length() - 0.5 * grid.dz();
    auto above = [&](real t) {
      return spec.schedule.omega_c(t) >= threshold && spec.schedule.omega_c(t + 0.5 * dt) >= threshold &&
             spec.schedule.omega_c(t + dt) >= threshold;
    };
    for (std::size_t k = 0; k < steps; ++k) {
      const real t = dt * static_cast<real>(k);
      if (!stored && !above(t)) {
        psi = polariton_transform(fields, medium, spec.schedule.theta(t, kappa), params);
        t_store = t;
        stored = true;
      }
      if (stored && !applied && t >= t_mid) {
        norm_mid = psi.norm2();
        for (const auto& m : spec.manipulations) psi = detail::apply_to_polariton(std::move(psi), manipulation_gate(m));
        applied = true;
      }
      if (stored && applied && above(t)) {
        const auto moved = translate(psi, displacement(spec.schedule, kappa, t_store, t));
        std::tie(fields, medium) = dark_state_from_polariton(moved, spec.schedule, t, params);
        stored = false;
      }
      if (stored) {
        const real ts = t + 0.5 * dt;
        const real d = displacement(spec.schedule, kappa, t_store, ts);
        if (snaps.due(t)) {
          const auto now = translate(psi, displacement(spec.schedule, kappa, t_store, t));
          auto [f, m] = dark_state_from_polariton(now, spec.schedule, t, params);
          snaps.take(result.snapshots, t, f, m, now);
        }
        const real c = std::cos(spec.schedule.theta(ts, kappa)) / pf;
        rec.push(ts, c * interpolate_cubic(psi.plus, grid, z_read - d), c * interpolate_cubic(psi.minus, grid, z_read - d));
      } else {
        if (snaps.due(t))
          snaps.take(result.snapshots, t, fields, medium,
                     polariton_transform(fields, medium, spec.schedule.theta(t, kappa), params));
        const complex p0 = fields.plus.back();
        const complex m0 = fields.minus.back();
        adiabatic_step(fields, medium, spec.schedule, t, dt, params, aopt);
        rec.push(t + 0.5 * dt, 0.5 * (p0 + fields.plus.back()), 0.5 * (m0 + fields.minus.back()));
      }
    }
    if (!applied && !spec.manipulations.empty())
      throw ValidationError("hybrid engine never entered the stored phase before the hold midpoint");
  }

  diag.steps = steps;
  diag.t_end = dt * static_cast<real>(steps);
  diag.norm_drift = norm_mid >= 0.0 && norm0 > 0.0 ? std::abs(norm_mid - norm0) / norm0 : 0.0;
  diag.release_fraction = norm0 > 0.0 ? rec.energy() * pf * pf / norm0 : 0.0;
  diag.adiabaticity = adiabaticity_metric(spec.schedule, kappa, 0.0, diag.t_end);
  if (diag.adiabaticity > spec.adiabaticity_threshold)
    diag.warnings.push_back("non-adiabatic schedule: metric " + std::to_string(diag.adiabaticity) +
                            " exceeds threshold " + std::to_string(spec.adiabaticity_threshold));
  if (!applied && !spec.manipulations.empty()) diag.warnings.push_back("run ended before the hold midpoint");
  const real path = grid.length() - 0.5 * grid.dz();
  diag.peak_delay = spec.input_mode == InputMode::initial_value
                        ? rec.centroid() - (path - spec.envelope.center)
                        : rec.centroid() - spec.envelope.center - path;

  result.output_qubit = extract_qubit(rec, norm0 / (pf * pf));
  result.target_gate = target;
  result.expected_qubit = apply_as_field_map(target, spec.input_qubit);
  result.fidelity_to_target = fidelity(result.expected_qubit, result.output_qubit);
  result.fidelity_to_input = fidelity(spec.input_qubit, result.output_qubit);
  result.fidelity_to_state_picture = fidelity(apply_to_state(target, spec.input_qubit), result.output_qubit);
  return result;
}

/// Nearest unitary (polar factor) of an invertible 2x2 matrix:
/// U ∝ M + e^{i arg det M} adj(M)^dag.
inline Unitary2 nearest_unitary(const Matrix2& m) {
  const complex det = m.det();
  if (std::abs(det) == 0.0) throw ValidationError("matrix is singular");
  const Matrix2 adj = Matrix2::from_entries(m(1, 1), -m(0, 1), -m(1, 0), m(0, 0));
  Matrix2 sum = adj.adjoint();
  sum = std::polar(1.0, std::arg(det)) * sum;
  for (std::size_t k = 0; k < 4; ++k) sum.e[k] += m.e[k];
  const real scale = std::sqrt(std::abs(sum.det()));
  return Unitary2::checked(complex(1.0 / scale) * sum, 1e-9);
}

/// Least-squares M with M x_k ~ y_k over probe pairs (input, output).
inline ReconstructedGate reconstruct_gate(const std::vector<std::pair<PolarizationQubit, PolarizationQubit>>& runs,
                                          real flag_residual = 0.05) {
  if (runs.size() < 2) throw ValidationError("gate reconstruction needs at least two probe runs");
  Matrix2 yx = Matrix2::from_entries(0, 0, 0, 0);
  Matrix2 xx = Matrix2::from_entries(0, 0, 0, 0);
  for (const auto& [in, out] : runs) {
    const auto x = in.amplitudes();
    const auto y = out.amplitudes();
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) {
        yx(r, c) += y[r] * std::conj(x[c]);
        xx(r, c) += x[r] * std::conj(x[c]);
      }
  }
  const complex det = xx.det();
  if (std::abs(det) < 1e-12) throw ValidationError("probe inputs do not span the qubit space");
  const Matrix2 inv = complex(1.0) / det * Matrix2::from_entries(xx(1, 1), -xx(0, 1), -xx(1, 0), xx(0, 0));
  Matrix2 fit = yx * inv;

  real sq = 0.0;
  for (const auto& [in, out] : runs) {
    const auto p = fit * in.amplitudes();
    sq += std::norm(p[0] - out.plus()) + std::norm(p[1] - out.minus());
  }
  ReconstructedGate g;
  g.residual = std::sqrt(sq / static_cast<real>(runs.size()));
  g.flagged = g.residual > flag_residual;
  std::size_t big = 0;
  for (std::size_t k = 1; k < 4; ++k)
    if (std::abs(fit.e[k]) > std::abs(fit.e[big]) + 1e-12) big = k;
  g.matrix = std::polar(1.0, -std::arg(fit.e[big])) * fit;
  g.nearest_unitary = nearest_unitary(g.matrix);
  return g;
}

inline std::vector<PolarizationQubit> probe_inputs() {
  const real s = 1.0 / std::numbers::sqrt2;
  return {make_qubit(1.0, 0.0), make_qubit(0.0, 1.0), make_qubit(s, s), make_qubit(s, I * s)};
}

/// Runs the protocol on the four probe inputs (concurrently) and fits the gate.
inline ReconstructedGate characterize(ProtocolSpec spec) {
  std::vector<std::future<ProtocolResult>> jobs;
  const auto inputs = probe_inputs();
  for (const auto& q : inputs) {
    spec.input_qubit = q;
    spec.snapshot_times.clear();
    jobs.push_back(std::async(std::launch::async, [s = spec] { return run_protocol(s); }));
  }
  std::vector<std::pair<PolarizationQubit, PolarizationQubit>> runs;
  for (std::size_t k = 0; k < jobs.size(); ++k) runs.emplace_back(inputs[k], jobs[k].get().output_qubit);
  return reconstruct_gate(runs);
}

}  // namespace tripod
