#pragma once

// Human-readable report and key=value record for a protocol result.
// Numbers in the record use %.17g so identical runs give identical bytes.

#include <cstdio>
#include <ostream>
#include <string>
#include <string_view>

#include "tripod/protocol.hpp"

namespace tripod {

inline constexpr std::string_view result_schema = "tripod-protocol-result/1";

inline std::string format_real(real v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

class KvWriter {
 public:
  explicit KvWriter(std::ostream& os) : os_(os) {}

  void put(std::string_view key, std::string_view value) { os_ << key << '=' << value << '\n'; }
  void put(std::string_view key, real v) { put(key, format_real(v)); }
  void put(std::string_view key, std::size_t v) { put(key, std::to_string(v)); }
  void put(std::string_view key, complex v) {
    put(std::string(key) + ".re", v.real());
    put(std::string(key) + ".im", v.imag());
  }
  void qubit(std::string_view key, const PolarizationQubit& q) {
    put(std::string(key) + ".c_plus", q.plus());
    put(std::string(key) + ".c_minus", q.minus());
  }
  void matrix(std::string_view key, const Matrix2& m) {
    static constexpr const char* names[] = {"g11", "g12", "g21", "g22"};
    for (std::size_t k = 0; k < 4; ++k) put(std::string(key) + "." + names[k], m.e[k]);
  }

 private:
  std::ostream& os_;
};

inline std::string describe(const Manipulation& m) {
  if (const auto* g = std::get_if<GatePulse>(&m))
    return "raman chi=" + format_real(g->chi()) + " beta=" + format_real(g->beta()) + " tau=" + format_real(g->tau());
  const auto& z = std::get<ZeemanPulse>(m);
  return "zeeman phi=" + format_real(zeeman_area(z)) + " tau=" + format_real(z.tau());
}

inline std::string qubit_text(const PolarizationQubit& q) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "(%+.6f%+.6fi, %+.6f%+.6fi)", q.plus().real(), q.plus().imag(), q.minus().real(),
                q.minus().imag());
  return buf;
}

inline std::string matrix_text(const Matrix2& m) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "[[%+.6f%+.6fi, %+.6f%+.6fi], [%+.6f%+.6fi, %+.6f%+.6fi]]", m.e[0].real(),
                m.e[0].imag(), m.e[1].real(), m.e[1].imag(), m.e[2].real(), m.e[2].imag(), m.e[3].real(),
                m.e[3].imag());
  return buf;
}

}  // namespace detail

/// Machine-readable record. Field names:
///   schema, engine, input.*, output.*, expected.* (c_plus/c_minus .re/.im),
///   target.g11..g22 (.re/.im), fidelity_to_target, fidelity_to_input,
///   fidelity_to_state_picture, output.relative_phase, diag.*, warnings,
///   warning.N, realized.* when a gate was reconstructed.
inline void write_kv(std::ostream& os, const ProtocolSpec& spec, const ProtocolResult& r) {
  detail::KvWriter kv(os);
  kv.put("schema", result_schema);
  kv.put("engine", to_string(spec.engine));
  kv.qubit("input", spec.input_qubit);
  kv.qubit("output", r.output_qubit);
  kv.qubit("expected", r.expected_qubit);
  kv.matrix("target", r.target_gate.matrix());
  kv.put("fidelity_to_target", r.fidelity_to_target);
  kv.put("fidelity_to_input", r.fidelity_to_input);
  kv.put("fidelity_to_state_picture", r.fidelity_to_state_picture);
  kv.put("output.relative_phase", relative_phase(r.output_qubit));
  const auto& d = r.diagnostics;
  kv.put("diag.max_abs_s_bbprime", d.max_abs_s_bbprime);
  kv.put("diag.population_b", d.population_b);
  kv.put("diag.population_bprime", d.population_bprime);
  kv.put("diag.norm_drift", d.norm_drift);
  kv.put("diag.release_fraction", d.release_fraction);
  kv.put("diag.adiabaticity", d.adiabaticity);
  kv.put("diag.peak_delay", d.peak_delay);
  kv.put("diag.t_end", d.t_end);
  kv.put("diag.steps", d.steps);
  kv.put("warnings", d.warnings.size());
  for (std::size_t k = 0; k < d.warnings.size(); ++k) kv.put("warning." + std::to_string(k), d.warnings[k]);
  if (r.realized_gate) {
    kv.matrix("realized", r.realized_gate->matrix);
    kv.matrix("realized.unitary", r.realized_gate->nearest_unitary.matrix());
    kv.put("realized.residual", r.realized_gate->residual);
    kv.put("realized.flagged", r.realized_gate->flagged ? "true" : "false");
    kv.put("realized.distance_to_target",
           distance_up_to_phase(r.realized_gate->nearest_unitary.matrix(), r.target_gate.matrix()));
  }
}

/// Plain-text summary; `config_text` is echoed verbatim at the end.
inline void write_report(std::ostream& os, const ProtocolSpec& spec, const ProtocolResult& r,
                         std::string_view config_text = {}) {
  const auto& d = r.diagnostics;
  os << "tripod protocol report\n"
     << "======================\n\n"
     << "engine              " << to_string(spec.engine) << '\n'
     << "kappa               " << format_real(spec.medium.kappa) << '\n'
     << "grid                n_z=" << spec.medium.n_z << " L=" << format_real(spec.medium.length) << '\n'
     << "schedule            Omega_c0=" << format_real(spec.schedule.omega_c0())
     << " t_off=" << format_real(spec.schedule.t_off()) << " t_on=" << format_real(spec.schedule.t_on())
     << " T_r=" << format_real(spec.schedule.ramp_time()) << '\n';
  os << "manipulations       " << spec.manipulations.size() << '\n';
  for (const auto& m : spec.manipulations) os << "  - " << detail::describe(m) << '\n';
  os << '\n'
     << "input qubit         " << detail::qubit_text(spec.input_qubit) << '\n'
     << "output qubit        " << detail::qubit_text(r.output_qubit) << '\n'
     << "expected qubit      " << detail::qubit_text(r.expected_qubit) << '\n'
     << "target gate         " << detail::matrix_text(r.target_gate.matrix()) << '\n'
     << "fidelity to target  " << format_real(r.fidelity_to_target) << '\n'
     << "fidelity to input   " << format_real(r.fidelity_to_input) << '\n'
     << "relative phase out  " << format_real(relative_phase(r.output_qubit)) << '\n';
  if (r.realized_gate) {
    os << "realized gate       " << detail::matrix_text(r.realized_gate->matrix) << '\n'
       << "  residual          " << format_real(r.realized_gate->residual)
       << (r.realized_gate->flagged ? "  (FLAGGED: inconsistent probe runs)" : "") << '\n'
       << "  distance          "
       << format_real(distance_up_to_phase(r.realized_gate->nearest_unitary.matrix(), r.target_gate.matrix()))
       << " (to target, up to global phase)\n";
  }
  os << "\ndiagnostics\n"
     << "  max |s_bb'|       " << format_real(d.max_abs_s_bbprime) << '\n'
     << "  populations       p_b=" << format_real(d.population_b) << " p_b'=" << format_real(d.population_bprime) << '\n'
     << "  norm drift        " << format_real(d.norm_drift) << '\n'
     << "  release fraction  " << format_real(d.release_fraction) << '\n'
     << "  adiabaticity      " << format_real(d.adiabaticity) << " (threshold "
     << format_real(spec.adiabaticity_threshold) << ")\n"
     << "  peak delay        " << format_real(d.peak_delay) << '\n'
     << "  t_end / steps     " << format_real(d.t_end) << " / " << d.steps << '\n';
  for (const auto& w : d.warnings) os << "  WARNING: " << w << '\n';
  if (!config_text.empty()) {
    os << "\nconfig\n------\n" << config_text;
    if (config_text.back() != '\n') os << '\n';
  }
}

}  // namespace tripod
