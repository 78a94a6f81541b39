#pragma once

// Verbs of the tripodsim front end: run, sweep, gates, presets.

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "tripod/cli/config.hpp"
#include "tripod/cli/presets.hpp"
#include "tripod/report.hpp"

namespace tripod::cli {

enum ExitCode : int { exit_ok = 0, exit_other = 1, exit_parse = 2, exit_validation = 3, exit_runtime = 4 };

namespace detail {

inline std::filesystem::path prepare_output_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec || !fs::is_directory(p)) throw ValidationError("output directory '" + dir + "' cannot be created");
  const fs::path probe = p / ".tripod-write-test";
  {
    std::ofstream f(probe);
    if (!f) throw ValidationError("output directory '" + dir + "' is not writable");
  }
  fs::remove(probe, ec);
  return p;
}

inline std::ofstream open_output(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ValidationError("cannot write '" + p.string() + "'");
  return f;
}

}  // namespace detail

// ---------------------------------------------------------------- run

struct RunFiles {
  std::filesystem::path report;
  std::filesystem::path record;
  std::filesystem::path snapshots;
};

/// Runs one protocol and writes report.txt, result.kv and (if enabled)
/// snapshots.csv into the output directory.
inline ProtocolResult cmd_run(const RunConfig& cfg, RunFiles* files = nullptr) {
  const auto dir = detail::prepare_output_dir(cfg.output.dir);
  ProtocolSpec spec = cfg.spec;
  if (cfg.output.snapshots && spec.snapshot_times.empty())
    spec.snapshot_times = {0.0, spec.hold_midpoint(), spec.schedule.t_on()};
  if (!cfg.output.snapshots) spec.snapshot_times.clear();

  ProtocolResult result = run_protocol(spec);
  if (cfg.output.reconstruct_gate) result.realized_gate = characterize(spec);

  RunFiles out{dir / "report.txt", dir / "result.kv", dir / "snapshots.csv"};
  {
    auto f = detail::open_output(out.report);
    write_report(f, spec, result, cfg.source_text);
  }
  {
    auto f = detail::open_output(out.record);
    write_kv(f, spec, result);
  }
  if (cfg.output.snapshots) {
    auto f = detail::open_output(out.snapshots);
    write_snapshot_header(f);
    for (const auto& s : result.snapshots) write_snapshot_rows(f, s.t, s.fields, s.medium, s.polariton);
  }
  if (files) *files = out;
  return result;
}

// ---------------------------------------------------------------- sweep

inline constexpr std::string_view sweep_schema = "tripod-sweep/1";

struct SweepAxis {
  std::string name;
  real from = 0.0;
  real to = 0.0;
  std::size_t points = 0;
  bool log = false;
};

struct SweepRow {
  real value = 0.0;
  std::string status = "ok";
  real fidelity_to_target = std::numeric_limits<real>::quiet_NaN();
  real fidelity_to_input = std::numeric_limits<real>::quiet_NaN();
  real relative_phase = std::numeric_limits<real>::quiet_NaN();
  real release_fraction = std::numeric_limits<real>::quiet_NaN();
  real norm_drift = std::numeric_limits<real>::quiet_NaN();
  real adiabaticity = std::numeric_limits<real>::quiet_NaN();
  real max_abs_s_bbprime = std::numeric_limits<real>::quiet_NaN();
  real peak_delay = std::numeric_limits<real>::quiet_NaN();
  // ||r_k - r_{k-1}|| / ||r_k|| of the released pulse against the previous point
  real released_l2_change = std::numeric_limits<real>::quiet_NaN();
};

inline std::vector<real> axis_values(const SweepAxis& axis) {
  static constexpr std::string_view known[] = {"beta", "chi", "phi", "ramp_time", "n_z"};
  if (std::find(std::begin(known), std::end(known), axis.name) == std::end(known))
    throw ValidationError("unknown sweep axis '" + axis.name + "' (beta | chi | phi | ramp_time | n_z)");
  if (axis.points == 0) throw ValidationError("sweep axis '" + axis.name + "' is empty (points = 0)");
  if (!std::isfinite(axis.from) || !std::isfinite(axis.to)) throw ValidationError("sweep bounds must be finite");
  if (axis.log && !(axis.from > 0.0 && axis.to > 0.0))
    throw ValidationError("logarithmic sweep needs positive bounds");
  std::vector<real> v(axis.points);
  for (std::size_t k = 0; k < axis.points; ++k) {
    const real f = axis.points == 1 ? 0.0 : static_cast<real>(k) / static_cast<real>(axis.points - 1);
    v[k] = axis.log ? axis.from * std::pow(axis.to / axis.from, f) : axis.from + (axis.to - axis.from) * f;
    if (axis.name == "n_z") v[k] = std::round(v[k]);
  }
  return v;
}

/// Copy of `spec` with one axis set to `value`. beta / chi act on every Raman
/// pulse, phi on every Zeeman pulse (each must exist).
inline ProtocolSpec apply_axis(ProtocolSpec spec, std::string_view axis, real value) {
  if (axis == "beta" || axis == "chi") {
    bool any = false;
    for (auto& m : spec.manipulations)
      if (auto* g = std::get_if<GatePulse>(&m)) {
        m = axis == "beta" ? GatePulse::from_area(g->chi(), value, g->tau()) : GatePulse::from_area(value, g->beta(), g->tau());
        any = true;
      }
    if (!any) throw ValidationError("sweep axis '" + std::string(axis) + "' needs a raman manipulation in the config");
  } else if (axis == "phi") {
    bool any = false;
    for (auto& m : spec.manipulations)
      if (auto* z = std::get_if<ZeemanPulse>(&m)) {
        m = ZeemanPulse::from_area(value, z->tau());
        any = true;
      }
    if (!any) throw ValidationError("sweep axis 'phi' needs a zeeman manipulation in the config");
  } else if (axis == "ramp_time") {
    const auto& s = spec.schedule;
    spec.schedule = ControlSchedule::store_release(s.omega_c0(), s.t_off(), s.t_on(), value);
  } else if (axis == "n_z") {
    const long long n = std::llround(value);
    if (n < 16) throw ValidationError("sweep point n_z = " + std::to_string(n) + " is below 16");
    if (spec.dt > 0.0) spec.dt *= static_cast<real>(spec.medium.n_z) / static_cast<real>(n);
    spec.medium.n_z = static_cast<std::size_t>(n);
  } else {
    throw ValidationError("unknown sweep axis '" + std::string(axis) + "'");
  }
  return spec;
}

namespace detail {

// Record value at time t by 4-point Lagrange interpolation on its uniform samples.
inline std::array<complex, 2> sample_record(const OutputRecord& r, real t) {
  const std::size_t n = r.size();
  if (n < 4) return {complex{}, complex{}};
  const real h = r.dt();
  const real pos = (t - r.t.front()) / h;
  if (pos < -1.0 || pos > static_cast<real>(n)) return {complex{}, complex{}};
  const long long i = std::clamp<long long>(static_cast<long long>(std::floor(pos)), 1, static_cast<long long>(n) - 3);
  const real f = pos - static_cast<real>(i);
  const real w[4] = {-f * (f - 1.0) * (f - 2.0) / 6.0, (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0,
                     -(f + 1.0) * f * (f - 2.0) / 2.0, (f + 1.0) * f * (f - 1.0) / 6.0};
  std::array<complex, 2> out{};
  for (int k = 0; k < 4; ++k) {
    const auto j = static_cast<std::size_t>(i - 1 + k);
    out[0] += w[k] * r.plus[j];
    out[1] += w[k] * r.minus[j];
  }
  return out;
}

// Relative L2 distance of `a` from `b`, evaluated on b's sample times.
inline real record_distance(const OutputRecord& a, const OutputRecord& b) {
  real num = 0.0;
  real den = 0.0;
  for (std::size_t k = 0; k < b.size(); ++k) {
    const auto v = sample_record(a, b.t[k]);
    num += std::norm(v[0] - b.plus[k]) + std::norm(v[1] - b.minus[k]);
    den += std::norm(b.plus[k]) + std::norm(b.minus[k]);
  }
  return den > 0.0 ? std::sqrt(num / den) : std::numeric_limits<real>::quiet_NaN();
}

inline std::string status_of(const std::exception& e) {
  if (dynamic_cast<const ReleaseError*>(&e)) return "release_failed";
  if (dynamic_cast<const DivergenceError*>(&e)) return "diverged";
  if (dynamic_cast<const ValidationError*>(&e)) return "invalid";
  return "error";
}

}  // namespace detail

/// One protocol per axis value, run concurrently (at most `threads` at a
/// time, 0 = hardware concurrency); rows come back in axis order. Failing
/// points keep a status string and NaN metrics.
inline std::vector<SweepRow> run_sweep(const ProtocolSpec& base, const SweepAxis& axis, unsigned threads = 0) {
  const auto values = axis_values(axis);
  const unsigned width = threads > 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
  std::vector<SweepRow> rows(values.size());
  std::vector<std::optional<OutputRecord>> records(values.size());

  for (std::size_t start = 0; start < values.size(); start += width) {
    const std::size_t stop = std::min(values.size(), start + width);
    std::vector<std::future<void>> jobs;
    for (std::size_t k = start; k < stop; ++k) {
      jobs.push_back(std::async(std::launch::async, [&, k] {
        SweepRow& row = rows[k];
        row.value = values[k];
        try {
          ProtocolSpec spec = apply_axis(base, axis.name, values[k]);
          spec.snapshot_times.clear();
          validate(spec);
          const ProtocolResult r = run_protocol(spec);
          row.fidelity_to_target = r.fidelity_to_target;
          row.fidelity_to_input = r.fidelity_to_input;
          row.relative_phase = relative_phase(r.output_qubit);
          row.release_fraction = r.diagnostics.release_fraction;
          row.norm_drift = r.diagnostics.norm_drift;
          row.adiabaticity = r.diagnostics.adiabaticity;
          row.max_abs_s_bbprime = r.diagnostics.max_abs_s_bbprime;
          row.peak_delay = r.diagnostics.peak_delay;
          records[k] = r.record;
        } catch (const Error& e) {
          row.status = detail::status_of(e);
        }
      }));
    }
    for (auto& j : jobs) j.get();
  }
  for (std::size_t k = 1; k < rows.size(); ++k)
    if (records[k] && records[k - 1]) {
      // evaluate on the coarser of the two records
      const bool prev_coarser = records[k - 1]->dt() >= records[k]->dt();
      rows[k].released_l2_change = prev_coarser ? detail::record_distance(*records[k], *records[k - 1])
                                                : detail::record_distance(*records[k - 1], *records[k]);
    }
  return rows;
}

inline void write_sweep_csv(std::ostream& os, const SweepAxis& axis, Engine engine, const std::vector<SweepRow>& rows) {
  os << "# schema: " << sweep_schema << " axis=" << axis.name << " engine=" << to_string(engine) << '\n'
     << "index," << axis.name
     << ",status,fidelity_to_target,fidelity_to_input,relative_phase,release_fraction,norm_drift,adiabaticity,"
        "max_abs_s_bbprime,peak_delay,released_l2_change\n";
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    os << k << ',' << format_real(r.value) << ',' << r.status << ',' << format_real(r.fidelity_to_target) << ','
       << format_real(r.fidelity_to_input) << ',' << format_real(r.relative_phase) << ','
       << format_real(r.release_fraction) << ',' << format_real(r.norm_drift) << ',' << format_real(r.adiabaticity)
       << ',' << format_real(r.max_abs_s_bbprime) << ',' << format_real(r.peak_delay) << ','
       << format_real(r.released_l2_change) << '\n';
  }
}

inline std::vector<SweepRow> cmd_sweep(const RunConfig& cfg, const SweepAxis& axis, unsigned threads = 0,
                                       std::filesystem::path* written = nullptr) {
  axis_values(axis);  // reject bad axes before touching the filesystem
  const auto dir = detail::prepare_output_dir(cfg.output.dir);
  auto rows = run_sweep(cfg.spec, axis, threads);
  const auto path = dir / "sweep.csv";
  auto f = detail::open_output(path);
  write_sweep_csv(f, axis, cfg.spec.engine, rows);
  if (written) *written = path;
  return rows;
}

// ---------------------------------------------------------------- gates

namespace detail {

inline std::string normalize_name(std::string_view s) {
  std::string out;
  for (char c : s)
    if (c != '-' && c != '_' && c != ' ') out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

// "0.5", "pi", "-pi/2", "3pi/4", "3*pi/4"
inline real parse_angle(std::string_view text) {
  std::string s;
  for (char c : text)
    if (c != ' ') s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (s.empty()) throw ValidationError("empty angle");
  const auto p = s.find("pi");
  auto to_real = [&](const std::string& t) {
    std::size_t used = 0;
    real v = 0.0;
    try {
      v = std::stod(t, &used);
    } catch (const std::exception&) {
      throw ValidationError("cannot parse angle '" + std::string(text) + "'");
    }
    if (used != t.size()) throw ValidationError("cannot parse angle '" + std::string(text) + "'");
    return v;
  };
  if (p == std::string::npos) return to_real(s);
  std::string coef = s.substr(0, p);
  if (!coef.empty() && coef.back() == '*') coef.pop_back();
  real value = pi;
  if (coef == "-") {
    value = -pi;
  } else if (!coef.empty() && coef != "+") {
    value = to_real(coef) * pi;
  }
  const std::string rest = s.substr(p + 2);
  if (!rest.empty()) {
    if (rest.front() != '/') throw ValidationError("cannot parse angle '" + std::string(text) + "'");
    value /= to_real(rest.substr(1));
  }
  return value;
}

// "-pi/2" style rendering when x is a multiple of pi/8, else %.17g.
inline std::string angle_text(real x) {
  const real q = x / (pi / 8.0);
  const long long k = std::llround(q);
  if (std::abs(q - static_cast<real>(k)) > 1e-9) return format_real(x);
  if (k == 0) return "0";
  long long num = k;
  long long den = 8;
  while (num % 2 == 0 && den > 1) {
    num /= 2;
    den /= 2;
  }
  std::string s = num == 1 ? "pi" : num == -1 ? "-pi" : std::to_string(num) + "pi";
  if (den > 1) s += "/" + std::to_string(den);
  return s;
}

}  // namespace detail

/// Target unitary for a gate name: NOT, sqrtNOT, Htilde, hadamard, sigma_y,
/// identity, phase:<angle>. Names are case-insensitive; '-' and '_' are ignored
/// outside the angle.
inline Unitary2 named_gate(std::string_view name) {
  const std::string n = detail::normalize_name(name);
  const real h = 0.5;
  if (n == "not" || n == "x" || n == "sigmax") return Unitary2::checked(Matrix2::from_entries(0, 1, 1, 0));
  if (n == "sqrtnot")
    return Unitary2::checked(Matrix2::from_entries(complex(h, h), complex(h, -h), complex(h, -h), complex(h, h)));
  if (n == "htilde") return h_tilde();
  if (n == "hadamard" || n == "h") return hadamard();
  if (n == "sigmay" || n == "y") return Unitary2::checked(Matrix2::from_entries(0, -I, I, 0));
  if (n == "identity" || n == "id") return Unitary2{};
  if (n.rfind("phase:", 0) == 0) return rotation_z(detail::parse_angle(name.substr(name.find(':') + 1)));
  throw ValidationError("unknown gate '" + std::string(name) +
                        "' (NOT | sqrtNOT | Htilde | hadamard | sigma_y | identity | phase:<angle>)");
}

/// Parses [[a, b], [c, d]] with entries as numbers or [re, im].
inline Matrix2 parse_matrix(std::string_view text) {
  using json = nlohmann::json;
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("matrix is not valid JSON: ") + e.what(), "matrix", 1);
  }
  auto entry = [](const json& v) -> complex {
    if (v.is_number()) return v.get<real>();
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) return {v[0].get<real>(), v[1].get<real>()};
    throw ParseError("matrix entries must be numbers or [re, im]", "matrix", 1);
  };
  if (!doc.is_array() || doc.size() != 2 || !doc[0].is_array() || doc[0].size() != 2 || !doc[1].is_array() ||
      doc[1].size() != 2)
    throw ParseError("matrix must be [[a, b], [c, d]]", "matrix", 1);
  return Matrix2::from_entries(entry(doc[0][0]), entry(doc[0][1]), entry(doc[1][0]), entry(doc[1][1]));
}

/// Prints the pulse schedule that realizes `target`, the realized matrix and
/// its global phase and distance to the target.
inline PulsePlan cmd_gates(const std::string& label, const Unitary2& target, std::ostream& os) {
  const PulsePlan plan = plan_pulses(target);
  const EulerZYZ e = synthesize(target);
  os << "target        " << label << '\n'
     << "matrix        " << tripod::detail::matrix_text(target.matrix()) << '\n'
     << "euler z-y-z   phi1=" << detail::angle_text(e.phi1) << " beta=" << detail::angle_text(e.beta)
     << " phi2=" << detail::angle_text(e.phi2) << " alpha=" << detail::angle_text(e.alpha) << '\n'
     << "schedule      " << plan.pulses.size() << " pulse(s), applied in order during storage\n";
  std::size_t k = 0;
  for (const auto& m : plan.pulses) {
    os << "  " << ++k << ". ";
    if (const auto* g = std::get_if<GatePulse>(&m)) {
      os << "raman   chi=" << detail::angle_text(g->chi()) << " beta=" << detail::angle_text(g->beta()) << '\n';
    } else {
      os << "zeeman  phi=" << detail::angle_text(zeeman_area(std::get<ZeemanPulse>(m))) << '\n';
    }
  }
  os << "realized      " << tripod::detail::matrix_text(plan.realized.matrix()) << '\n'
     << "global phase  realized = e^{i(" << detail::angle_text(-plan.global_phase) << ")} x target\n"
     << "distance      " << format_real(plan.distance) << " (entrywise, up to global phase)\n";
  return plan;
}

}  // namespace tripod::cli
