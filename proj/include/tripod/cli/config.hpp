#pragma once

// Run configuration: a single JSON document with nested sections.
//
//   schema         "tripod-config/1"
//   units          {"system": "sim"} or {"system": "si", "length_m": L}
//   seed           integer, used when input.qubit is "random"
//   medium         kappa, length, n_z, atom_count
//   input          qubit, mode ("initial" | "boundary"), envelope {center, width}
//   schedule       store_release: omega_c0, t_off, t_on, ramp_time
//   manipulations  list of {"type": "raman" | "zeeman", ...}
//   engine         "full" | "polariton" | "hybrid"
//   numerics       dt, t_end, substeps, adiabaticity_threshold,
//                  hybrid_switch_fraction, snapshot_times
//   output         dir, snapshots, reconstruct_gate
//
// With "si" units, rates are in 1/s, times in s, lengths in m and magnetic
// fields in T; everything is converted to simulation units on ingestion.

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "tripod/protocol.hpp"

namespace tripod::cli {

inline constexpr std::string_view config_schema = "tripod-config/1";

struct OutputOptions {
  std::string dir = "out";
  bool snapshots = true;
  bool reconstruct_gate = false;
};

struct RunConfig {
  ProtocolSpec spec;
  OutputOptions output;
  std::uint64_t seed = 0;
  bool random_input = false;
  std::string source_text;  // echoed into the report
};

/// Haar-random qubit from a seeded generator.
inline PolarizationQubit random_qubit(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<real> n(0.0, 1.0);
  const real a = n(rng);
  const real b = n(rng);
  const real c = n(rng);
  const real d = n(rng);
  return make_qubit(complex(a, b), complex(c, d));
}

namespace detail {

using json = nlohmann::json;

enum class Dim { none, rate, time, length, field };

class Reader {
 public:
  Reader(std::string_view text, std::optional<SiScale> si) : text_(text), si_(si) {}

  // 1-based line of the first occurrence of "key" in the source, 0 if absent.
  int line_of(std::string_view key) const {
    const std::string quoted = "\"" + std::string(key) + "\"";
    const auto pos = text_.find(quoted);
    if (pos == std::string_view::npos) return 0;
    return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
  }

  [[noreturn]] void fail(const std::string& path, std::string_view key, const std::string& what) const {
    const int line = line_of(key);
    std::string msg = "config field '" + path + "': " + what;
    if (line > 0) msg += " (line " + std::to_string(line) + ")";
    throw ParseError(msg, path, line);
  }

  const json& section(const json& obj, const std::string& path, std::string_view key) const {
    if (!obj.contains(key)) fail(path, key, "missing required field");
    const json& v = obj.at(std::string(key));
    if (!v.is_object()) fail(path, key, "expected an object");
    return v;
  }

  void only(const json& obj, const std::string& path, std::initializer_list<std::string_view> keys) const {
    for (const auto& [k, v] : obj.items()) {
      bool ok = false;
      for (auto allowed : keys) ok = ok || k == allowed;
      if (!ok) fail(join(path, k), k, "unknown field");
    }
  }

  real number(const json& obj, const std::string& path, std::string_view key, Dim dim) const {
    const std::string p = join(path, key);
    if (!obj.contains(key)) fail(p, key, "missing required field");
    const json& v = obj.at(std::string(key));
    if (!v.is_number()) fail(p, key, "expected a number");
    const real x = v.get<real>();
    if (!std::isfinite(x)) fail(p, key, "must be finite");
    return convert(x, dim);
  }

  real number_or(const json& obj, const std::string& path, std::string_view key, Dim dim, real fallback) const {
    return obj.contains(key) ? number(obj, path, key, dim) : fallback;
  }

  complex amplitude(const json& obj, const std::string& path, std::string_view key) const {
    const std::string p = join(path, key);
    if (!obj.contains(key)) fail(p, key, "missing required field");
    const json& v = obj.at(std::string(key));
    if (v.is_number()) return v.get<real>();
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
      return {v[0].get<real>(), v[1].get<real>()};
    fail(p, key, "expected a number or [re, im]");
  }

  std::string string(const json& obj, const std::string& path, std::string_view key) const {
    const std::string p = join(path, key);
    if (!obj.contains(key)) fail(p, key, "missing required field");
    const json& v = obj.at(std::string(key));
    if (!v.is_string()) fail(p, key, "expected a string");
    return v.get<std::string>();
  }

  bool boolean_or(const json& obj, const std::string& path, std::string_view key, bool fallback) const {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(std::string(key));
    if (!v.is_boolean()) fail(join(path, key), key, "expected true or false");
    return v.get<bool>();
  }

  real convert(real x, Dim dim) const {
    if (!si_) return x;
    switch (dim) {
      case Dim::rate:
        return si_->rate(x);
      case Dim::time:
        return si_->time(x);
      case Dim::length:
        return si_->length(x);
      case Dim::field:
      case Dim::none:
        return x;
    }
    return x;
  }

  bool si() const { return si_.has_value(); }
  const std::optional<SiScale>& scale() const { return si_; }

  static std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
  }

 private:
  std::string_view text_;
  std::optional<SiScale> si_;
};

inline Manipulation parse_manipulation(const Reader& r, const json& m, const std::string& path) {
  if (!m.is_object()) r.fail(path, "manipulations", "expected an object");
  const std::string type = r.string(m, path, "type");
  if (type == "raman") {
    r.only(m, path, {"type", "chi", "beta", "omega_w", "tau", "u_plus", "u_minus", "detuning"});
    const real tau = r.number_or(m, path, "tau", Dim::time, 0.01);
    if (m.contains("u_plus") || m.contains("u_minus") || m.contains("detuning")) {
      RamanCouplingSpec c;
      c.u_plus = r.amplitude(m, path, "u_plus") * r.convert(1.0, Dim::rate);
      c.u_minus = r.amplitude(m, path, "u_minus") * r.convert(1.0, Dim::rate);
      c.detuning = r.number(m, path, "detuning", Dim::rate);
      const auto w = effective_coupling(c);
      return GatePulse::constant(w.chi, w.magnitude, tau);
    }
    const real chi = r.number(m, path, "chi", Dim::none);
    if (m.contains("beta")) return GatePulse::from_area(chi, r.number(m, path, "beta", Dim::none), tau);
    if (m.contains("omega_w")) return GatePulse::constant(chi, r.number(m, path, "omega_w", Dim::rate), tau);
    r.fail(Reader::join(path, "beta"), "beta", "raman pulse needs beta, omega_w or u_plus/u_minus/detuning");
  }
  if (type == "zeeman") {
    r.only(m, path, {"type", "phi", "g_factor", "rate_per_field", "b_field", "tau"});
    const real tau = r.number_or(m, path, "tau", Dim::time, 0.01);
    if (m.contains("phi")) return ZeemanPulse::from_area(r.number(m, path, "phi", Dim::none), tau);
    const real g = r.number(m, path, "g_factor", Dim::none);
    const real rate_default = r.si() ? r.scale()->zeeman_rate_per_tesla() : 1.0;
    const real rate = m.contains("rate_per_field") ? r.number(m, path, "rate_per_field", Dim::rate) : rate_default;
    return ZeemanPulse::constant(g, rate, r.number(m, path, "b_field", Dim::field), tau);
  }
  r.fail(Reader::join(path, "type"), "type", "unknown manipulation type '" + type + "' (raman | zeeman)");
}

inline Engine parse_engine(const std::string& name, const Reader& r) {
  if (name == "full") return Engine::full;
  if (name == "polariton") return Engine::polariton;
  if (name == "hybrid") return Engine::hybrid;
  r.fail("engine", "engine", "unknown engine '" + name + "' (full | polariton | hybrid)");
}

}  // namespace detail

inline Engine parse_engine(std::string_view name) {
  if (name == "full") return Engine::full;
  if (name == "polariton") return Engine::polariton;
  if (name == "hybrid") return Engine::hybrid;
  throw ValidationError("unknown engine '" + std::string(name) + "' (full | polariton | hybrid)");
}

/// Parses and validates a config document. Throws ParseError (with field
/// name and line) for malformed input and ValidationError for documents that
/// parse but describe an invalid run.
inline RunConfig parse_config(std::string_view text, std::optional<std::uint64_t> seed_override = std::nullopt) {
  using detail::Dim;
  using json = nlohmann::json;
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n'));
    throw ParseError("config is not valid JSON (line " + std::to_string(line) + "): " + e.what(), "", line);
  }
  if (!doc.is_object()) throw ParseError("config must be a JSON object", "", 1);

  std::optional<SiScale> si;
  if (doc.contains("units")) {
    const detail::Reader pre(text, std::nullopt);
    const json& u = pre.section(doc, "units", "units");
    pre.only(u, "units", {"system", "length_m"});
    const std::string sys = pre.string(u, "units", "system");
    if (sys == "si") {
      SiScale s;
      s.length_m = pre.number(u, "units", "length_m", Dim::none);
      if (!(s.length_m > 0.0)) pre.fail("units.length_m", "length_m", "must be positive");
      si = s;
    } else if (sys != "sim") {
      pre.fail("units.system", "system", "unknown unit system '" + sys + "' (sim | si)");
    }
  }
  const detail::Reader r(text, si);
  r.only(doc, "", {"schema", "units", "seed", "medium", "input", "schedule", "manipulations", "engine", "numerics",
                   "output"});
  if (doc.contains("schema") && r.string(doc, "", "schema") != config_schema)
    r.fail("schema", "schema", "unsupported schema (expected " + std::string(config_schema) + ")");

  RunConfig cfg;
  cfg.source_text = std::string(text);
  ProtocolSpec& spec = cfg.spec;

  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) r.fail("seed", "seed", "expected a non-negative integer");
    cfg.seed = doc["seed"].get<std::uint64_t>();
  }
  if (seed_override) cfg.seed = *seed_override;

  if (doc.contains("medium")) {
    const json& m = r.section(doc, "medium", "medium");
    r.only(m, "medium", {"kappa", "length", "n_z", "atom_count"});
    spec.medium.kappa = r.number_or(m, "medium", "kappa", Dim::rate, spec.medium.kappa);
    spec.medium.length = r.number_or(m, "medium", "length", Dim::length, spec.medium.length);
    spec.medium.atom_count = r.number_or(m, "medium", "atom_count", Dim::none, spec.medium.atom_count);
    if (m.contains("n_z")) {
      if (!m["n_z"].is_number_unsigned()) r.fail("medium.n_z", "n_z", "expected a positive integer");
      spec.medium.n_z = m["n_z"].get<std::size_t>();
    }
  }

  {
    const json& in = r.section(doc, "input", "input");
    r.only(in, "input", {"qubit", "mode", "envelope"});
    if (!in.contains("qubit")) r.fail("input.qubit", "qubit", "missing required field");
    const json& q = in["qubit"];
    if (q.is_string()) {
      if (q.get<std::string>() != "random") r.fail("input.qubit", "qubit", "expected \"random\" or an object");
      cfg.random_input = true;
      spec.input_qubit = random_qubit(cfg.seed);
    } else if (q.is_object()) {
      r.only(q, "input.qubit", {"c_plus", "c_minus", "a_x", "a_y", "vartheta", "varphi"});
      try {
        if (q.contains("c_plus") || q.contains("c_minus")) {
          spec.input_qubit = make_qubit(r.amplitude(q, "input.qubit", "c_plus"), r.amplitude(q, "input.qubit", "c_minus"));
        } else if (q.contains("a_x") || q.contains("a_y")) {
          spec.input_qubit = from_linear(r.amplitude(q, "input.qubit", "a_x"), r.amplitude(q, "input.qubit", "a_y"));
        } else {
          spec.input_qubit = from_polarization_angles(r.number(q, "input.qubit", "vartheta", Dim::none),
                                                      r.number(q, "input.qubit", "varphi", Dim::none));
        }
      } catch (const ValidationError& e) {
        r.fail("input.qubit", "qubit", e.what());
      }
    } else {
      r.fail("input.qubit", "qubit", "expected \"random\" or an object");
    }
    if (in.contains("mode")) {
      const std::string mode = r.string(in, "input", "mode");
      if (mode == "initial") {
        spec.input_mode = InputMode::initial_value;
      } else if (mode == "boundary") {
        spec.input_mode = InputMode::boundary;
      } else {
        r.fail("input.mode", "mode", "unknown input mode '" + mode + "' (initial | boundary)");
      }
    }
    if (in.contains("envelope")) {
      const json& e = r.section(in, "input.envelope", "envelope");
      r.only(e, "input.envelope", {"center", "width"});
      const Dim d = spec.input_mode == InputMode::boundary ? Dim::time : Dim::length;
      spec.envelope.center = r.number_or(e, "input.envelope", "center", d, spec.envelope.center);
      spec.envelope.width = r.number_or(e, "input.envelope", "width", d, spec.envelope.width);
    }
  }

  {
    const json& s = r.section(doc, "schedule", "schedule");
    r.only(s, "schedule", {"type", "omega_c0", "t_off", "t_on", "ramp_time"});
    const std::string type = s.contains("type") ? r.string(s, "schedule", "type") : "store_release";
    if (type != "store_release")
      r.fail("schedule.type", "type", "protocol runs need a store_release schedule, got '" + type + "'");
    const real kappa = spec.medium.kappa;
    const real omega0 = r.number_or(s, "schedule", "omega_c0", Dim::rate, kappa / std::numbers::sqrt2);
    const real t_off = r.number(s, "schedule", "t_off", Dim::time);
    const real t_on = r.number(s, "schedule", "t_on", Dim::time);
    const real ramp = r.number_or(s, "schedule", "ramp_time", Dim::time, 50.0 / kappa);
    spec.schedule = ControlSchedule::store_release(omega0, t_off, t_on, ramp);
  }

  if (doc.contains("manipulations")) {
    const json& list = doc["manipulations"];
    if (!list.is_array()) r.fail("manipulations", "manipulations", "expected a list");
    for (std::size_t k = 0; k < list.size(); ++k) {
      const std::string path = "manipulations[" + std::to_string(k) + "]";
      try {
        spec.manipulations.push_back(detail::parse_manipulation(r, list[k], path));
      } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
      }
    }
  }

  if (doc.contains("engine")) spec.engine = detail::parse_engine(r.string(doc, "", "engine"), r);

  if (doc.contains("numerics")) {
    const json& n = r.section(doc, "numerics", "numerics");
    r.only(n, "numerics",
           {"dt", "t_end", "substeps", "adiabaticity_threshold", "hybrid_switch_fraction", "snapshot_times"});
    spec.dt = r.number_or(n, "numerics", "dt", Dim::time, 0.0);
    spec.t_end = r.number_or(n, "numerics", "t_end", Dim::time, 0.0);
    spec.adiabaticity_threshold =
        r.number_or(n, "numerics", "adiabaticity_threshold", Dim::none, spec.adiabaticity_threshold);
    spec.hybrid_switch_fraction =
        r.number_or(n, "numerics", "hybrid_switch_fraction", Dim::none, spec.hybrid_switch_fraction);
    if (n.contains("substeps")) {
      if (!n["substeps"].is_number_integer()) r.fail("numerics.substeps", "substeps", "expected an integer");
      spec.substeps = n["substeps"].get<int>();
    }
    if (n.contains("snapshot_times")) {
      const json& ts = n["snapshot_times"];
      if (!ts.is_array()) r.fail("numerics.snapshot_times", "snapshot_times", "expected a list of numbers");
      for (const auto& t : ts) {
        if (!t.is_number()) r.fail("numerics.snapshot_times", "snapshot_times", "expected a list of numbers");
        spec.snapshot_times.push_back(r.convert(t.get<real>(), Dim::time));
      }
    }
  }

  if (doc.contains("output")) {
    const json& o = r.section(doc, "output", "output");
    r.only(o, "output", {"dir", "snapshots", "reconstruct_gate"});
    if (o.contains("dir")) cfg.output.dir = r.string(o, "output", "dir");
    cfg.output.snapshots = r.boolean_or(o, "output", "snapshots", cfg.output.snapshots);
    cfg.output.reconstruct_gate = r.boolean_or(o, "output", "reconstruct_gate", cfg.output.reconstruct_gate);
  }

  validate(spec);
  return cfg;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline RunConfig load_config(const std::string& path, std::optional<std::uint64_t> seed_override = std::nullopt) {
  return parse_config(read_file(path), seed_override);
}

}  // namespace tripod::cli
