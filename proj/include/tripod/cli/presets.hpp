#pragma once

// Built-in experiment configs. `tripodsim presets write DIR` exports them;
// the copies under configs/ are generated that way.

#include <string>
#include <string_view>
#include <vector>

#include "tripod/errors.hpp"

namespace tripod::cli {

struct Preset {
  std::string_view name;
  std::string_view description;
  std::string_view config;
};

inline const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = {
      {"identity", "store and release with no manipulation", R"({
  "schema": "tripod-config/1",
  "medium": {"kappa": 1000, "length": 1, "n_z": 512},
  "input": {"qubit": {"c_plus": 0.6, "c_minus": [0, 0.8]}, "envelope": {"center": 0.25, "width": 0.05}},
  "schedule": {"type": "store_release", "omega_c0": 707.10678118654755, "t_off": 0.2, "t_on": 0.7, "ramp_time": 0.05},
  "manipulations": [],
  "engine": "full",
  "output": {"dir": "out/identity", "snapshots": true}
}
)"},
      {"not-gate", "NOT gate: one Raman pulse chi = pi, beta = pi", R"({
  "schema": "tripod-config/1",
  "medium": {"kappa": 1000, "length": 1, "n_z": 512},
  "input": {"qubit": {"c_plus": 1, "c_minus": 0}},
  "schedule": {"type": "store_release", "t_off": 0.2, "t_on": 0.7, "ramp_time": 0.05},
  "manipulations": [{"type": "raman", "chi": 3.141592653589793, "beta": 3.141592653589793, "tau": 0.01}],
  "engine": "full",
  "output": {"dir": "out/not-gate"}
}
)"},
      {"sqrt-not", "square root of NOT: chi = pi, beta = pi/2", R"({
  "schema": "tripod-config/1",
  "input": {"qubit": {"c_plus": 1, "c_minus": 0}},
  "schedule": {"type": "store_release", "t_off": 0.2, "t_on": 0.7, "ramp_time": 0.05},
  "manipulations": [{"type": "raman", "chi": 3.141592653589793, "beta": 1.5707963267948966}],
  "engine": "full",
  "output": {"dir": "out/sqrt-not"}
}
)"},
      {"double-sqrt-not", "two sqrt-NOT pulses in one hold, equal to NOT", R"({
  "schema": "tripod-config/1",
  "input": {"qubit": {"c_plus": 1, "c_minus": 0}},
  "schedule": {"type": "store_release", "t_off": 0.2, "t_on": 0.7, "ramp_time": 0.05},
  "manipulations": [
    {"type": "raman", "chi": 3.141592653589793, "beta": 1.5707963267948966},
    {"type": "raman", "chi": 3.141592653589793, "beta": 1.5707963267948966}
  ],
  "engine": "full",
  "output": {"dir": "out/double-sqrt-not"}
}
)"},
      {"htilde", "H-tilde rotation: chi = -pi/2, beta = pi/2, with gate reconstruction", R"({
  "schema": "tripod-config/1",
  "input": {"qubit": {"c_plus": 1, "c_minus": 0}},
  "schedule": {"type": "store_release", "t_off": 0.2, "t_on": 0.7, "ramp_time": 0.05},
  "manipulations": [{"type": "raman", "chi": -1.5707963267948966, "beta": 1.5707963267948966}],
  "engine": "full",
  "output": {"dir": "out/htilde", "reconstruct_gate": true}
}
)"},
      {"hadamard", "Hadamard as H-tilde followed by a Zeeman pi pulse, with gate reconstruction", R"({
  "schema": "tripod-config/1",
  "input": {"qubit": {"c_plus": 1, "c_minus": 0}},
  "schedule": {"type": "store_release", "t_off": 0.2, "t_on": 0.7, "ramp_time": 0.05},
  "manipulations": [
    {"type": "raman", "chi": -1.5707963267948966, "beta": 1.5707963267948966},
    {"type": "zeeman", "phi": 3.141592653589793}
  ],
  "engine": "full",
  "output": {"dir": "out/hadamard", "reconstruct_gate": true}
}
)"},
      {"sigma-y", "sigma_y up to phase: chi = pi/2, beta = pi", R"({
  "schema": "tripod-config/1",
  "input": {"qubit": {"c_plus": 0.6, "c_minus": [0, 0.8]}},
  "schedule": {"type": "store_release", "t_off": 0.2, "t_on": 0.7, "ramp_time": 0.05},
  "manipulations": [{"type": "raman", "chi": 1.5707963267948966, "beta": 3.141592653589793}],
  "engine": "full",
  "output": {"dir": "out/sigma-y"}
}
)"},
      {"phase-gate", "phase gate: Zeeman area pi/2 on (1,1)/sqrt2", R"({
  "schema": "tripod-config/1",
  "input": {"qubit": {"c_plus": 0.7071067811865476, "c_minus": 0.7071067811865476}},
  "schedule": {"type": "store_release", "t_off": 0.2, "t_on": 0.7, "ramp_time": 0.05},
  "manipulations": [{"type": "zeeman", "phi": 1.5707963267948966}],
  "engine": "full",
  "output": {"dir": "out/phase-gate"}
}
)"},
      {"hybrid-hadamard", "Hadamard with the adiabatic/polariton hybrid engine", R"({
  "schema": "tripod-config/1",
  "input": {"qubit": {"c_plus": 0.6, "c_minus": [0, 0.8]}},
  "schedule": {"type": "store_release", "t_off": 0.2, "t_on": 0.7, "ramp_time": 0.05},
  "manipulations": [
    {"type": "raman", "chi": -1.5707963267948966, "beta": 1.5707963267948966},
    {"type": "zeeman", "phi": 3.141592653589793}
  ],
  "engine": "hybrid",
  "output": {"dir": "out/hybrid-hadamard"}
}
)"},
      {"boundary-not", "NOT gate on a pulse injected at the medium entrance", R"({
  "schema": "tripod-config/1",
  "input": {"qubit": {"c_plus": 1, "c_minus": 0}, "mode": "boundary", "envelope": {"center": 0.1, "width": 0.02}},
  "schedule": {"type": "store_release", "t_off": 0.2, "t_on": 0.7, "ramp_time": 0.05},
  "manipulations": [{"type": "raman", "chi": 3.141592653589793, "beta": 3.141592653589793}],
  "engine": "full",
  "output": {"dir": "out/boundary-not"}
}
)"},
      {"si-units", "1 cm sample in SI units: NOT from two-photon couplings, then a pi/2 Zeeman pulse", R"({
  "schema": "tripod-config/1",
  "units": {"system": "si", "length_m": 0.01},
  "medium": {"kappa": 2.9979245799999996e13, "length": 0.01, "n_z": 512},
  "input": {"qubit": {"c_plus": 0.6, "c_minus": 0.8}, "envelope": {"center": 0.0025, "width": 0.0005}},
  "schedule": {"type": "store_release", "t_off": 6.671281903963042e-12, "t_on": 2.3349486663870644e-11,
               "ramp_time": 1.6678204759907606e-12},
  "manipulations": [
    {"type": "raman", "u_plus": 2.1700527455046184e13, "u_minus": 2.1700527455046184e13, "detuning": -1e14,
     "tau": 3.335640951981521e-13},
    {"type": "zeeman", "g_factor": 0.5, "b_field": 10.70974605571997, "tau": 1.6678204759907606e-12}
  ],
  "engine": "full",
  "output": {"dir": "out/si-units"}
}
)"},
      {"random-gate", "random input qubit (seeded) through an arbitrary rotation", R"({
  "schema": "tripod-config/1",
  "seed": 7,
  "input": {"qubit": "random"},
  "schedule": {"type": "store_release", "t_off": 0.2, "t_on": 0.7, "ramp_time": 0.05},
  "manipulations": [
    {"type": "raman", "chi": 0.7, "beta": 1.3},
    {"type": "zeeman", "phi": 0.4}
  ],
  "engine": "full",
  "output": {"dir": "out/random-gate"}
}
)"},
  };
  return all;
}

inline const Preset& find_preset(std::string_view name) {
  for (const auto& p : presets())
    if (p.name == name) return p;
  throw ValidationError("unknown preset '" + std::string(name) + "'");
}

}  // namespace tripod::cli
