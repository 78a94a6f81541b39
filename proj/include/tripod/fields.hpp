#pragma once

#include <cmath>
#include <vector>

#include "tripod/core.hpp"

namespace tripod {

/// Probe Rabi-frequency envelopes Omega+(z), Omega-(z) at one instant.
struct FieldState {
  Grid1D grid;
  std::vector<complex> plus;
  std::vector<complex> minus;

  explicit FieldState(const Grid1D& g) : grid(g), plus(g.size()), minus(g.size()) {}

  // Integral of |Omega+|^2 + |Omega-|^2 over the grid.
  real norm2() const {
    real acc = 0.0;
    for (std::size_t j = 0; j < plus.size(); ++j) acc += std::norm(plus[j]) + std::norm(minus[j]);
    return acc * grid.dz();
  }
};

/// Dark-state polariton fields psi+(z), psi-(z).
struct PolaritonState {
  Grid1D grid;
  std::vector<complex> plus;
  std::vector<complex> minus;

  explicit PolaritonState(const Grid1D& g) : grid(g), plus(g.size()), minus(g.size()) {}

  real norm2() const {
    real acc = 0.0;
    for (std::size_t j = 0; j < plus.size(); ++j) acc += std::norm(plus[j]) + std::norm(minus[j]);
    return acc * grid.dz();
  }
};

inline void require_same_grid(const Grid1D& a, const Grid1D& b) {
  if (!(a == b)) throw ValidationError("states are defined on different grids");
}

// ||a - b|| / ||b|| over both polarization components.
template <class State>
real relative_l2(const State& a, const State& b) {
  require_same_grid(a.grid, b.grid);
  real num = 0.0;
  real den = 0.0;
  for (std::size_t j = 0; j < a.plus.size(); ++j) {
    num += std::norm(a.plus[j] - b.plus[j]) + std::norm(a.minus[j] - b.minus[j]);
    den += std::norm(b.plus[j]) + std::norm(b.minus[j]);
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace tripod
