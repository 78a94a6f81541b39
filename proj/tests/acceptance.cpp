// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "tripod/cli/commands.hpp"
#include "tripod/cli/presets.hpp"

using namespace tripod;
using namespace tripod::cli;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Mode-decoupling bookkeeping across every protocol run in the suite.
struct Decoupling {
  real max_bbprime = 0.0;
  real worst_population = 0.0;  // max |p - 1/2|
  int runs = 0;

  void note(const ProtocolResult& r) {
    max_bbprime = std::max(max_bbprime, r.diagnostics.max_abs_s_bbprime);
    worst_population = std::max({worst_population, std::abs(r.diagnostics.population_b - 0.5),
                                 std::abs(r.diagnostics.population_bprime - 0.5)});
    ++runs;
  }
  void note(const SweepRow& r) {
    if (r.status == "ok") max_bbprime = std::max(max_bbprime, r.max_abs_s_bbprime);
    ++runs;
  }
};

Decoupling decoupling;

std::string sci(real v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Runs one criterion and prints its line; `budget` <= 0 means no time limit.
bool criterion(const char* id, const char* title, double budget, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = seconds_since(t0);
  if (budget > 0.0 && secs >= budget) {
    o.pass = false;
    o.detail += "; over time budget " + sci(budget) + " s";
  }
  std::printf("%s %s  %s: %s (%.2f s)\n", id, o.pass ? "PASS" : "FAIL", title, o.detail.c_str(), secs);
  std::fflush(stdout);
  return o.pass;
}

Matrix2 m2(complex a, complex b, complex c, complex d) { return Matrix2::from_entries(a, b, c, d); }

PolaritonState gaussian(const Grid1D& g, real center, real width, complex plus, complex minus) {
  PolaritonState psi(g);
  for (std::size_t j = 0; j < g.size(); ++j) {
    const real x = (g.z(j) - center) / width;
    psi.plus[j] = plus * std::exp(-0.5 * x * x);
    psi.minus[j] = minus * std::exp(-0.5 * x * x);
  }
  return psi;
}

// U sigma U^dag with U = exp(i H tau), H = w|b><b'| + h.c., w = |W| e^{i chi},
// by Eigen's Hermitian eigensolver.
Matrix3 eigen_conjugation(const Matrix3& sigma, real chi, real magnitude, real tau) {
  Eigen::Matrix3cd h = Eigen::Matrix3cd::Zero();
  h(0, 2) = std::polar(magnitude, chi);
  h(2, 0) = std::conj(h(0, 2));
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(h);
  Eigen::Vector3cd phases;
  for (int k = 0; k < 3; ++k) phases(k) = std::polar(1.0, es.eigenvalues()(k) * tau);
  const Eigen::Matrix3cd u = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
  Eigen::Matrix3cd s;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s(i, j) = sigma[i][j];
  const Eigen::Matrix3cd out = u * s * u.adjoint();
  Matrix3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i][j] = out(i, j);
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

ProtocolSpec spec_for(PolarizationQubit q, std::vector<Manipulation> manipulations) {
  ProtocolSpec spec;
  spec.input_qubit = q;
  spec.manipulations = std::move(manipulations);
  return spec;
}

// ---------------------------------------------------------------- criteria

Outcome ac1() {
  const real s = 1.0 / std::sqrt(2.0);
  const Matrix2 not_gate = m2(0, 1, 1, 0);
  const Matrix2 h = m2(s, s, s, -s);
  real err = 0.0;
  err = std::max(err, max_abs_diff(gate_matrix(pi, pi).matrix(), -I * not_gate));
  const auto half = gate_matrix(pi, pi / 2);
  err = std::max(err, max_abs_diff((half * half).matrix(), -I * not_gate));
  // G(pi/2, beta) = [[cos b/2, -sin b/2], [sin b/2, cos b/2]] at beta = pi/2
  err = std::max(err, max_abs_diff(gate_matrix(pi / 2, pi / 2).matrix(), m2(s, -s, s, s)));
  const complex i_phase = std::polar(1.0, pi / 2);
  err = std::max(err, max_abs_diff(i_phase * (rotation_z(pi) * h_tilde()).matrix(), h));
  err = std::max(err, max_abs_diff(i_phase * (h_tilde() * rotation_x(pi)).matrix(), h));
  return {err <= 1e-12, "max entry error " + sci(err) + " (tol 1e-12)"};
}

Outcome ac2() {
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<real> a(-2 * pi, 2 * pi);
  real unit = 0.0, add = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const real chi = a(rng), b1 = a(rng), b2 = a(rng);
    const auto g = gate_matrix(chi, b1).matrix();
    unit = std::max(unit, max_abs_diff(g.adjoint() * g, Matrix2::identity()));
    add = std::max(add, max_abs_diff((gate_matrix(chi, b1) * gate_matrix(chi, b2)).matrix(),
                                     gate_matrix(chi, b1 + b2).matrix()));
  }
  const bool ok = unit <= 1e-12 && add <= 1e-12;
  return {ok, "1000 draws: |G^dag G - I| " + sci(unit) + ", additivity " + sci(add) + " (tol 1e-12)"};
}

Outcome ac3() {
  std::mt19937_64 rng(1002);
  std::uniform_real_distribution<real> a(-pi, pi);
  std::uniform_real_distribution<real> w(0.1, 400.0);
  std::normal_distribution<real> d;
  const Grid1D g(1, 1.0);
  real restrict_err = 0.0, oracle_err = 0.0, diag_err = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto pulse = GatePulse::constant(a(rng), w(rng), 0.01);
    Matrix3 sigma{};
    sigma[0][0] = 0.5;
    sigma[2][2] = 0.5;
    sigma[0][1] = {d(rng), d(rng)};
    sigma[2][1] = {d(rng), d(rng)};
    sigma[1][0] = std::conj(sigma[0][1]);
    sigma[1][2] = std::conj(sigma[2][1]);
    const auto full = apply_raman_full_matrix(sigma, pulse);
    MediumState m(g);
    m.s_bc[0] = sigma[0][1];
    m.s_bprime_c[0] = sigma[2][1];
    const auto fast = apply_raman(m, pulse);
    restrict_err = std::max({restrict_err, std::abs(full[0][1] - fast.s_bc[0]),
                             std::abs(full[2][1] - fast.s_bprime_c[0]), std::abs(full[0][2])});
    diag_err = std::max({diag_err, std::abs(full[0][0] - 0.5), std::abs(full[2][2] - 0.5)});
    const auto want = eigen_conjugation(sigma, pulse.chi(), pulse.beta() / (2.0 * pulse.tau()), pulse.tau());
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) oracle_err = std::max(oracle_err, std::abs(full[i][j] - want[i][j]));
  }
  decoupling.worst_population = std::max(decoupling.worst_population, diag_err);
  const bool ok = restrict_err <= 1e-12 && oracle_err <= 1e-10;
  return {ok, "100 pulses: restricted vs full " + sci(restrict_err) + " (tol 1e-12), full vs eigensolver " +
                  sci(oracle_err) + " (tol 1e-10)"};
}

Outcome ac4() {
  MediumParams p;  // kappa 1000, n_z 512
  const Grid1D g(p);
  const auto s = ControlSchedule::store_release(p.kappa / std::sqrt(2.0), 0.2, 0.7, 50.0 / p.kappa);
  const auto psi = gaussian(g, 0.25, 0.05, 1.0, 0.5 * I);
  auto [f, m] = dark_state_from_polariton(psi, s, 0.0, p);
  const real dt = g.dz();
  real worst = 0.0;
  std::string at;
  std::size_t k = 0;
  for (real check : {0.45, 1.0}) {
    for (; dt * static_cast<real>(k) < check - 0.5 * dt; ++k) step_full(f, m, s, dt * static_cast<real>(k), dt, p);
    const real t = dt * static_cast<real>(k);
    const auto got = polariton_transform(f, m, s.theta(t, p.kappa), p);
    const real e = relative_l2(got, analytic_polariton_evolve(psi, s, p.kappa, t));
    worst = std::max(worst, e);
    at += (at.empty() ? "" : ", ") + std::string("t=") + sci(t) + ": " + sci(e);
    decoupling.max_bbprime = std::max(decoupling.max_bbprime, m.max_abs_bbprime());
  }
  return {worst < 0.01, "relative L2 full vs translated profile " + at + " (tol 0.01)"};
}

Outcome ac5() {
  const MediumParams p;
  real worst = 0.0;
  std::string parts;
  for (real c2 : {0.25, 0.5, 0.75}) {
    const auto r = measure_group_delay(p, c2, 0.05);
    const real e = std::abs(r.delay / r.expected_delay - 1.0);
    worst = std::max(worst, e);
    parts += (parts.empty() ? "" : ", ") + std::string("cos2=") + sci(c2) + ": " + sci(e);
  }
  return {worst <= 0.02, "relative delay error " + parts + " (tol 0.02)"};
}

Outcome ac6_not() {
  const auto r = run_protocol(spec_for(make_qubit(1.0, 0.0), {GatePulse::from_area(pi, pi)}));
  decoupling.note(r);
  const real f = fidelity(r.output_qubit, make_qubit(0.0, 1.0));
  return {f >= 0.99, "NOT on (1,0): fidelity to (0,1) " + sci(f) + " (min 0.99)"};
}

Outcome ac6_hadamard() {
  const auto plan = plan_pulses(hadamard());
  const auto r = run_protocol(spec_for(make_qubit(1.0, 0.0), plan.pulses));
  decoupling.note(r);
  const real target_err = distance_up_to_phase(r.target_gate.matrix(), hadamard().matrix());
  const bool ok = r.fidelity_to_target >= 0.99 && target_err <= 1e-12;
  return {ok, "raman + zeeman composition: fidelity to H target " + sci(r.fidelity_to_target) +
                  " (min 0.99), composed vs H " + sci(target_err)};
}

Outcome ac7() {
  const real s = 1.0 / std::sqrt(2.0);
  const auto q = make_qubit(s, s);
  real worst = 0.0, model = 0.0;
  for (real phi : {pi / 4, pi / 2, pi}) {
    const auto r = run_protocol(spec_for(q, {ZeemanPulse::from_area(phi)}));
    decoupling.note(r);
    worst = std::max(worst, std::abs(wrap_angle(relative_phase(r.output_qubit) - phi)));
    model = std::max(model, std::abs(wrap_angle(relative_phase(r.output_qubit) -
                                                relative_phase(apply_as_field_map(rotation_z(phi), q)))));
  }
  const bool ok = worst <= 1e-3 && model <= 1e-3;
  return {ok, "phi in {pi/4, pi/2, pi}: max phase error " + sci(worst) + " rad, vs R_Z prediction " + sci(model) +
                  " rad (tol 1e-3)"};
}

std::vector<SweepRow> beta_rows;

Outcome ac9() {
  const RunConfig cfg = parse_config(find_preset("not-gate").config);
  beta_rows = run_sweep(cfg.spec, SweepAxis{"beta", 0.0, 2 * pi, 9, false});
  real worst = 0.0;
  bool all_ok = true;
  for (const auto& row : beta_rows) {
    decoupling.note(row);
    if (row.status != "ok") {
      all_ok = false;
      continue;
    }
    const real c = std::cos(row.value / 2);
    worst = std::max(worst, std::abs(row.fidelity_to_input - c * c));
  }
  return {all_ok && worst <= 0.01,
          "9 points over [0, 2pi]: max |F - cos^2(beta/2)| " + sci(worst) + " (tol 0.01)"};
}

Outcome ac10() {
  const fs::path root = fs::temp_directory_path() / "tripod-acceptance";
  fs::remove_all(root);
  RunConfig cfg = parse_config(find_preset("random-gate").config, 42);
  std::string first_kv, first_snap;
  bool same = true;
  for (int k = 0; k < 2; ++k) {
    cfg.output.dir = (root / ("run" + std::to_string(k))).string();
    RunFiles files;
    decoupling.note(cmd_run(cfg, &files));
    const std::string kv = slurp(files.record), snap = slurp(files.snapshots);
    if (k == 0) {
      first_kv = kv;
      first_snap = snap;
    } else {
      same = same && kv == first_kv && snap == first_snap && !kv.empty();
    }
  }
  const RunConfig phase = parse_config(find_preset("phase-gate").config);
  const SweepAxis axis{"phi", 0.0, pi, 3, false};
  std::ostringstream a, b;
  write_sweep_csv(a, axis, phase.spec.engine, run_sweep(phase.spec, axis));
  write_sweep_csv(b, axis, phase.spec.engine, run_sweep(phase.spec, axis));
  const bool sweep_same = a.str() == b.str();
  fs::remove_all(root);
  return {same && sweep_same, std::string("result.kv + snapshots.csv ") + (same ? "identical" : "DIFFER") +
                                  ", sweep.csv " + (sweep_same ? "identical" : "DIFFER")};
}

Outcome ac8() {
  const bool ok = decoupling.max_bbprime < 1e-10 && decoupling.worst_population <= 1e-12;
  return {ok, std::to_string(decoupling.runs) + " protocol runs: max |s_bb'| " + sci(decoupling.max_bbprime) +
                  " (tol 1e-10), max |population - 1/2| " + sci(decoupling.worst_population)};
}

}  // namespace

int main() {
  bool ok = true;
  ok &= criterion("AC1", "gate identities", 1.0, ac1);
  ok &= criterion("AC2", "unitarity and group structure", 1.0, ac2);
  ok &= criterion("AC3", "storage/manipulation equivalence", 0.0, ac3);
  ok &= criterion("AC4", "polariton transport oracle", 60.0, ac4);
  ok &= criterion("AC5", "slow-light delay", 0.0, ac5);
  ok &= criterion("AC6", "end-to-end NOT protocol", 60.0, ac6_not);
  ok &= criterion("AC6", "end-to-end Hadamard protocol", 60.0, ac6_hadamard);
  ok &= criterion("AC7", "phase gate", 0.0, ac7);
  ok &= criterion("AC9", "beta sweep reproduction", 0.0, ac9);
  ok &= criterion("AC10", "determinism", 0.0, ac10);
  // last: aggregates every protocol run above
  ok &= criterion("AC8", "mode decoupling and population invariance", 0.0, ac8);
  std::printf("%s\n", ok ? "ALL PASS" : "SOME CRITERIA FAILED");
  return ok ? 0 : 1;
}
