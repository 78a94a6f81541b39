// tripodsim: store / manipulate / release simulations of polarization qubits
// in a tripod-configuration atomic medium.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tripod/cli/commands.hpp"

namespace {

using namespace tripod;
using namespace tripod::cli;

struct Common {
  std::string config;
  std::string preset;
  std::string out;
  std::string engine;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "config file (JSON)");
  cmd->add_option("--preset", c.preset, "built-in preset instead of a config file");
  cmd->add_option("--out", c.out, "output directory (overrides output.dir)");
  cmd->add_option("--engine", c.engine, "full | polariton | hybrid")->check(CLI::IsMember({"full", "polariton", "hybrid"}));
  cmd->add_option("--seed", c.seed, "seed for random inputs");
}

RunConfig load(const Common& c) {
  if (c.config.empty() == c.preset.empty()) throw ValidationError("give exactly one of --config or --preset");
  RunConfig cfg = c.preset.empty() ? load_config(c.config, c.seed)
                                   : parse_config(find_preset(c.preset).config, c.seed);
  if (!c.engine.empty()) {
    cfg.spec.engine = parse_engine(c.engine);
    validate(cfg.spec);
  }
  if (!c.out.empty()) cfg.output.dir = c.out;
  return cfg;
}

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return exit_parse;
  } catch (const ValidationError& e) {
    std::cerr << "invalid: " << e.what() << '\n';
    return exit_validation;
  } catch (const DivergenceError& e) {
    std::cerr << "simulation diverged: " << e.what() << '\n';
    return exit_runtime;
  } catch (const ReleaseError& e) {
    std::cerr << e.what() << '\n';
    return exit_runtime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_other;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tripodsim: photon polarization qubit gates via light storage in a tripod medium"};
  app.require_subcommand(1);

  Common run_opts;
  auto* run = app.add_subcommand("run", "run one protocol; writes report.txt, result.kv, snapshots.csv");
  add_common(run, run_opts);

  Common sweep_opts;
  SweepAxis axis;
  unsigned threads = 0;
  auto* sweep = app.add_subcommand("sweep", "run the protocol over one parameter axis; writes sweep.csv");
  add_common(sweep, sweep_opts);
  sweep->add_option("--axis", axis.name, "beta | chi | phi | ramp_time | n_z")->required();
  sweep->add_option("--from", axis.from, "first axis value")->required();
  sweep->add_option("--to", axis.to, "last axis value")->required();
  sweep->add_option("--points", axis.points, "number of points")->required();
  sweep->add_flag("--log", axis.log, "geometric spacing");
  sweep->add_option("--threads", threads, "concurrent runs (0 = all cores)");

  std::string gate_name;
  std::string gate_matrix_text;
  auto* gates = app.add_subcommand("gates", "pulse schedule for a named gate or a unitary matrix");
  gates->add_option("name", gate_name, "NOT | sqrtNOT | Htilde | hadamard | sigma_y | identity | phase:<angle>");
  gates->add_option("--matrix", gate_matrix_text, "target as JSON [[a, b], [c, d]], entries number or [re, im]");

  std::string preset_action = "list";
  std::string preset_arg;
  auto* pre = app.add_subcommand("presets", "list built-in presets, show one, or write them all to a directory");
  pre->add_option("action", preset_action, "list | show | write")->check(CLI::IsMember({"list", "show", "write"}));
  pre->add_option("arg", preset_arg, "preset name (show) or directory (write)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_parse;
  }

  if (*run) {
    return guarded([&] {
      const RunConfig cfg = load(run_opts);
      RunFiles files;
      const ProtocolResult r = cmd_run(cfg, &files);
      std::cout << "fidelity to target " << format_real(r.fidelity_to_target) << '\n'
                << "output qubit       " << tripod::detail::qubit_text(r.output_qubit) << '\n';
      for (const auto& w : r.diagnostics.warnings) std::cout << "warning: " << w << '\n';
      std::cout << "wrote " << files.report.string() << ", " << files.record.string();
      if (cfg.output.snapshots) std::cout << ", " << files.snapshots.string();
      std::cout << '\n';
      return static_cast<int>(exit_ok);
    });
  }
  if (*sweep) {
    return guarded([&] {
      const RunConfig cfg = load(sweep_opts);
      std::filesystem::path written;
      const auto rows = cmd_sweep(cfg, axis, threads, &written);
      write_sweep_csv(std::cout, axis, cfg.spec.engine, rows);
      std::cout << "wrote " << written.string() << '\n';
      return static_cast<int>(exit_ok);
    });
  }
  if (*gates) {
    return guarded([&] {
      if (gate_name.empty() == gate_matrix_text.empty())
        throw ValidationError("give exactly one of a gate name or --matrix");
      if (!gate_matrix_text.empty()) {
        const Matrix2 m = parse_matrix(gate_matrix_text);
        if (!is_unitary(m, 1e-10)) throw ValidationError("matrix is not unitary");
        cmd_gates("matrix", Unitary2::checked(m), std::cout);
      } else {
        cmd_gates(gate_name, named_gate(gate_name), std::cout);
      }
      return static_cast<int>(exit_ok);
    });
  }
  if (*pre) {
    return guarded([&] {
      if (preset_action == "list") {
        for (const auto& p : presets()) std::cout << p.name << "\t" << p.description << '\n';
      } else if (preset_action == "show") {
        std::cout << find_preset(preset_arg).config;
      } else {
        if (preset_arg.empty()) throw ValidationError("presets write needs a directory");
        std::filesystem::create_directories(preset_arg);
        for (const auto& p : presets()) {
          const auto path = std::filesystem::path(preset_arg) / (std::string(p.name) + ".json");
          std::ofstream f(path, std::ios::binary);
          if (!f) throw ValidationError("cannot write '" + path.string() + "'");
          f << p.config;
          std::cout << "wrote " << path.string() << '\n';
        }
      }
      return static_cast<int>(exit_ok);
    });
  }
  return exit_other;
}
