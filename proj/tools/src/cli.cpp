#include "cli.hpp"

#include <functional>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "nvgyro/noise.hpp"
#include "nvgyro/version.hpp"

namespace nvgyro::cli {
namespace {

void add_common(CLI::App* sub, Flags& f, bool monte_carlo) {
  sub->add_option("--config", f.config_path, "JSON run configuration");
  sub->add_option("--seed", f.seed, "Master seed (default 0)");
  sub->add_option("--out", f.out, "Output directory (default $NVGYRO_OUT or ./nvgyro_out)");
  if (monte_carlo) {
    sub->add_option("--draws", f.draws, "Monte Carlo noise draws");
    sub->add_option("--threads", f.threads, "Worker threads (0 = auto); never changes results");
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"nvgyro: 15NV spin simulator, protocols and gyroscope emulation", "nvgyro"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Flags f;
  std::function<void()> action;

  auto* enh = app.add_subcommand("enhancement", "Sweep B and tabulate the enhancement factors");
  add_common(enh, f, false);
  enh->add_option("--bmax", f.bmax_g, "Maximum field (G)");
  enh->add_option("--points", f.points, "Grid points");
  enh->add_option("--axis,--mode", f.axis, "Field axis: z or x");
  enh->callback([&] { action = [&] { cmd_enhancement(f, out); }; });

  auto* mis = app.add_subcommand("misalign", "Dephasing time versus field misalignment");
  add_common(mis, f, true);
  mis->add_option("--angles", f.angles_deg, "Angles in degrees")->delimiter(',');
  mis->add_option("--field", f.field_g, "Field magnitude (G)");
  mis->callback([&] { action = [&] { cmd_misalign(f, out); }; });

  auto* ram = app.add_subcommand("ramsey", "Nuclear Ramsey decay for one manifold");
  add_common(ram, f, true);
  ram->add_option("--mode", f.mode, "Manifold: ms0, ms-1 or dq");
  ram->callback([&] { action = [&] { cmd_ramsey(f, out); }; });

  auto* dq = app.add_subcommand("dq-ramsey", "DQ-protected versus unprotected Ramsey decay");
  add_common(dq, f, true);
  dq->add_option("--mode", f.mode, "both, protected or unprotected");
  dq->callback([&] { action = [&] { cmd_dq_ramsey(f, out); }; });

  auto* pol = app.add_subcommand("polarize", "Nuclear polarization by MW/RF swap and optical reset");
  add_common(pol, f, false);
  pol->add_option("--mode", f.mode, "ideal or finite MW pulses");
  pol->add_option("--rounds", f.rounds, "Polarization rounds");
  pol->callback([&] { action = [&] { cmd_polarize(f, out); }; });

  auto* temp = app.add_subcommand("tempshift", "Recover dAzz/dT from a temperature series");
  add_common(temp, f, false);
  temp->add_option("--noise-hz", f.noise_hz, "Frequency measurement noise std (Hz)");
  temp->callback([&] { action = [&] { cmd_tempshift(f, out); }; });

  auto* gyro = app.add_subcommand("gyro", "Emulated 2-Ramsey gyroscope run");
  add_common(gyro, f, true);
  gyro->add_option("--mode", f.mode, "protected or unprotected");
  gyro->add_option("--emulation", f.emulation, "phase_mod or iz_term");
  gyro->add_option("--reps", f.repetitions, "Shots per Ramsey measurement");
  gyro->add_option("--shot-noise", f.shot_noise, "Single-shot readout noise std");
  gyro->callback([&] { action = [&] { cmd_gyro(f, out, err); }; });

  auto* seq = app.add_subcommand("seq", "Pulse-sequence utilities");
  seq->require_subcommand(1);
  auto* check = seq->add_subcommand("check", "Parse and validate a .seq file");
  check->add_option("file", f.seq_file, "Sequence file")->required();
  check->add_flag("--print", f.print, "Print the canonical form");
  check->add_option("--bind", f.bindings, "name=value parameter binding (repeatable)");
  check->callback([&] { action = [&] { cmd_seq_check(f, out); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    action();
    return kExitOk;
  } catch (const IoError& e) {
    err << "nvgyro: I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ConfigError& e) {
    err << "nvgyro: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    err << "nvgyro: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const BindingError& e) {
    err << "nvgyro: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const noise::EnsembleError& e) {
    err << "nvgyro: runtime error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const FitError& e) {
    err << "nvgyro: fit error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "nvgyro: runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"nvgyro"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace nvgyro::cli
