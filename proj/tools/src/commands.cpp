#include "commands.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "cli.hpp"
#include "config.hpp"
#include "nvgyro/analysis.hpp"
#include "nvgyro/protocols.hpp"
#include "nvgyro/sequence.hpp"
#include "nvgyro/units.hpp"
#include "output.hpp"

namespace nvgyro::cli {
namespace {

using protocols::Manifold;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Config file plus the flags every subcommand shares.
struct Setup {
  json root;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;

  Node node() const { return Node(&root, ""); }
};

Setup setup(const Flags& flags) {
  Setup s;
  s.root = load_config(flags.config_path);
  const Node root = s.node();
  s.seed = flags.seed ? *flags.seed : root.count("seed", 0);
  if (flags.out) {
    s.out_dir = *flags.out;
  } else if (root.has("output_dir")) {
    s.out_dir = root.text("output_dir", "");
  } else if (const char* env = std::getenv(kOutEnv); env != nullptr && *env != '\0') {
    s.out_dir = env;
  } else {
    s.out_dir = "nvgyro_out";
  }
  return s;
}

std::size_t draws_of(const Flags& flags, const Node& root, std::size_t fallback) {
  const std::uint64_t n = flags.draws ? *flags.draws : root.count("draws", fallback);
  if (n < 1) throw ConfigError("draws: must be >= 1");
  return static_cast<std::size_t>(n);
}

std::size_t phase_count(const Node& section) {
  const std::uint64_t n = section.count("phases", 12);
  if (n < 6) throw ConfigError(section.path("phases") + ": need at least 6 phases");
  return static_cast<std::size_t>(n);
}

Manifold parse_manifold(const std::string& name) {
  if (name == "ms0") return Manifold::kMs0;
  if (name == "ms-1") return Manifold::kMsMinus1;
  if (name == "dq") return Manifold::kDqProtected;
  throw ConfigError("unknown manifold '" + name + "' (ms0|ms-1|dq)");
}

const char* manifold_name(Manifold m) {
  switch (m) {
    case Manifold::kMs0: return "ms0";
    case Manifold::kMsMinus1: return "ms-1";
    case Manifold::kDqProtected: return "dq";
  }
  return "ms0";
}

std::vector<double> default_times(Manifold m) {
  switch (m) {
    case Manifold::kMs0: return {0.5e-3, 1e-3, 1.5e-3, 2e-3, 3e-3, 4e-3, 5e-3, 6e-3, 8e-3, 10e-3, 12e-3};
    case Manifold::kMsMinus1: return {20e-6, 50e-6, 100e-6, 150e-6, 200e-6, 300e-6, 400e-6, 600e-6};
    case Manifold::kDqProtected: return {0.3e-3, 0.6e-3, 1.2e-3, 2e-3, 3e-3, 4e-3, 5.5e-3, 7e-3};
  }
  return {};
}

std::vector<std::vector<double>> ramsey_rows(const protocols::RamseyTable& table) {
  std::vector<std::vector<double>> rows;
  for (const auto& p : table.points) rows.push_back({p.t_s, p.contrast, p.contrast_err});
  return rows;
}

// Fitted T2 into the manifest results; a failed fit is reported, not fatal.
json t2_result(const protocols::RamseyTable& table, std::ostream& out, const std::string& label) {
  json r;
  std::size_t failed = 0;
  for (const auto& p : table.points) failed += p.fit_ok ? 0 : 1;
  r["failed_points"] = failed;
  try {
    const protocols::T2Estimate e = protocols::fit_t2n(table);
    r["t2n_s"] = e.t2_s;
    r["t2n_err_s"] = e.t2_err_s;
    r["amplitude"] = e.amplitude;
    out << label << ": T2n* = " << e.t2_s * 1e3 << " ms +- " << e.t2_err_s * 1e3 << " ms\n";
  } catch (const FitError& e) {
    r["fit_error"] = e.what();
    out << label << ": no T2n* fit (" << e.what() << ")\n";
  }
  return r;
}

json times_json(const std::vector<double>& v) { return json(v); }

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

seq::Sequence parse_named(const std::string& text, const std::string& origin) {
  try {
    return seq::parse_sequence(text);
  } catch (const ParseError& e) {
    throw ConfigError(origin + ":" + e.what());
  }
}

// Inline `sequence` text or a `sequence_file` relative to the config file.
std::optional<seq::Sequence> custom_sequence(const Node& sec, const std::string& config_path) {
  if (sec.has("sequence") && sec.has("sequence_file")) {
    throw ConfigError(sec.path("sequence") + ": give either sequence or sequence_file");
  }
  if (sec.has("sequence")) return parse_named(sec.text("sequence", ""), sec.path("sequence"));
  if (sec.has("sequence_file")) {
    std::filesystem::path file = sec.text("sequence_file", "");
    if (file.is_relative() && !config_path.empty()) {
      file = std::filesystem::path(config_path).parent_path() / file;
    }
    return parse_named(read_text(file), file.string());
  }
  return std::nullopt;
}

}  // namespace

void cmd_enhancement(const Flags& flags, std::ostream& out) {
  const Setup s = setup(flags);
  const Node root = s.node();
  const spin::NVParams params = read_params(root);
  const Node sec = root.child("enhancement");
  sec.allow({"b_max_g", "points", "axis"});
  const double b_max = flags.bmax_g ? *flags.bmax_g : sec.number("b_max_g", 1100.0);
  const std::uint64_t points = flags.points ? *flags.points : sec.count("points", 500);
  const std::string axis_name = flags.axis ? *flags.axis : (flags.mode ? *flags.mode : sec.text("axis", "z"));
  if (axis_name != "z" && axis_name != "x") throw ConfigError("enhancement axis must be z or x");
  if (!(b_max > 0.0)) throw ConfigError("enhancement.b_max_g: must be > 0");
  if (points < 2) throw ConfigError("enhancement.points: need at least 2");

  const auto axis = axis_name == "z" ? protocols::SweepAxis::kZ : protocols::SweepAxis::kX;
  const auto rows = protocols::enhancement_sweep(params, b_max, static_cast<std::size_t>(points), axis);

  json cfg{{"params", to_json(params)},
           {"enhancement", json{{"b_max_g", b_max}, {"points", points}, {"axis", axis_name}}}};
  Run run("enhancement", s.out_dir, s.seed, cfg);
  std::vector<std::vector<double>> table;
  double best = 0.0, best_b = 0.0;
  for (const auto& r : rows) {
    table.push_back({r.b_g, r.alpha_p1, r.alpha_0, r.alpha_m1});
    for (double a : {r.alpha_p1, r.alpha_0, r.alpha_m1}) {
      if (std::abs(a) > best) {
        best = std::abs(a);
        best_b = r.b_g;
      }
    }
  }
  run.write_csv("enhancement.csv", {"B_gauss", "alpha_p1", "alpha_0", "alpha_m1"}, table);
  const double limit = protocols::gslac_alpha_limit(params);
  run.results() = json{{"rows", rows.size()},
                       {"max_abs_alpha", best},
                       {"b_at_max_g", best_b},
                       {"gslac_limit", limit},
                       {"relative_deviation", best / limit - 1.0}};
  run.write_manifest();
  out << "enhancement: " << rows.size() << " rows, max |alpha| = " << best << " at " << best_b
      << " G (limit " << limit << ")\n";
}

void cmd_misalign(const Flags& flags, std::ostream& out) {
  const Setup s = setup(flags);
  const Node root = s.node();
  protocols::MisalignmentConfig mc;
  mc.params = read_params(root);
  mc.noise = read_noise(root, mc.params, NoisePreset::kMagnetic);
  mc.draws = draws_of(flags, root, 2000);
  mc.seed = s.seed;
  mc.threads = flags.threads;
  const Node sec = root.child("misalign");
  sec.allow({"angles_deg", "field_g", "times_per_angle", "phases", "simulate"});
  mc.angles_deg = flags.angles_deg.empty() ? sec.numbers("angles_deg", mc.angles_deg) : flags.angles_deg;
  mc.field_g = flags.field_g ? *flags.field_g : sec.number("field_g", mc.field_g);
  mc.times_per_angle = static_cast<std::size_t>(sec.count("times_per_angle", mc.times_per_angle));
  mc.phases_rad = protocols::uniform_phases(phase_count(sec));
  mc.simulate = sec.flag("simulate", true);
  if (mc.angles_deg.empty()) throw ConfigError("misalign.angles_deg: need at least one angle");
  if (mc.times_per_angle < 4) throw ConfigError("misalign.times_per_angle: need at least 4");

  json cfg{{"params", to_json(mc.params)},
           {"noise", to_json(mc.noise)},
           {"draws", mc.draws},
           {"misalign", json{{"angles_deg", mc.angles_deg},
                             {"field_g", mc.field_g},
                             {"times_per_angle", mc.times_per_angle},
                             {"phases", mc.phases_rad.size()},
                             {"simulate", mc.simulate}}}};
  Run run("misalign", s.out_dir, s.seed, cfg);
  const auto rows = protocols::misalignment_sweep(mc);
  std::vector<std::vector<double>> table;
  json per_angle = json::array();
  for (const auto& r : rows) {
    const double sim = r.sim_ok ? r.t2n_sim_s : kNaN;
    table.push_back({r.theta_deg, r.omega_n_exact_hz, r.omega_n_cf_hz, sim, r.t2n_pred_s, r.t2n_pred_t1e_s});
    per_angle.push_back(json{{"theta_deg", r.theta_deg},
                             {"t2n_sim_err_s", r.sim_ok ? r.t2n_sim_err_s : kNaN},
                             {"sim_ok", r.sim_ok},
                             {"omega_relative_deviation", r.omega_n_cf_hz / r.omega_n_exact_hz - 1.0}});
    out << "theta " << r.theta_deg << " deg: omega_n " << r.omega_n_exact_hz << " Hz (closed form "
        << r.omega_n_cf_hz << "), T2n* sim " << sim * 1e3 << " ms, pred " << r.t2n_pred_s * 1e3
        << " ms, pred+T1e " << r.t2n_pred_t1e_s * 1e3 << " ms\n";
  }
  run.write_csv("misalign.csv",
                {"theta_deg", "omega_n_exact_hz", "omega_n_cf_hz", "t2n_sim_s", "t2n_pred_s", "t2n_pred_t1e_s"},
                table);
  run.results() = json{{"angles", per_angle}};
  run.write_manifest();
}

void cmd_ramsey(const Flags& flags, std::ostream& out) {
  const Setup s = setup(flags);
  const Node root = s.node();
  protocols::RamseyConfig rc;
  rc.params = read_params(root);
  rc.field = read_field(root);
  rc.noise = read_noise(root, rc.params, NoisePreset::kMagnetic);
  rc.draws = draws_of(flags, root, 2000);
  rc.seed = s.seed;
  rc.threads = flags.threads;
  const Node sec = root.child("ramsey");
  sec.allow({"manifold", "times_s", "phases", "dq_fraction", "sequence", "sequence_file"});
  rc.manifold = parse_manifold(flags.mode ? *flags.mode : sec.text("manifold", "ms0"));
  rc.sequence = custom_sequence(sec, flags.config_path);
  rc.times_s = sec.numbers("times_s", default_times(rc.manifold));
  rc.phases_rad = protocols::uniform_phases(phase_count(sec));
  rc.dq_fraction = sec.number("dq_fraction", 0.5);
  try {
    rc.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("ramsey: ") + e.what());
  }

  json cfg{{"params", to_json(rc.params)},
           {"field", to_json(rc.field)},
           {"noise", to_json(rc.noise)},
           {"draws", rc.draws},
           {"ramsey", json{{"manifold", manifold_name(rc.manifold)},
                           {"times_s", times_json(rc.times_s)},
                           {"phases", rc.phases_rad.size()},
                           {"dq_fraction", rc.dq_fraction}}}};
  if (rc.sequence) cfg["ramsey"]["sequence"] = seq::print_sequence(*rc.sequence);
  Run run("ramsey", s.out_dir, s.seed, cfg);
  const protocols::RamseyTable table = protocols::ramsey_scan(rc);
  run.write_csv("ramsey.csv", {"t_s", "contrast", "contrast_err"}, ramsey_rows(table));
  run.results() = t2_result(table, out, std::string("ramsey ") + (rc.sequence ? "custom" : manifold_name(rc.manifold)));
  run.write_manifest();
}

void cmd_dq_ramsey(const Flags& flags, std::ostream& out) {
  const Setup s = setup(flags);
  const Node root = s.node();
  protocols::RamseyConfig rc;
  rc.params = read_params(root);
  rc.field = read_field(root);
  rc.noise = read_noise(root, rc.params, NoisePreset::kCalibratedUnprotected);
  rc.draws = draws_of(flags, root, 2000);
  rc.seed = s.seed;
  rc.threads = flags.threads;
  const Node sec = root.child("dq");
  sec.allow({"times_protected_s", "times_unprotected_s", "phases", "dq_fraction"});
  const std::string mode = flags.mode ? *flags.mode : "both";
  if (mode != "both" && mode != "protected" && mode != "unprotected") {
    throw ConfigError("dq-ramsey mode must be both, protected or unprotected");
  }
  const auto protected_times = sec.numbers("times_protected_s", default_times(Manifold::kDqProtected));
  const auto unprotected_times = sec.numbers("times_unprotected_s", default_times(Manifold::kMsMinus1));
  rc.phases_rad = protocols::uniform_phases(phase_count(sec));
  rc.dq_fraction = sec.number("dq_fraction", 0.5);

  json cfg{{"params", to_json(rc.params)},
           {"field", to_json(rc.field)},
           {"noise", to_json(rc.noise)},
           {"draws", rc.draws},
           {"mode", mode},
           {"dq", json{{"times_protected_s", times_json(protected_times)},
                       {"times_unprotected_s", times_json(unprotected_times)},
                       {"phases", rc.phases_rad.size()},
                       {"dq_fraction", rc.dq_fraction}}}};
  Run run("dq-ramsey", s.out_dir, s.seed, cfg);
  if (mode != "unprotected") {
    protocols::RamseyConfig p = rc;
    p.manifold = Manifold::kDqProtected;
    p.times_s = protected_times;
    const protocols::DqResult res = protocols::dq_protected_ramsey(p);
    run.write_csv("dq_protected.csv", {"t_s", "contrast", "contrast_err"}, ramsey_rows(res.table));
    run.results()["protected"] = t2_result(res.table, out, "dq protected");
  }
  if (mode != "protected") {
    protocols::RamseyConfig u = rc;
    u.manifold = Manifold::kMsMinus1;
    u.times_s = unprotected_times;
    const protocols::RamseyTable table = protocols::ramsey_scan(u);
    run.write_csv("dq_unprotected.csv", {"t_s", "contrast", "contrast_err"}, ramsey_rows(table));
    run.results()["unprotected"] = t2_result(table, out, "ms-1 unprotected");
  }
  run.write_manifest();
}

void cmd_polarize(const Flags& flags, std::ostream& out) {
  const Setup s = setup(flags);
  const Node root = s.node();
  protocols::PolarizationConfig pc;
  pc.params = read_params(root);
  pc.field = read_field(root);
  const Node sec = root.child("polarize");
  sec.allow({"rounds", "finite_mw", "mw_rabi_hz", "cutoff_hz", "nuclear_fidelity"});
  pc.rounds = static_cast<std::size_t>(flags.rounds ? *flags.rounds : sec.count("rounds", pc.rounds));
  pc.finite_mw = sec.flag("finite_mw", pc.finite_mw);
  if (flags.mode) {
    if (*flags.mode != "ideal" && *flags.mode != "finite") throw ConfigError("polarize mode must be ideal or finite");
    pc.finite_mw = *flags.mode == "finite";
  }
  pc.mw_rabi_hz = sec.number("mw_rabi_hz", pc.mw_rabi_hz);
  pc.cutoff_hz = sec.number("cutoff_hz", pc.cutoff_hz);
  pc.nuclear_fidelity = sec.number("nuclear_fidelity", pc.nuclear_fidelity);
  if (pc.rounds < 1) throw ConfigError("polarize.rounds: need at least 1");

  json cfg{{"params", to_json(pc.params)},
           {"field", to_json(pc.field)},
           {"polarize", json{{"rounds", pc.rounds},
                             {"finite_mw", pc.finite_mw},
                             {"mw_rabi_hz", pc.mw_rabi_hz},
                             {"cutoff_hz", pc.cutoff_hz},
                             {"nuclear_fidelity", pc.nuclear_fidelity}}}};
  Run run("polarize", s.out_dir, s.seed, cfg);
  const protocols::PolarizationResult res = protocols::polarization_sequence(pc);
  std::vector<std::vector<double>> table;
  for (std::size_t r = 0; r < res.per_round.size(); ++r) {
    table.push_back({static_cast<double>(r + 1), res.per_round[r]});
  }
  run.write_csv("polarize.csv", {"round", "polarization"}, table);
  run.results() = json{{"polarization", res.polarization},
                       {"warnings", res.warnings},
                       {"sequence", res.sequence_text}};
  run.write_manifest();
  out << "polarize (" << (pc.finite_mw ? "finite" : "ideal") << " MW): P(mI=+1/2) = " << res.polarization
      << " after " << pc.rounds << " round(s)\n";
}

void cmd_tempshift(const Flags& flags, std::ostream& out) {
  const Setup s = setup(flags);
  const Node root = s.node();
  protocols::TemperatureConfig tc;
  tc.params = read_params(root);
  tc.field = read_field(root);
  tc.seed = s.seed;
  const Node sec = root.child("tempshift");
  sec.allow({"delta_t_k", "injected_dazz_dt_hz_per_k", "measurement_noise_hz"});
  tc.delta_t_k = sec.numbers("delta_t_k", tc.delta_t_k);
  tc.injected_dazz_dt_hz_per_k = sec.number("injected_dazz_dt_hz_per_k", tc.params.dazz_dt_hz_per_k);
  tc.measurement_noise_hz = flags.noise_hz ? *flags.noise_hz : sec.number("measurement_noise_hz", 10.0);
  if (tc.delta_t_k.size() < 3) throw ConfigError("tempshift.delta_t_k: need at least 3 temperatures");
  if (!(tc.measurement_noise_hz >= 0.0)) throw ConfigError("tempshift.measurement_noise_hz: must be >= 0");

  json cfg{{"params", to_json(tc.params)},
           {"field", to_json(tc.field)},
           {"tempshift", json{{"delta_t_k", tc.delta_t_k},
                              {"injected_dazz_dt_hz_per_k", tc.injected_dazz_dt_hz_per_k},
                              {"measurement_noise_hz", tc.measurement_noise_hz}}}};
  Run run("tempshift", s.out_dir, s.seed, cfg);
  const protocols::TemperatureResult res = protocols::temperature_roundtrip(tc);
  std::vector<std::vector<double>> table;
  for (std::size_t i = 0; i < tc.delta_t_k.size(); ++i) table.push_back({tc.delta_t_k[i], res.mean_frequency_hz[i]});
  run.write_csv("tempshift.csv", {"delta_t_k", "mean_frequency_hz"}, table);
  run.results() = json{{"slope_hz_per_k", res.slope_hz_per_k},
                       {"slope_err_hz_per_k", res.slope_err_hz_per_k},
                       {"intercept_hz", res.intercept_hz}};
  run.write_manifest();
  out << "tempshift: dAzz/dT = " << res.slope_hz_per_k << " +- " << res.slope_err_hz_per_k
      << " Hz/K (injected " << tc.injected_dazz_dt_hz_per_k << ")\n";
}

void cmd_gyro(const Flags& flags, std::ostream& out, std::ostream& err) {
  const Setup s = setup(flags);
  const Node root = s.node();
  const Node sec = root.child("gyro");
  sec.allow({"mode", "t_s", "dead_s", "repetitions", "pattern", "shot_noise_std", "readout_contrast",
             "readout_offset", "emulation", "calibration"});
  const std::string mode_name = flags.mode ? *flags.mode : sec.text("mode", "protected");
  if (mode_name != "protected" && mode_name != "unprotected") {
    throw ConfigError("gyro mode must be protected or unprotected");
  }
  protocols::GyroConfig gc = protocols::GyroConfig::defaults(
      mode_name == "protected" ? protocols::GyroMode::kProtected : protocols::GyroMode::kUnprotected);
  gc.params = read_params(root);
  gc.field = read_field(root);
  gc.noise = read_noise(root, gc.params, NoisePreset::kNone);
  gc.draws = draws_of(flags, root, 1);
  gc.seed = s.seed;
  gc.threads = flags.threads;
  gc.t_s = sec.number("t_s", gc.t_s);
  gc.dead_s = sec.number("dead_s", gc.dead_s);
  gc.repetitions = static_cast<std::size_t>(flags.repetitions ? *flags.repetitions
                                                              : sec.count("repetitions", gc.repetitions));
  gc.shot_noise_std = flags.shot_noise ? *flags.shot_noise : sec.number("shot_noise_std", 0.0);
  gc.readout_contrast = sec.number("readout_contrast", gc.readout_contrast);
  gc.readout_offset = sec.number("readout_offset", gc.readout_offset);
  const std::string emu_name = flags.emulation ? *flags.emulation : sec.text("emulation", "phase_mod");
  if (emu_name != "phase_mod" && emu_name != "iz_term") throw ConfigError("gyro emulation must be phase_mod or iz_term");
  const auto emulation = emu_name == "phase_mod" ? protocols::Emulation::kPhaseMod : protocols::Emulation::kIzTerm;

  if (const json* pattern = sec.raw("pattern")) {
    if (!pattern->is_array()) throw ConfigError("gyro.pattern: expected an array of segments");
    for (std::size_t i = 0; i < pattern->size(); ++i) {
      const Node seg(&(*pattern)[i], "gyro.pattern[" + std::to_string(i) + "]");
      seg.allow({"duration_s", "omega_dps"});
      gc.pattern.push_back({seg.number("duration_s", 0.0), seg.number("omega_dps", 0.0)});
    }
  } else {
    for (double w : {0.0, 500.0, 1000.0, 500.0, 0.0, -500.0, -1000.0, -500.0, 0.0}) {
      gc.pattern.push_back({30.0, w});
    }
  }
  if (sec.has("calibration")) {
    const Node c = sec.child("calibration");
    c.allow({"c0", "c", "phi0"});
    protocols::GyroCalibration cal;
    cal.c0 = c.number("c0", 0.0);
    cal.c = c.number("c", 0.0);
    cal.phi0 = c.number("phi0", 0.0);
    gc.calibration = cal;
  }
  try {
    gc.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("gyro: ") + e.what());
  }

  json pattern_json = json::array();
  for (const auto& seg : gc.pattern) pattern_json.push_back(json{{"duration_s", seg.duration_s}, {"omega_dps", seg.omega_dps}});
  json gyro_json{{"mode", mode_name},
                 {"t_s", gc.t_s},
                 {"dead_s", gc.dead_s},
                 {"repetitions", gc.repetitions},
                 {"pattern", pattern_json},
                 {"shot_noise_std", gc.shot_noise_std},
                 {"readout_contrast", gc.readout_contrast},
                 {"readout_offset", gc.readout_offset},
                 {"emulation", emu_name}};
  if (gc.calibration) {
    gyro_json["calibration"] = json{{"c0", gc.calibration->c0}, {"c", gc.calibration->c}, {"phi0", gc.calibration->phi0}};
  }
  json cfg{{"params", to_json(gc.params)},
           {"field", to_json(gc.field)},
           {"noise", to_json(gc.noise)},
           {"draws", gc.draws},
           {"gyro", gyro_json}};
  Run run("gyro", s.out_dir, s.seed, cfg);

  const protocols::GyroSeries series = protocols::gyro_run(gc, emulation);
  std::vector<std::vector<double>> table;
  std::vector<double> zero_rate;
  double sq = 0.0;
  for (const auto& p : series.points) {
    table.push_back({p.time_s, p.omega_set_dps, p.omega_rec_dps, p.s_plus, p.s_minus});
    const double e = p.omega_rec_dps - p.omega_set_dps;
    sq += e * e;
    if (p.omega_set_dps == 0.0) zero_rate.push_back(p.omega_rec_dps);
  }
  run.write_csv("gyro.csv", {"time_s", "omega_set_dps", "omega_rec_dps", "s_plus", "s_minus"}, table);

  const auto& cal = series.calibration;
  json results{{"points", series.points.size()},
               {"clamp_count", series.clamp_count},
               {"point_time_s", series.point_time_s},
               {"rms_error_dps", series.points.empty() ? 0.0 : std::sqrt(sq / static_cast<double>(series.points.size()))},
               {"predicted_sigma_dps", protocols::predicted_rate_sigma_dps(gc, cal)},
               {"calibration", json{{"c0", cal.c0}, {"c", cal.c}, {"phi0", cal.phi0},
                                    {"c0_err", cal.c0_err}, {"c_err", cal.c_err}, {"phi0_err", cal.phi0_err}}}};
  if (zero_rate.size() >= 30) {
    const protocols::ZeroBiasStats z = protocols::zero_bias_stats(zero_rate, series.point_time_s);
    results["zero_bias"] = json{{"mean_dps", z.mean_dps}, {"sigma_dps", z.sigma_dps}, {"count", z.count},
                                {"eta_a_dps_per_sqrt_hz", z.eta_a}, {"eta_b_dps_per_sqrt_hz", z.eta_b}};
    out << "gyro zero-bias: sigma = " << z.sigma_dps << " deg/s over " << z.count << " points\n";
  }
  run.results() = results;
  run.write_manifest();
  if (series.clamp_count > 0) {
    err << "warning: " << series.clamp_count << " point(s) outside the unambiguous range were clamped\n";
  }
  out << "gyro (" << mode_name << ", " << emu_name << "): " << series.points.size() << " points, point time "
      << series.point_time_s << " s, c = " << cal.c << "\n";
}

void cmd_seq_check(const Flags& flags, std::ostream& out) {
  seq::Sequence sequence = parse_named(read_text(flags.seq_file), flags.seq_file);
  seq::Bindings bindings;
  for (const std::string& b : flags.bindings) {
    const auto eq = b.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("binding '" + b + "' must be name=value");
    std::string name = b.substr(0, eq);
    if (name.front() == '$') name.erase(0, 1);
    const std::string value = b.substr(eq + 1);
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (value.empty() || end != value.c_str() + value.size()) {
      throw ConfigError("binding '" + b + "': value is not a number");
    }
    bindings[name] = v;
  }
  if (!flags.bindings.empty()) {
    try {
      sequence.resolve(bindings);
    } catch (const BindingError& e) {
      throw ConfigError(flags.seq_file + ": " + e.what());
    }
  }
  if (flags.print) out << seq::print_sequence(sequence);
  out << "ok: " << sequence.elements.size() << " elements, " << sequence.params.size() << " parameters\n";
}

}  // namespace nvgyro::cli
