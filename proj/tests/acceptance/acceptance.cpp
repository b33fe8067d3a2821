#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli.hpp"
#include "nvgyro/analysis.hpp"
#include "nvgyro/errors.hpp"
#include "nvgyro/executor.hpp"
#include "nvgyro/noise.hpp"
#include "nvgyro/protocols.hpp"
#include "nvgyro/sequence.hpp"
#include "nvgyro/spin_core.hpp"
#include "nvgyro/units.hpp"

namespace {

using namespace nvgyro;
using namespace nvgyro::protocols;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  const char* id;
  std::function<Outcome()> check;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::vector<double> spanning_times(double t2, std::size_t n) {
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(t2 * (0.1 + 2.4 * static_cast<double>(i) / static_cast<double>(n - 1)));
  }
  return out;
}

Outcome kappa() {
  const double k = spin::approx_alpha(spin::NVParams{}, 0).kappa;
  return {std::abs(k - 8.26) <= 0.01, fmt("kappa = %.4f (8.26 +- 0.01)", k)};
}

Outcome f_anchor() {
  const double f = spin::noise_enhancement_f(deg_to_rad(1.0), -15.52);
  return {std::abs(f - 4.17) <= 0.005, fmt("f(1 deg) = %.4f with alpha_0 = -15.52 (4.17 +- 0.005)", f)};
}

Outcome t2_prediction() {
  const double t = spin::predicted_t2n(spin::NVParams{}, 0.0, false);
  return {std::abs(t / 4.48e-3 - 1.0) <= 0.01, fmt("predicted T2n*(0) = %.4f ms (4.48 ms +- 1%%)", t * 1e3)};
}

Outcome monte_carlo_vs_closed_form() {
  const spin::NVParams params;
  std::ostringstream detail;
  bool pass = true;
  for (bool envelope : {false, true}) {
    const double target = envelope ? 2.80e-3 : 4.48e-3;
    RamseyConfig cfg;
    cfg.noise = noise::NoiseModel::magnetic_from(params);
    cfg.noise.t1e_envelope = envelope;
    cfg.draws = 2000;
    cfg.times_s = spanning_times(target, 8);
    const T2Estimate t2 = fit_t2n(ramsey_scan(cfg));
    const double dev = t2.t2_s / target - 1.0;
    pass = pass && std::abs(dev) <= 0.05;
    detail << (envelope ? "; with T1e " : "without T1e ") << fmt("%.3f ms (%+.1f%%", t2.t2_s * 1e3, dev * 100)
           << (envelope ? " vs 2.80 ms)" : " vs 4.48 ms)");
  }
  return {pass, detail.str() + ", limit 5%"};
}

Outcome misalignment() {
  MisalignmentConfig cfg;
  cfg.angles_deg = {0.5, 1.0, 2.0, 3.0, 5.0};
  cfg.noise = noise::NoiseModel::magnetic_from(cfg.params);
  cfg.noise.t1e_envelope = true;
  cfg.draws = 2000;
  std::ostringstream detail;
  bool pass = true;
  for (const MisalignmentRow& r : misalignment_sweep(cfg)) {
    const double freq_dev = r.omega_n_cf_hz / r.omega_n_exact_hz - 1.0;
    const double t2_dev = r.sim_ok ? r.t2n_sim_s / r.t2n_pred_t1e_s - 1.0 : NAN;
    const bool ok = std::abs(freq_dev) <= 0.01 && r.sim_ok && std::abs(t2_dev) <= 0.10;
    pass = pass && ok;
    detail << fmt("%g deg: ", r.theta_deg) << fmt("omega %+.3f%%, ", freq_dev * 100) << fmt("T2 %+.1f%%", t2_dev * 100)
           << (ok ? "" : " [out]") << "; ";
  }
  detail << "limits omega 1%, T2 10%";
  return {pass, detail.str()};
}

Outcome dq_cancellation() {
  const spin::NVParams params;
  RamseyConfig base;
  base.times_s = {2.2e-3};
  base.draws = 2000;
  base.noise = GyroConfig::no_noise();
  base.manifold = Manifold::kDqProtected;
  base.draws = 1;
  const double noiseless = dq_protected_ramsey(base).table.points.at(0).contrast;
  std::ostringstream detail;
  bool pass = true;
  base.draws = 2000;
  for (double hwhm : {1e3, 5e3}) {
    base.noise.temperature = {noise::Distribution::kLorentzian, hwhm / std::abs(base.noise.dazz_dt_hz_per_k)};
    const double ratio = dq_protected_ramsey(base).table.points.at(0).contrast / noiseless;
    pass = pass && ratio >= 0.99;
    detail << fmt("DQ at 2.2 ms, dA_zz HWHM %g kHz: ", hwhm * 1e-3) << fmt("%.4f of noiseless (>= 0.99); ", ratio);
  }
  RamseyConfig unprot;
  unprot.manifold = Manifold::kMsMinus1;
  unprot.noise = calibrated_unprotected_scenario(params);
  unprot.times_s = {1.5e-3};
  unprot.draws = 40000;
  const double c = ramsey_scan(unprot).points.at(0).contrast / noiseless;
  pass = pass && c < 0.01;
  detail << fmt("unprotected at 1.5 ms: %.4f of noiseless (< 0.01)", c);
  return {pass, detail.str()};
}

Outcome protected_bracket() {
  RamseyConfig cfg;
  cfg.manifold = Manifold::kDqProtected;
  cfg.noise = calibrated_unprotected_scenario(cfg.params);
  cfg.noise.t1e_envelope = true;
  cfg.draws = 2000;
  cfg.times_s = {0.3e-3, 0.6e-3, 1.2e-3, 2e-3, 3e-3, 4e-3, 5.5e-3, 7e-3};
  const DqResult r = dq_protected_ramsey(cfg);
  if (!r.t2) return {false, "T2 fit failed: " + r.fit_error};
  const double t = r.t2->t2_s;
  return {t >= 2.4e-3 && t <= 4.4e-3, fmt("DQ-protected T2n* = %.3f ms (bracket [2.4, 4.4] ms)", t * 1e3)};
}

Outcome rotation_equivalence() {
  const GyroConfig cfg = GyroConfig::defaults(GyroMode::kProtected);
  double worst = 0.0;
  for (int k = -10; k <= 10; ++k) {
    const double w = deg_to_rad(100.0 * k);
    for (double phi : uniform_phases(6)) {
      worst = std::max(worst, std::abs(gyro_signal(cfg, Emulation::kPhaseMod, phi, w) -
                                       gyro_signal(cfg, Emulation::kIzTerm, phi, w)));
    }
  }
  return {worst <= 1e-9, fmt("max |phase_mod - iz_term| = %.2e over +-1000 deg/s (<= 1e-9)", worst)};
}

double zero_bias_sigma(GyroConfig cfg, std::size_t points) {
  cfg.pattern = {{cfg.point_time_s() * static_cast<double>(points), 0.0}};
  std::vector<double> rates;
  for (const GyroPoint& p : gyro_run(cfg).points) rates.push_back(p.omega_rec_dps);
  return zero_bias_stats(rates, cfg.point_time_s()).sigma_dps;
}

Outcome gyro_statistics() {
  constexpr double kShot = 0.3;
  std::ostringstream detail;
  bool pass = true;

  GyroConfig prot = GyroConfig::defaults(GyroMode::kProtected);
  prot.calibration = calibrate_gyro(prot);
  prot.shot_noise_std = kShot;
  std::vector<double> sigma;
  const std::vector<std::size_t> reps{100, 400, 1600};
  for (std::size_t r : reps) {
    GyroConfig c = prot;
    c.repetitions = r;
    c.seed = 1000 + r;
    sigma.push_back(zero_bias_sigma(c, 1500));
  }
  double worst = 0.0;
  for (std::size_t i = 1; i < reps.size(); ++i) {
    const double expected = std::sqrt(static_cast<double>(reps[i]) / static_cast<double>(reps[0]));
    worst = std::max(worst, std::abs(sigma[0] / sigma[i] / expected - 1.0));
  }
  pass = pass && worst <= 0.10;
  detail << fmt("(a) sigma %.1f/%.1f", sigma[0], sigma[1]) << fmt("/%.1f deg/s, worst 1/sqrt(reps) deviation %.1f%% (<= 10%%); ", sigma[2], worst * 100);

  GyroConfig unprot = GyroConfig::defaults(GyroMode::kUnprotected);
  unprot.calibration = calibrate_gyro(unprot);
  unprot.shot_noise_std = kShot;
  unprot.seed = 77;
  prot.seed = 78;
  const double ratio = zero_bias_sigma(unprot, 1500) / zero_bias_sigma(prot, 1500);
  pass = pass && ratio >= 6.0 && ratio <= 12.0;
  detail << fmt("(b) unprotected/protected sigma %.2f (in [6, 12]); ", ratio);

  GyroConfig drift = GyroConfig::defaults(GyroMode::kProtected);
  drift.calibration = calibrate_gyro(drift);
  for (double w : {0.0, 500.0, 1000.0, 500.0, 0.0, -500.0, -1000.0, -500.0, 0.0}) drift.pattern.push_back({30.0, w});
  const GyroSeries clean = gyro_run(drift);
  drift.noise.drift.offset_amplitude = 0.1 * drift.calibration->c0;
  const GyroSeries drifted = gyro_run(drift);
  double moved = 0.0;
  for (std::size_t i = 0; i < clean.points.size(); ++i) {
    moved = std::max(moved, std::abs(drifted.points[i].omega_rec_dps - clean.points[i].omega_rec_dps));
  }
  const double fraction = moved / 1000.0;
  pass = pass && fraction < 1e-3;
  detail << fmt("(c) +-10%% c0 drift moves the rate by %.2e of 1000 deg/s full scale (< 1e-3)", fraction);
  return {pass, detail.str()};
}

Outcome gslac() {
  const spin::NVParams params;
  const double limit = gslac_alpha_limit(params);
  const double peak = max_abs_alpha(enhancement_sweep(params, 1500.0, 1501));
  const double dev = peak / limit - 1.0;
  return {std::abs(dev) <= 0.02, fmt("max |alpha| = %.1f vs limit %.1f", peak, limit) + fmt(" (%+.2f%%, within 2%%)", dev * 100)};
}

Outcome temperature() {
  TemperatureConfig cfg;
  cfg.measurement_noise_hz = 10.0;
  const TemperatureResult r = temperature_roundtrip(cfg);
  return {std::abs(r.slope_hz_per_k + 272.0) <= 8.0,
          fmt("slope = %.2f +- %.2f Hz/K (-272 +- 8 Hz/K)", r.slope_hz_per_k, r.slope_err_hz_per_k)};
}

Outcome polarization() {
  PolarizationConfig ideal;
  ideal.rounds = 1;
  const double p_ideal = polarization_sequence(ideal).polarization;
  PolarizationConfig finite;
  finite.rounds = 2;
  finite.finite_mw = true;
  double best = 0.0;
  for (double p : polarization_sequence(finite).per_round) best = std::max(best, p);
  return {p_ideal >= 0.999 && best >= 0.96,
          fmt("ideal one round %.6f (>= 0.999); finite 1 MHz best round %.4f (>= 0.96)", p_ideal, best)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool same_cli_outputs(const std::vector<std::string>& args, const std::vector<std::string>& files,
                      std::string& why) {
  const fs::path root = fs::temp_directory_path() / "nvgyro_acceptance";
  std::vector<std::string> content[2];
  for (int k = 0; k < 2; ++k) {
    const fs::path dir = root / std::to_string(k);
    fs::remove_all(dir);
    std::vector<std::string> a = args;
    a.push_back("--out");
    a.push_back(dir.string());
    std::ostringstream out, err;
    if (cli::run(a, out, err) != 0) {
      why = args.front() + " failed: " + err.str();
      return false;
    }
    for (const auto& f : files) content[k].push_back(slurp(dir / f));
  }
  fs::remove_all(root);
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (content[0][i].empty() || content[0][i] != content[1][i]) {
      why = args.front() + ": " + files[i] + " differs between runs";
      return false;
    }
  }
  return true;
}

Outcome infrastructure() {
  std::ostringstream detail;
  std::string why;
  bool repro = same_cli_outputs({"enhancement", "--points", "200"}, {"enhancement.csv", "manifest.json"}, why) &&
               same_cli_outputs({"ramsey", "--draws", "64", "--seed", "9"}, {"ramsey.csv", "manifest.json"}, why) &&
               same_cli_outputs({"gyro", "--mode", "unprotected", "--shot-noise", "0.2", "--reps", "50"},
                                {"gyro.csv", "manifest.json"}, why);
  detail << (repro ? "byte-identical reruns; " : why + "; ");

  std::size_t golden = 0, golden_bad = 0;
  for (const auto& e : fs::directory_iterator(fs::path(NVGYRO_TEST_DATA) / "golden")) {
    if (e.path().extension() != ".seq") continue;
    ++golden;
    const std::string expected = slurp(fs::path(e.path()).replace_extension(".expected"));
    const auto s = seq::parse_sequence(slurp(e.path()));
    if (seq::print_sequence(s) != expected || !(seq::parse_sequence(expected) == s)) ++golden_bad;
  }
  for (const auto& e : fs::directory_iterator(fs::path(NVGYRO_TEST_DATA) / "errors")) {
    if (e.path().extension() != ".seq") continue;
    ++golden;
    std::string expected = slurp(fs::path(e.path()).replace_extension(".expected"));
    while (!expected.empty() && expected.back() == '\n') expected.pop_back();
    try {
      seq::parse_sequence(slurp(e.path()));
      ++golden_bad;
    } catch (const ParseError& err) {
      if (expected != err.what()) ++golden_bad;
    }
  }
  detail << golden - golden_bad << "/" << golden << " parser golden files; ";

  const spin::NVParams params;
  const spin::FieldVector field{239.0, deg_to_rad(3.0), 0.4};
  const seq::Executor exec(params, field);
  noise::NoiseModel model = noise::NoiseModel::magnetic_from(params);
  model.temperature = {noise::Distribution::kLorentzian, 10.0};
  double worst = 0.0;
  const auto& dq = ramsey_sequence(Manifold::kDqProtected);
  const auto& ms0 = ramsey_sequence(Manifold::kMs0);
  for (std::uint64_t i = 0; i < 200; ++i) {
    const auto ctx = exec.prepare(noise::sample(model, 21, i));
    const double t = 1e-4 * static_cast<double>(i % 50 + 1);
    for (const auto* s : {&dq, &ms0}) {
      const auto r = exec.run(*s, ctx, {{"t", t}, {"phi", 0.1 * static_cast<double>(i)}});
      worst = std::max({worst, r.state.trace_error(), r.state.hermiticity_error(), -r.state.min_eigenvalue()});
    }
    const auto u = spin::propagator(spin::build_hamiltonian(params, field), t).matrix();
    worst = std::max(worst, (u.adjoint() * u - spin::Matrix6c::Identity()).cwiseAbs().maxCoeff());
  }
  const bool physical = worst <= seq::kStateTolerance;
  detail << fmt("worst trace/Hermiticity/positivity/unitarity error %.1e (<= 1e-10)", worst);
  return {repro && golden_bad == 0 && golden > 0 && physical, detail.str()};
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {"kappa", kappa},
      {"noise_enhancement_anchor", f_anchor},
      {"dephasing_prediction", t2_prediction},
      {"monte_carlo_vs_closed_form", monte_carlo_vs_closed_form},
      {"misalignment_consistency", misalignment},
      {"dq_cancellation", dq_cancellation},
      {"protected_bracket", protected_bracket},
      {"rotation_emulation_equivalence", rotation_equivalence},
      {"gyro_statistics", gyro_statistics},
      {"gslac_limit", gslac},
      {"temperature_round_trip", temperature},
      {"polarization", polarization},
      {"infrastructure", infrastructure},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks: one PASS/FAIL line per criterion"};
  std::vector<std::string> only;
  bool list = false;
  app.add_option("--only", only, "Run only these criterion ids");
  app.add_flag("--list", list, "Print the criterion ids and exit");
  CLI11_PARSE(app, argc, argv);

  if (list) {
    for (const auto& c : criteria()) std::cout << c.id << "\n";
    return 0;
  }
  for (const auto& id : only) {
    bool known = false;
    for (const auto& c : criteria()) known = known || id == c.id;
    if (!known) {
      std::cerr << "unknown criterion '" << id << "'\n";
      return 2;
    }
  }

  int failures = 0;
  for (const auto& c : criteria()) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (o.pass ? "PASS " : "FAIL ") << c.id << ": " << o.detail << fmt(" [%.1f s]", secs) << std::endl;
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
