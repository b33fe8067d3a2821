#include <algorithm>
#include <cmath>

#include "nvgyro/analysis.hpp"
#include "nvgyro/errors.hpp"
#include "nvgyro/protocols.hpp"
#include "nvgyro/units.hpp"

namespace nvgyro::protocols {
namespace {

Manifold manifold_for(GyroMode mode) {
  return mode == GyroMode::kProtected ? Manifold::kDqProtected : Manifold::kMsMinus1;
}

double shot_noise(const GyroConfig& cfg, std::uint64_t stream, std::uint64_t index) {
  if (cfg.shot_noise_std == 0.0) return 0.0;
  noise::CounterRng rng(cfg.seed, index, stream);
  return rng.normal() * cfg.shot_noise_std / std::sqrt(static_cast<double>(cfg.repetitions));
}

}  // namespace

noise::NoiseModel GyroConfig::no_noise() {
  noise::NoiseModel model;
  model.b_z = model.b_x = model.b_y = {noise::Distribution::kNone, 0.0};
  model.temperature = {noise::Distribution::kNone, 0.0};
  return model;
}

GyroConfig GyroConfig::defaults(GyroMode mode) {
  GyroConfig cfg;
  cfg.mode = mode;
  if (mode == GyroMode::kProtected) {
    cfg.t_s = 2.2e-3;
    cfg.dead_s = 1.8e-3;
    cfg.repetitions = 400;
  } else {
    cfg.t_s = 0.2e-3;
    cfg.dead_s = 1.25e-3;
    cfg.repetitions = 690;
  }
  return cfg;
}

void GyroConfig::validate() const {
  if (!(t_s > 0.0) || !(dead_s > 0.0)) throw InvalidArgument("gyro t and dead time must be > 0");
  if (repetitions < 1) throw InvalidArgument("gyro needs at least one repetition");
  if (draws < 1) throw InvalidArgument("gyro needs at least one noise draw");
  if (!(shot_noise_std >= 0.0)) throw InvalidArgument("shot noise std must be >= 0");
  for (const RateSegment& s : pattern) {
    if (!(s.duration_s > 0.0) || !std::isfinite(s.omega_dps)) {
      throw InvalidArgument("rate segments need a positive duration and finite rate");
    }
  }
  if (calibration && !(calibration->c > 0.0)) throw InvalidArgument("calibration contrast must be > 0");
  params.validate();
  field.validate();
  noise.validate();
}

double gyro_signal(const GyroConfig& cfg, Emulation emulation, double phi, double omega_rad_s,
                   double global_dazz_hz, double drift_offset) {
  const seq::Sequence& sequence = ramsey_sequence(manifold_for(cfg.mode));
  const seq::Executor exec(cfg.params, cfg.field);
  const bool iz = emulation == Emulation::kIzTerm;
  const double last_phase = iz ? phi : phi + omega_rad_s * cfg.t_s;

  const noise::ExperimentFn experiment = [&](const noise::NoiseDraw& draw, std::size_t) {
    noise::NoiseDraw d = draw;
    d.d_azz_hz += global_dazz_hz;
    const seq::DrawContext ctx = exec.prepare(d, iz ? omega_rad_s : 0.0);
    seq::Bindings b{{"t", cfg.t_s}, {"phi", last_phase}};
    const double value = exec.run(sequence, ctx, b).readout;
    double baseline = 0.0;
    if (cfg.noise.t1e_envelope) {
      b["phi"] = last_phase + kPi;
      baseline = 0.5 * (value + exec.run(sequence, ctx, b).readout);
    }
    return noise::SignalTable{{cfg.t_s, value, baseline}};
  };
  noise::EnsembleOptions opts;
  opts.threads = cfg.threads;
  opts.t1e_s = cfg.params.t1e_s;
  const double population =
      noise::ensemble_average(experiment, cfg.noise, cfg.draws, cfg.seed, opts).mean.front().value;
  return cfg.readout_offset + cfg.readout_contrast * population + drift_offset;
}

GyroCalibration calibrate_gyro(const GyroConfig& cfg, std::size_t n_phases, double min_contrast) {
  cfg.validate();
  const std::vector<double> phases = uniform_phases(n_phases);
  std::vector<double> signal;
  for (std::size_t i = 0; i < phases.size(); ++i) {
    signal.push_back(gyro_signal(cfg, Emulation::kPhaseMod, phases[i], 0.0) +
                     shot_noise(cfg, noise::streams::kMeasurement, i));
  }
  const analysis::FitResult fit = analysis::fit_sinusoid(phases, signal);
  GyroCalibration cal;
  cal.c0 = fit.params[analysis::sinusoid::kOffset];
  cal.c = fit.params[analysis::sinusoid::kContrast];
  cal.phi0 = fit.params[analysis::sinusoid::kPhase];
  cal.c0_err = fit.std_errors[analysis::sinusoid::kOffset];
  cal.c_err = fit.std_errors[analysis::sinusoid::kContrast];
  cal.phi0_err = fit.std_errors[analysis::sinusoid::kPhase];
  if (!(cal.c >= min_contrast)) {
    throw FitError("calibration contrast " + std::to_string(cal.c) + " below threshold " +
                   std::to_string(min_contrast));
  }
  return cal;
}

GyroSeries gyro_run(const GyroConfig& cfg, Emulation emulation) {
  cfg.validate();
  GyroSeries series;
  series.calibration = cfg.calibration ? *cfg.calibration : calibrate_gyro(cfg);
  series.point_time_s = cfg.point_time_s();
  const GyroCalibration& cal = series.calibration;
  const double phi_base = cal.phi0 - kPi / 2.0;

  double clock = 0.0;
  std::uint64_t index = 0;
  for (const RateSegment& seg : cfg.pattern) {
    const auto n = static_cast<std::size_t>(std::max(1.0, std::round(seg.duration_s / series.point_time_s)));
    const double omega = deg_to_rad(seg.omega_dps);
    for (std::size_t k = 0; k < n; ++k, ++index) {
      // The S+ and S- shots of a point are interleaved, so both see the
      // same value of the slow drifts.
      const double dazz = cfg.noise.dazz_dt_hz_per_k * noise::drift_temperature(cfg.noise, cfg.seed, clock);
      const double offset = noise::drift_offset(cfg.noise, cfg.seed, clock);
      const auto measure = [&](double phi, std::uint64_t noise_index) {
        return gyro_signal(cfg, emulation, phi, omega, dazz, offset) +
               shot_noise(cfg, noise::streams::kShotNoise, noise_index);
      };
      GyroPoint p;
      p.time_s = clock;
      p.omega_set_dps = seg.omega_dps;
      p.s_plus = measure(phi_base, 2 * index);
      p.s_minus = measure(phi_base + kPi, 2 * index + 1);
      double x = (p.s_plus - p.s_minus) / (2.0 * cal.c);
      if (x > 1.0 || x < -1.0) {
        x = std::clamp(x, -1.0, 1.0);
        p.clamped = true;
        ++series.clamp_count;
      }
      p.omega_rec_dps = rad_to_deg(std::asin(x) / cfg.t_s);
      series.points.push_back(p);
      clock += series.point_time_s;
    }
  }
  return series;
}

double predicted_rate_sigma_dps(const GyroConfig& cfg, const GyroCalibration& cal, double omega_dps) {
  const double sigma_diff = std::sqrt(2.0) * cfg.shot_noise_std / std::sqrt(static_cast<double>(cfg.repetitions));
  const double slope = 2.0 * cal.c * cfg.t_s * std::cos(deg_to_rad(omega_dps) * cfg.t_s);
  return rad_to_deg(sigma_diff / slope);
}

ZeroBiasStats zero_bias_stats(const std::vector<double>& samples_dps, double point_time_s) {
  if (samples_dps.size() < 30) throw InvalidArgument("zero-bias statistics need >= 30 samples");
  if (!(point_time_s > 0.0)) throw InvalidArgument("point time must be > 0");
  const analysis::SummaryStats s = analysis::summary_stats(samples_dps);
  ZeroBiasStats z;
  z.mean_dps = s.mean;
  z.sigma_dps = s.std;
  z.count = s.count;
  z.eta_a = s.std * std::sqrt(point_time_s);
  z.eta_b = s.std / std::sqrt(2.0) * std::sqrt(point_time_s / 2.0);
  return z;
}

}  // namespace nvgyro::protocols
