#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nvgyro/executor.hpp"
#include "nvgyro/noise.hpp"
#include "nvgyro/sequence.hpp"
#include "nvgyro/spin_core.hpp"

namespace nvgyro::protocols {

// ------------------------------------------------------------------ Ramsey

enum class Manifold { kMs0, kMsMinus1, kDqProtected };

// DSL source of the Ramsey sequence for a manifold. Parameters: $t
// (evolution), $phi (last pi/2 phase) and, for the DQ sequence, $frac (DQ
// position as a fraction of t, default 0.5).
std::string ramsey_sequence_text(Manifold manifold);
const seq::Sequence& ramsey_sequence(Manifold manifold);

// n phases uniformly covering [0, 2 pi).
std::vector<double> uniform_phases(std::size_t n = 12);

struct RamseyConfig {
  Manifold manifold = Manifold::kMs0;
  std::vector<double> times_s;
  std::vector<double> phases_rad = uniform_phases();
  spin::NVParams params;
  spin::FieldVector field;
  noise::NoiseModel noise;
  std::size_t draws = 2000;
  std::uint64_t seed = 0;
  double dq_fraction = 0.5;
  std::size_t threads = 0;
  // Replaces the manifold's built-in sequence. Must declare $t and $phi;
  // $frac is bound to dq_fraction when declared.
  std::optional<seq::Sequence> sequence;

  // >= 6 phases, strictly increasing non-negative times, draws >= 1.
  void validate() const;
};

struct RamseyPoint {
  double t_s = 0.0;
  double contrast = 0.0;
  double contrast_err = 0.0;  // spread of per-batch fits
  double offset = 0.0;
  double phase = 0.0;
  bool fit_ok = true;
  std::string fit_warning;
};

struct RamseyTable {
  std::vector<RamseyPoint> points;
};

// Ensemble-averaged phase sweep per time, fitted to c0 + c cos(phi - phi0).
// With the T1e envelope on, the coherence part of every draw (signal minus
// its phase average) is damped. Fit failures are recorded per point.
RamseyTable ramsey_scan(const RamseyConfig& cfg);

struct T2Estimate {
  double t2_s = 0.0;
  double t2_err_s = 0.0;
  double amplitude = 0.0;
};

// c(t) = a exp(-t/T) over points with a successful contrast fit.
T2Estimate fit_t2n(const RamseyTable& table);

// -------------------------------------------------------- misalignment

struct MisalignmentConfig {
  std::vector<double> angles_deg{0.0, 0.5, 1.0, 2.0, 3.0, 5.0};
  spin::NVParams params;
  double field_g = 239.0;
  noise::NoiseModel noise;
  std::size_t draws = 2000;
  std::uint64_t seed = 0;
  // Evolution times per angle span [0.1, 2.5] x the predicted T2n*.
  std::size_t times_per_angle = 8;
  std::vector<double> phases_rad = uniform_phases();
  std::size_t threads = 0;
  bool simulate = true;
};

struct MisalignmentRow {
  double theta_deg = 0.0;
  double omega_n_exact_hz = 0.0;
  double omega_n_cf_hz = 0.0;
  double t2n_sim_s = 0.0;
  double t2n_sim_err_s = 0.0;
  double t2n_pred_s = 0.0;
  double t2n_pred_t1e_s = 0.0;
  bool sim_ok = false;
};

// Closed forms use the exact alpha_0 at the longitudinal field B cos(theta).
std::vector<MisalignmentRow> misalignment_sweep(const MisalignmentConfig& cfg);

// Inverse of the exact m_S = 0 nuclear frequency in theta (monotone on
// [0, 90 deg]) by bisection. Throws InvalidArgument outside the range.
double misalignment_from_frequency(const spin::NVParams& params, double field_g,
                                   double omega_n_hz);

// --------------------------------------------------------------- DQ

struct DqResult {
  RamseyTable table;
  std::optional<T2Estimate> t2;
  std::string fit_error;
};

DqResult dq_protected_ramsey(RamseyConfig cfg);

// Temperature spread giving an unprotected (m_S = -1) exponential decay time
// of `t2_s`: HWHM dA = 1/(2 pi T2), dT = dA/|dA_zz/dT|. Magnetic spreads from
// T2e*, envelope off.
noise::NoiseModel calibrated_unprotected_scenario(const spin::NVParams& params, double t2_s = 200e-6);

// ------------------------------------------------------------ polarization

struct PolarizationConfig {
  std::size_t rounds = 2;
  bool finite_mw = false;
  double mw_rabi_hz = 1e6;
  double cutoff_hz = 100e6;
  double nuclear_fidelity = 1.0;
  spin::NVParams params;
  spin::FieldVector field;
};

struct PolarizationResult {
  double polarization = 0.5;  // P(m_I = +1/2) after the last round
  std::vector<double> per_round;
  std::string sequence_text;
  std::vector<std::string> warnings;
};

// Selective MW pi on (0,-1/2) -> (-1,-1/2), RF pi in m_S = -1, laser reset;
// starting from |0> (x) maximally mixed nucleus.
std::string polarization_sequence_text(const PolarizationConfig& cfg, std::size_t rounds);
PolarizationResult polarization_sequence(const PolarizationConfig& cfg);

// ------------------------------------------------------------ temperature

struct TemperatureConfig {
  std::vector<double> delta_t_k{-15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0};
  double injected_dazz_dt_hz_per_k = -272.0;
  double measurement_noise_hz = 0.0;
  std::uint64_t seed = 0;
  spin::NVParams params;
  spin::FieldVector field;
};

struct TemperatureResult {
  double slope_hz_per_k = 0.0;
  double slope_err_hz_per_k = 0.0;
  double intercept_hz = 0.0;
  std::vector<double> mean_frequency_hz;  // (omega(+1) + omega(-1)) / 2 per point
};

TemperatureResult temperature_roundtrip(const TemperatureConfig& cfg);

// ------------------------------------------------------------------ gyro

enum class GyroMode { kProtected, kUnprotected };
enum class Emulation { kPhaseMod, kIzTerm };

struct RateSegment {
  double duration_s = 0.0;
  double omega_dps = 0.0;
};

struct GyroCalibration {
  double c0 = 0.0;
  double c = 0.0;
  double phi0 = 0.0;
  double c0_err = 0.0;
  double c_err = 0.0;
  double phi0_err = 0.0;
};

struct GyroConfig {
  GyroMode mode = GyroMode::kProtected;
  double t_s = 2.2e-3;
  double dead_s = 1.8e-3;
  std::size_t repetitions = 400;
  std::vector<RateSegment> pattern;
  // Per-shot readout: contrast/offset of the photoluminescence map and the
  // single-shot noise std (a point averages `repetitions` shots).
  double readout_contrast = 1.0;
  double readout_offset = 0.0;
  double shot_noise_std = 0.0;
  spin::NVParams params;
  spin::FieldVector field;
  noise::NoiseModel noise = no_noise();
  std::size_t draws = 1;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  std::optional<GyroCalibration> calibration;

  // Gyroscope timings: protected 2.2 ms / 1.8 ms / 400, unprotected 0.2 ms /
  // 1.25 ms / 690.
  static GyroConfig defaults(GyroMode mode);
  static noise::NoiseModel no_noise();

  // Two Ramsey measurements (phi and phi + pi) of `repetitions` shots each.
  double point_time_s() const { return 2.0 * static_cast<double>(repetitions) * (t_s + dead_s); }
  void validate() const;
};

// Phase sweep at zero rotation fitted to c0 + c cos(phi - phi0). Throws
// FitError when c falls below min_contrast.
GyroCalibration calibrate_gyro(const GyroConfig& cfg, std::size_t n_phases = 12,
                               double min_contrast = 1e-2);

struct GyroPoint {
  double time_s = 0.0;
  double omega_set_dps = 0.0;
  double omega_rec_dps = 0.0;
  double s_plus = 0.0;
  double s_minus = 0.0;
  bool clamped = false;
};

struct GyroSeries {
  std::vector<GyroPoint> points;
  std::size_t clamp_count = 0;
  double point_time_s = 0.0;
  GyroCalibration calibration;
};

// Runs the 2-Ramsey pair per pattern point and reconstructs
// Omega = asin(clamp((S+ - S-)/(2c)))/t. Uses cfg.calibration, or calibrates
// first when absent.
GyroSeries gyro_run(const GyroConfig& cfg, Emulation emulation = Emulation::kPhaseMod);

// Noise-averaged readout of one Ramsey measurement with last-pulse phase phi
// at rotation omega (rad/s) and an optional global hyperfine offset. No shot
// noise.
double gyro_signal(const GyroConfig& cfg, Emulation emulation, double phi, double omega_rad_s,
                   double global_dazz_hz = 0.0, double drift_offset = 0.0);

// sigma_Omega = sigma_S / (2 c t cos(Omega t)) with sigma_S the std of
// S+ - S-, in deg/s.
double predicted_rate_sigma_dps(const GyroConfig& cfg, const GyroCalibration& cal,
                                double omega_dps = 0.0);

struct ZeroBiasStats {
  double mean_dps = 0.0;
  double sigma_dps = 0.0;
  std::size_t count = 0;
  // eta_a = sigma sqrt(T_point); eta_b = sigma / sqrt(2) * sqrt(T_point / 2 s).
  double eta_a = 0.0;
  double eta_b = 0.0;
};

ZeroBiasStats zero_bias_stats(const std::vector<double>& samples_dps, double point_time_s);

// ----------------------------------------------------------- enhancement

enum class SweepAxis { kZ, kX };

struct EnhancementRow {
  double b_g = 0.0;
  double alpha_p1 = 0.0;
  double alpha_0 = 0.0;
  double alpha_m1 = 0.0;
};

// Axis z: closed-form factors on a uniform grid plus refinement points where
// the theta- denominator equals +-2 A_perp x {1, 0.1, 0.01, 0.001}; points in
// the guard band are skipped. Axis x: |alpha| from exact diagonalization,
// sqrt(omega(B)^2 - omega(0)^2) / (gamma_n B), B > 0.
std::vector<EnhancementRow> enhancement_sweep(const spin::NVParams& params, double b_max_g,
                                              std::size_t points, SweepAxis axis = SweepAxis::kZ);

double max_abs_alpha(const std::vector<EnhancementRow>& rows);

// gamma_e / (sqrt(2) gamma_n).
double gslac_alpha_limit(const spin::NVParams& params);

}  // namespace nvgyro::protocols
