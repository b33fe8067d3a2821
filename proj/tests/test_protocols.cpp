#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "nvgyro/analysis.hpp"
#include "nvgyro/errors.hpp"
#include "nvgyro/protocols.hpp"
#include "nvgyro/units.hpp"

namespace {

using namespace nvgyro;
using namespace nvgyro::protocols;

TEST(Ramsey, NoiselessContrastIsConstant) {
  RamseyConfig cfg;
  cfg.times_s = {0.0, 1e-3, 2e-3, 5e-3};
  cfg.draws = 1;
  const RamseyTable table = ramsey_scan(cfg);
  ASSERT_EQ(table.points.size(), 4u);
  for (const RamseyPoint& p : table.points) {
    EXPECT_TRUE(p.fit_ok);
    EXPECT_NEAR(p.contrast, 0.5, 1e-5);
    EXPECT_NEAR(p.offset, 0.5, 1e-5);
  }
}

TEST(Ramsey, ConfigValidation) {
  RamseyConfig cfg;
  cfg.times_s = {1e-3, 1e-3};
  EXPECT_THROW(ramsey_scan(cfg), InvalidArgument);
  cfg.times_s = {1e-3};
  cfg.phases_rad = uniform_phases(5);
  EXPECT_THROW(ramsey_scan(cfg), InvalidArgument);
  cfg.phases_rad = uniform_phases();
  cfg.sequence = seq::parse_sequence("param t\nevolve $t\nreadout\n");
  EXPECT_THROW(ramsey_scan(cfg), InvalidArgument);
}

TEST(Ramsey, CustomSequenceMatchesBuiltin) {
  RamseyConfig cfg;
  cfg.times_s = {0.5e-3, 2e-3};
  cfg.noise = noise::NoiseModel::magnetic_from(cfg.params);
  cfg.draws = 64;
  const RamseyTable builtin = ramsey_scan(cfg);
  cfg.sequence = seq::parse_sequence(ramsey_sequence_text(Manifold::kMs0));
  const RamseyTable custom = ramsey_scan(cfg);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(custom.points[i].contrast, builtin.points[i].contrast);
}

TEST(Ramsey, UnprotectedScenarioDecaysNear200us) {
  RamseyConfig cfg;
  cfg.manifold = Manifold::kMsMinus1;
  cfg.noise = calibrated_unprotected_scenario(cfg.params);
  cfg.times_s = {25e-6, 75e-6, 150e-6, 250e-6, 400e-6};
  cfg.draws = 4000;
  cfg.seed = 11;
  const T2Estimate t2 = fit_t2n(ramsey_scan(cfg));
  EXPECT_NEAR(t2.t2_s, 200e-6, 20e-6);
}

TEST(DqRamsey, DisplacedFlipLosesContrast) {
  RamseyConfig cfg;
  cfg.manifold = Manifold::kDqProtected;
  cfg.noise = GyroConfig::no_noise();
  cfg.noise.temperature = {noise::Distribution::kLorentzian, 5e3 / 272.0};
  cfg.times_s = {2.2e-3};
  cfg.draws = 400;
  const double centred = dq_protected_ramsey(cfg).table.points.at(0).contrast;
  cfg.dq_fraction = 0.4;
  const double displaced = dq_protected_ramsey(cfg).table.points.at(0).contrast;
  EXPECT_GT(centred, 0.49);
  EXPECT_LT(displaced, 0.5 * centred);
}

TEST(Misalignment, FrequencyInversionRoundTrip) {
  const spin::NVParams params;
  for (double deg : {0.3, 1.0, 2.5, 7.0}) {
    spin::FieldVector field{239.0, deg_to_rad(deg), 0.0};
    const double f = spin::nuclear_transition_frequency(params, field, 0);
    EXPECT_NEAR(rad_to_deg(misalignment_from_frequency(params, 239.0, f)), deg, 0.01);
  }
  EXPECT_THROW(misalignment_from_frequency(params, 239.0, 1.0), InvalidArgument);
}

TEST(Misalignment, ClosedFormRowsWithoutSimulation) {
  MisalignmentConfig cfg;
  cfg.simulate = false;
  const auto rows = misalignment_sweep(cfg);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_NEAR(rows[0].omega_n_exact_hz, 104299.18010379626, 1e-6);
  EXPECT_NEAR(rows[2].omega_n_exact_hz, 108394.06022542526, 1e-6);
  EXPECT_NEAR(rows[0].t2n_pred_s, 0.004480203892493049, 1e-3 * 0.00448);
  EXPECT_NEAR(rows[0].t2n_pred_t1e_s, 0.0028047543677243276, 1e-3 * 0.0028);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_LT(rows[i].t2n_pred_s, rows[i - 1].t2n_pred_s);
    EXPECT_GT(rows[i].omega_n_exact_hz, rows[i - 1].omega_n_exact_hz);
  }
}

TEST(Polarization, IdealAndZeroRounds) {
  PolarizationConfig cfg;
  cfg.rounds = 1;
  EXPECT_GE(polarization_sequence(cfg).polarization, 0.999);
  cfg.rounds = 0;
  EXPECT_NEAR(polarization_sequence(cfg).polarization, 0.5, 1e-5);
  cfg.rounds = 3;
  const auto r = polarization_sequence(cfg);
  ASSERT_EQ(r.per_round.size(), 3u);
  for (double p : r.per_round) EXPECT_GE(p, 0.999);
}

TEST(Polarization, ImperfectResetAndFinitePulseStayBelowIdeal) {
  PolarizationConfig cfg;
  cfg.rounds = 2;
  const double ideal = polarization_sequence(cfg).polarization;
  cfg.nuclear_fidelity = 0.9;
  const double leaky = polarization_sequence(cfg).polarization;
  EXPECT_LT(leaky, ideal);
  EXPECT_GT(leaky, 0.5);
  cfg.nuclear_fidelity = 1.0;
  cfg.finite_mw = true;
  const auto fin = polarization_sequence(cfg);
  ASSERT_EQ(fin.per_round.size(), 2u);
  // A square 1 MHz pulse on one hyperfine line also drives the other line,
  // 3.03 MHz away, with the two-level Rabi probability eps; a round maps
  // P -> (1 - P) + P (1 - eps).
  const double omega = 1.0;
  const double delta = 3.03;
  const double w = std::hypot(omega, delta);
  const double eps = omega * omega / (w * w) * std::pow(std::sin(0.5 * kPi * w / omega), 2);
  double p = 0.5;
  for (double measured : fin.per_round) {
    p = (1.0 - p) + p * (1.0 - eps);
    EXPECT_NEAR(measured, p, 3e-3);
  }
  EXPECT_LT(fin.polarization, ideal);
  cfg.nuclear_fidelity = 1.2;
  EXPECT_THROW(polarization_sequence(cfg), InvalidArgument);
}

TEST(Temperature, NoiselessSlopeAndFieldIndependence) {
  TemperatureConfig cfg;
  const double slope = temperature_roundtrip(cfg).slope_hz_per_k;
  EXPECT_NEAR(slope, -272.0, 0.5);
  for (double b : {238.0, 240.0}) {
    cfg.field.magnitude_g = b;
    EXPECT_NEAR(temperature_roundtrip(cfg).slope_hz_per_k, slope, 0.1);
  }
  cfg.delta_t_k = {0.0, 1.0};
  EXPECT_THROW(temperature_roundtrip(cfg), InvalidArgument);
}

GyroConfig quiet(GyroMode mode) {
  GyroConfig cfg = GyroConfig::defaults(mode);
  cfg.calibration = calibrate_gyro(cfg);
  return cfg;
}

TEST(Gyro, DefaultTimings) {
  EXPECT_NEAR(GyroConfig::defaults(GyroMode::kProtected).point_time_s(), 3.2, 1e-12);
  EXPECT_NEAR(GyroConfig::defaults(GyroMode::kUnprotected).point_time_s(), 2.001, 1e-12);
}

TEST(Gyro, NoiselessCalibration) {
  for (GyroMode mode : {GyroMode::kProtected, GyroMode::kUnprotected}) {
    const GyroCalibration cal = calibrate_gyro(GyroConfig::defaults(mode));
    EXPECT_NEAR(cal.c, 0.5, 1e-5);
    EXPECT_NEAR(cal.c0, 0.5, 1e-5);
  }
  GyroConfig cfg = GyroConfig::defaults(GyroMode::kProtected);
  cfg.noise.temperature = {noise::Distribution::kNone, 0.0};
  cfg.readout_contrast = 1e-4;
  EXPECT_THROW(calibrate_gyro(cfg), FitError);
}

TEST(Gyro, NoiselessRecoveryIsOddAndExact) {
  GyroConfig cfg = quiet(GyroMode::kProtected);
  cfg.pattern = {{3.2, 0.0}, {3.2, 700.0}, {3.2, -700.0}, {3.2, 2000.0}, {3.2, -2000.0}};
  const GyroSeries s = gyro_run(cfg);
  ASSERT_EQ(s.points.size(), 5u);
  EXPECT_NEAR(s.points[0].omega_rec_dps, 0.0, 1e-6);
  EXPECT_NEAR(s.points[1].omega_rec_dps, -s.points[2].omega_rec_dps, 1e-6);
  EXPECT_NEAR(s.points[3].omega_rec_dps, -s.points[4].omega_rec_dps, 1e-6);
  for (const GyroPoint& p : s.points) EXPECT_NEAR(p.omega_rec_dps, p.omega_set_dps, 1e-3);
  EXPECT_EQ(s.clamp_count, 0u);
}

TEST(Gyro, EmulationsAgree) {
  for (GyroMode mode : {GyroMode::kProtected, GyroMode::kUnprotected}) {
    const GyroConfig cfg = GyroConfig::defaults(mode);
    for (double dps : {-1000.0, -250.0, 0.0, 400.0, 1000.0}) {
      for (double phi : {0.0, 1.0, 2.5}) {
        const double w = deg_to_rad(dps);
        EXPECT_NEAR(gyro_signal(cfg, Emulation::kPhaseMod, phi, w), gyro_signal(cfg, Emulation::kIzTerm, phi, w),
                    1e-9);
      }
    }
  }
}

TEST(Gyro, ProtectedModeIgnoresGlobalHyperfineOffset) {
  const GyroConfig prot = GyroConfig::defaults(GyroMode::kProtected);
  const GyroConfig unprot = GyroConfig::defaults(GyroMode::kUnprotected);
  // The echo cancels the offset to first order; the residual is second order
  // in dA_zz over the hyperfine splitting.
  for (double dazz : {-2e3, 500.0, 3e3}) {
    EXPECT_NEAR(gyro_signal(prot, Emulation::kPhaseMod, 0.7, 0.0, dazz),
                gyro_signal(prot, Emulation::kPhaseMod, 0.7, 0.0), 1e-5);
  }
  EXPECT_GT(std::abs(gyro_signal(unprot, Emulation::kPhaseMod, 0.7, 0.0, 1e3) -
                     gyro_signal(unprot, Emulation::kPhaseMod, 0.7, 0.0)),
            0.1);
}

std::vector<double> zero_rate_samples(GyroConfig cfg, std::size_t n) {
  cfg.pattern = {{cfg.point_time_s() * static_cast<double>(n), 0.0}};
  std::vector<double> out;
  for (const GyroPoint& p : gyro_run(cfg).points) out.push_back(p.omega_rec_dps);
  return out;
}

TEST(Gyro, StaircaseErrorWithinShotNoise) {
  GyroConfig cfg = quiet(GyroMode::kProtected);
  cfg.shot_noise_std = 0.3;
  cfg.seed = 4;
  for (double r : {-2000.0, -1000.0, 0.0, 1000.0, 2000.0}) cfg.pattern.push_back({40 * cfg.point_time_s(), r});
  const GyroSeries s = gyro_run(cfg);
  double sq = 0.0, worst_sigma = 0.0;
  for (const GyroPoint& p : s.points) {
    sq += (p.omega_rec_dps - p.omega_set_dps) * (p.omega_rec_dps - p.omega_set_dps);
    worst_sigma = std::max(worst_sigma, predicted_rate_sigma_dps(cfg, s.calibration, p.omega_set_dps));
  }
  EXPECT_LE(std::sqrt(sq / static_cast<double>(s.points.size())), 3.0 * worst_sigma);
}

TEST(Gyro, ZeroBiasSigmaScalesWithRepetitions) {
  GyroConfig cfg = quiet(GyroMode::kProtected);
  cfg.shot_noise_std = 0.3;
  std::vector<double> sigma;
  for (std::size_t reps : {100u, 400u}) {
    cfg.repetitions = reps;
    cfg.seed = reps;
    const auto z = zero_bias_stats(zero_rate_samples(cfg, 3000), cfg.point_time_s());
    EXPECT_NEAR(z.sigma_dps, predicted_rate_sigma_dps(cfg, *cfg.calibration), 0.05 * z.sigma_dps);
    sigma.push_back(z.sigma_dps);
  }
  EXPECT_NEAR(sigma[0] / sigma[1], 2.0, 0.1);
}

TEST(Gyro, ProtectedBeatsUnprotectedByAboutTenfold) {
  GyroConfig prot = quiet(GyroMode::kProtected);
  GyroConfig unprot = quiet(GyroMode::kUnprotected);
  prot.shot_noise_std = unprot.shot_noise_std = 0.3;
  const double ratio = predicted_rate_sigma_dps(unprot, *unprot.calibration) /
                       predicted_rate_sigma_dps(prot, *prot.calibration);
  EXPECT_GE(ratio, 6.0);
  EXPECT_LE(ratio, 12.0);
}

TEST(Gyro, OffsetDriftIsRejected) {
  GyroConfig cfg = quiet(GyroMode::kProtected);
  for (double r : {0.0, 1000.0, -1000.0}) cfg.pattern.push_back({60.0, r});
  const GyroSeries clean = gyro_run(cfg);
  cfg.noise.drift.offset_amplitude = 0.1 * cfg.calibration->c0;
  cfg.noise.drift.timescale_s = 20.0;
  const GyroSeries drifted = gyro_run(cfg);
  ASSERT_EQ(clean.points.size(), drifted.points.size());
  double worst = 0.0, moved = 0.0;
  for (std::size_t i = 0; i < clean.points.size(); ++i) {
    worst = std::max(worst, std::abs(drifted.points[i].omega_rec_dps - clean.points[i].omega_rec_dps));
    moved = std::max(moved, std::abs(drifted.points[i].s_plus - clean.points[i].s_plus));
  }
  EXPECT_GT(moved, 0.01);
  EXPECT_LT(worst, 1e-3 * 1000.0);
}

TEST(Gyro, ZeroBiasStatistics) {
  std::vector<double> v;
  for (int i = 0; i < 40; ++i) v.push_back(i % 2 ? 1.0 : -1.0);
  const ZeroBiasStats z = zero_bias_stats(v, 2.0);
  EXPECT_NEAR(z.mean_dps, 0.0, 1e-15);
  EXPECT_NEAR(z.sigma_dps, std::sqrt(40.0 / 39.0), 1e-12);
  EXPECT_NEAR(z.eta_a, z.sigma_dps * std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(z.eta_b, z.sigma_dps / std::sqrt(2.0), 1e-12);
  v.resize(29);
  EXPECT_THROW(zero_bias_stats(v, 2.0), InvalidArgument);
}

TEST(Enhancement, SweepPeaksAtLevelAnticrossing) {
  const spin::NVParams params;
  EXPECT_NEAR(gslac_alpha_limit(params), 4591.279063014784, 1e-6);
  const auto rows = enhancement_sweep(params, 1500.0, 301);
  EXPECT_NEAR(max_abs_alpha(rows), gslac_alpha_limit(params), 0.02 * gslac_alpha_limit(params));
  for (const auto& r : rows) {
    if (std::abs(r.b_g - 239.0) < 1e-9) EXPECT_NEAR(r.alpha_0, -16.476599032165854, 1e-6);
  }
  const auto x = enhancement_sweep(params, 300.0, 31, SweepAxis::kX);
  for (const auto& r : x) EXPECT_GT(r.b_g, 0.0);
  EXPECT_NEAR(x.back().alpha_0, std::sqrt(std::pow(spin::nuclear_transition_frequency(params, {300.0, kPi / 2, 0.0}, 0), 2) -
                                          std::pow(spin::nuclear_transition_frequency(params, {0.0, 0.0, 0.0}, 0), 2)) /
                                    (params.gamma_n_hz_per_g * 300.0),
              1e-9 * std::abs(x.back().alpha_0));
}

}  // namespace
