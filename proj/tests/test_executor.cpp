#include <cmath>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "nvgyro/analysis.hpp"
#include "nvgyro/errors.hpp"
#include "nvgyro/executor.hpp"
#include "nvgyro/noise.hpp"
#include "nvgyro/protocols.hpp"
#include "nvgyro/sequence.hpp"
#include "nvgyro/units.hpp"

namespace {

using namespace nvgyro;
using seq::Matrix6c;
using spin::Complex;

Matrix6c projector(int ms, int two_mi) {
  Matrix6c rho = Matrix6c::Zero();
  const auto k = static_cast<Eigen::Index>(spin::canonical_index({ms, two_mi}));
  rho(k, k) = 1.0;
  return rho;
}

Matrix6c random_state(std::uint64_t index) {
  noise::CounterRng rng(99, index);
  Matrix6c a;
  for (Eigen::Index i = 0; i < 6; ++i) {
    for (Eigen::Index j = 0; j < 6; ++j) a(i, j) = Complex(rng.normal(), rng.normal());
  }
  Matrix6c rho = a * a.adjoint();
  return rho / rho.trace();
}

double state_distance(const Matrix6c& a, const Matrix6c& b) { return (a - b).cwiseAbs().maxCoeff(); }

// Randomized sequence text over every element kind.
std::string random_sequence(std::uint64_t index) {
  noise::CounterRng rng(7, index);
  const auto pick = [&](int n) { return static_cast<int>(rng.uniform() * n); };
  const char* mi[] = {"", " mi(+1/2)", " mi(-1/2)"};
  std::ostringstream s;
  const int n = 4 + pick(8);
  for (int i = 0; i < n; ++i) {
    const double angle = 0.05 + rng.uniform() * 6.2;
    const double phase = rng.uniform() * 6.28;
    switch (pick(7)) {
      case 0:
        s << "pulse mw sq(" << (pick(2) ? "+1" : "-1") << ") " << angle << " phase=" << phase
          << mi[pick(3)] << "\n";
        break;
      case 1:
        s << "pulse rf ms(" << pick(3) - 1 << ") " << angle << " phase=" << phase << "\n";
        break;
      case 2:
        s << "evolve " << 1.0 + rng.uniform() * 3000.0 << "us\n";
        break;
      case 3:
        s << "fpulse mw sq(-1) " << angle << mi[pick(3)] << " rabi=" << 0.5 + 4.0 * rng.uniform()
          << "MHz detuning=" << rng.uniform() * 200.0 << "kHz cutoff=100MHz\n";
        break;
      case 4:
        s << "dq\n";
        break;
      case 5:
        s << "reset ms=" << pick(3) - 1 << " fidelity=" << rng.uniform() << "\n";
        break;
      default:
        s << "evolve " << rng.uniform() * 20.0 << "ns\n";
    }
  }
  s << "readout\n";
  return s.str();
}

TEST(Executor, StaysPhysicalUnderNoisyRandomSequences) {
  spin::FieldVector field{239.0, 0.02, 0.7};
  const seq::Executor exec(spin::NVParams{}, field);
  noise::NoiseModel model = noise::NoiseModel::magnetic_from(spin::NVParams{});
  model.temperature = {noise::Distribution::kLorentzian, 5.0};
  for (std::uint64_t i = 0; i < 60; ++i) {
    const std::string text = random_sequence(i);
    SCOPED_TRACE(text);
    const auto s = seq::parse_sequence(text);
    const auto ctx = exec.prepare(noise::sample(model, 3, i));
    seq::RunOptions opt;
    opt.initial_state = random_state(i);
    const auto r = exec.run(s, ctx, {}, opt);
    EXPECT_LT(r.state.trace_error(), seq::kStateTolerance);
    EXPECT_LT(r.state.hermiticity_error(), seq::kStateTolerance);
    EXPECT_GT(r.state.min_eigenvalue(), -seq::kStateTolerance);
    EXPECT_GE(r.readout, -1e-12);
    EXPECT_LE(r.readout, 1.0 + 1e-12);
  }
}

TEST(Executor, ZeroEvolutionIsIdentity) {
  const seq::Executor exec(spin::NVParams{}, spin::FieldVector{});
  const auto s = seq::parse_sequence("evolve 0s\nreadout\n");
  seq::RunOptions opt;
  opt.initial_state = random_state(1);
  const auto r = exec.run(s, exec.prepare({}), {}, opt);
  const Matrix6c& v = exec.dressed_basis();
  EXPECT_LT(state_distance(r.state.rho, v.adjoint() * *opt.initial_state * v), 1e-12);
  EXPECT_DOUBLE_EQ(r.elapsed_s, 0.0);
}

TEST(Executor, OpposedPiPulsesCancel) {
  const seq::Executor exec(spin::NVParams{}, spin::FieldVector{});
  const Matrix6c& v = exec.dressed_basis();
  for (const char* text : {"pulse mw sq(-1) pi phase=pi\npulse mw sq(-1) pi\nreadout\n",
                           "pulse rf ms(0) pi phase=pi\npulse rf ms(0) pi\nreadout\n",
                           "pulse mw sq(+1) pi/3\npulse mw sq(+1) pi/3 phase=pi\nreadout\n"}) {
    SCOPED_TRACE(text);
    seq::RunOptions opt;
    opt.initial_state = random_state(2);
    const auto r = exec.run(seq::parse_sequence(text), exec.prepare({}), {}, opt);
    EXPECT_LT(state_distance(r.state.rho, v.adjoint() * *opt.initial_state * v), 1e-12);
  }
}

TEST(Executor, NoiselessRamseyFringeHasHalfContrast) {
  const seq::Executor exec(spin::NVParams{}, spin::FieldVector{});
  const auto& s = protocols::ramsey_sequence(protocols::Manifold::kMs0);
  for (double t : {0.0, 1e-3, 3.7e-3}) {
    double lo = 1.0, hi = 0.0;
    for (double phi : protocols::uniform_phases(24)) {
      const double r = exec.run(s, exec.prepare({}), {{"t", t}, {"phi", phi}}).readout;
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    // Hyperfine mixing of order theta+^2 ~ 1.6e-6 leaves the pulses slightly imperfect.
    EXPECT_NEAR(hi - lo, 1.0, 1e-5);
    EXPECT_NEAR(0.5 * (hi + lo), 0.5, 1e-5);
  }
}

TEST(Executor, LabReferenceFringeOscillatesAtNuclearFrequency) {
  const spin::NVParams params;
  const spin::FieldVector field;
  const double f = 104299.18010379626;
  EXPECT_NEAR(spin::nuclear_transition_frequency(params, field, 0), f, 1e-6);
  const seq::Executor exec(params, field);
  const auto& s = protocols::ramsey_sequence(protocols::Manifold::kMs0);
  seq::RunOptions lab;
  lab.phase_reference = seq::PhaseReference::kLab;
  const auto signal = [&](double t) {
    return exec.run(s, exec.prepare({}), {{"t", t}, {"phi", 0.0}}, lab).readout;
  };
  double spread = 0.0;
  for (double t0 : {10e-6, 123e-6, 1.01e-3}) {
    const double r = signal(t0);
    spread = std::max(spread, std::abs(r - 0.5));
    EXPECT_NEAR(signal(t0 + 1.0 / f), r, 1e-6);
    EXPECT_NEAR(signal(t0 + 25.0 / f), r, 1e-5);
    EXPECT_NEAR(signal(t0 + 0.5 / f) + r, 1.0, 1e-6);
  }
  EXPECT_GT(spread, 0.05);
  const double off = 1.01 * f;
  EXPECT_GT(std::abs(signal(1e-3 + 50.0 / off) - signal(1e-3)), 1e-2);
}

TEST(Readout, BrightDarkAndMixed) {
  seq::DensityState bright{projector(0, 1)};
  EXPECT_DOUBLE_EQ(seq::readout_signal(bright, {}), 1.0);
  seq::DensityState dark{projector(-1, 1)};
  EXPECT_DOUBLE_EQ(seq::readout_signal(dark, {}), 0.0);
  seq::DensityState mixed{Matrix6c::Identity() / 6.0};
  EXPECT_NEAR(seq::readout_signal(mixed, {}), 1.0 / 3.0, 1e-15);
  seq::ReadoutModel m;
  m.contrast = 0.3;
  m.offset = 0.6;
  EXPECT_NEAR(seq::readout_signal(mixed, m), 0.7, 1e-15);
  m.shots = 0;
  EXPECT_THROW(seq::readout_signal(mixed, m), InvalidArgument);
}

TEST(Readout, ShotNoiseFallsAsRootShots) {
  seq::DensityState bright{projector(0, 1)};
  const auto std_for = [&](std::uint64_t shots) {
    seq::ReadoutModel m;
    m.shot_noise_std = 0.2;
    m.shots = shots;
    std::vector<double> v;
    for (std::uint64_t i = 0; i < 20000; ++i) v.push_back(seq::readout_signal(bright, m, 5, i));
    return analysis::summary_stats(v).std;
  };
  const double s1 = std_for(1);
  const double s4 = std_for(4);
  EXPECT_NEAR(s1, 0.2, 0.2 * 0.05);
  EXPECT_NEAR(s1 / s4, 2.0, 0.1);
  seq::ReadoutModel m;
  m.shot_noise_std = 0.2;
  EXPECT_EQ(seq::readout_signal(bright, m, 5, 17), seq::readout_signal(bright, m, 5, 17));
}

TEST(FinitePulse, SelectiveLimitMatchesIdealPopulations) {
  const seq::Executor exec(spin::NVParams{}, spin::FieldVector{});
  seq::RunOptions opt;
  opt.initial_state = 0.5 * (projector(0, 1) + projector(0, -1));
  const auto ideal = exec.run(seq::parse_sequence("pulse mw sq(-1) pi mi(-1/2)\nreadout\n"),
                              exec.prepare({}), {}, opt);
  const auto fin = exec.run(
      seq::parse_sequence("fpulse mw sq(-1) pi mi(-1/2) rabi=1kHz cutoff=100MHz\nreadout\n"),
      exec.prepare({}), {}, opt);
  for (Eigen::Index k = 0; k < 6; ++k) {
    EXPECT_NEAR(fin.state.rho(k, k).real(), ideal.state.rho(k, k).real(), 1e-6);
  }
  EXPECT_NEAR(fin.elapsed_s, 0.5e-3, 1e-15);
  EXPECT_TRUE(fin.warnings.empty());
}

TEST(FinitePulse, OffResonantLeakageFollowsRabiFormula) {
  const seq::Executor exec(spin::NVParams{}, spin::FieldVector{});
  const auto& e = exec.dressed_energies();
  const auto idx = [](int ms, int two_mi) { return spin::canonical_index({ms, two_mi}); };
  const double target = e[idx(-1, 1)] - e[idx(0, 1)];
  const double other = e[idx(-1, -1)] - e[idx(0, -1)];
  const double delta = std::abs(other - target);
  EXPECT_NEAR(delta / kTwoPi, 3.03e6, 0.05e6);
  const double omega = kTwoPi * 1e6;
  const double w = std::hypot(omega, delta);
  const double s = std::sin(0.5 * w * (kPi / omega));
  const double expected = omega * omega / (w * w) * s * s;

  seq::RunOptions opt;
  opt.initial_state = projector(0, -1);
  const auto r = exec.run(
      seq::parse_sequence("fpulse mw sq(-1) pi mi(+1/2) rabi=1MHz cutoff=100MHz\nreadout\n"),
      exec.prepare({}), {}, opt);
  const double leaked = r.population(-1);
  EXPECT_NEAR(leaked, expected, 2e-3);
  EXPECT_GT(leaked, 0.05);
  EXPECT_LT(leaked, 0.15);
}

TEST(FinitePulse, ZeroAmplitudeIsIdentityAndCutoffWarns) {
  const seq::Executor exec(spin::NVParams{}, spin::FieldVector{});
  seq::detail::FinitePulseInput in;
  in.angle = kPi;
  in.rabi_hz = 0.0;
  in.cutoff_hz = 1e8;
  double duration = -1.0;
  std::vector<std::string> warnings;
  const Matrix6c u = seq::detail::finite_pulse_propagator(in, exec.dressed_energies(), {}, 0.0,
                                                          duration, warnings);
  EXPECT_TRUE(u.isApprox(Matrix6c::Identity(), 0.0));
  EXPECT_EQ(duration, 0.0);
  const auto r = exec.run(seq::parse_sequence("fpulse mw sq(-1) pi rabi=2MHz cutoff=1MHz\nreadout\n"),
                          exec.prepare({}), {});
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("cutoff"), std::string::npos);
}

TEST(LaserReset, FidelityMixesNuclearState) {
  const seq::Executor exec(spin::NVParams{}, spin::FieldVector{});
  seq::RunOptions opt;
  opt.initial_state = projector(-1, 1);
  const Matrix6c& v = exec.dressed_basis();
  const auto bare_population = [&](const seq::ExecutionResult& r, int ms, int two_mi) {
    const Matrix6c bare = v * r.state.rho * v.adjoint();
    const auto k = static_cast<Eigen::Index>(spin::canonical_index({ms, two_mi}));
    return bare(k, k).real();
  };
  for (double f : {1.0, 0.4, 0.0}) {
    const auto s = seq::parse_sequence("param f\nreset fidelity=$f\nreadout\n");
    const auto r = exec.run(s, exec.prepare({}), {{"f", f}}, opt);
    EXPECT_NEAR(bare_population(r, 0, 1), f + 0.5 * (1.0 - f), 1e-12);
    EXPECT_NEAR(bare_population(r, 0, -1), 0.5 * (1.0 - f), 1e-12);
    EXPECT_NEAR(r.readout, 1.0, 1e-6);
  }
  const auto r = exec.run(seq::parse_sequence("prepare ms=-1\nreadout\n"), exec.prepare({}), {}, opt);
  EXPECT_NEAR(bare_population(r, -1, 1), 1.0, 1e-12);
  EXPECT_THROW(seq::parse_sequence("reset fidelity=1.5\nreadout\n"), ParseError);
  EXPECT_THROW(exec.run(seq::parse_sequence("param f\nreset fidelity=$f\nreadout\n"), exec.prepare({}),
                        {{"f", 1.5}}),
               BindingError);
}

TEST(Executor, RejectsSequenceWithoutBindings) {
  const seq::Executor exec(spin::NVParams{}, spin::FieldVector{});
  EXPECT_THROW(exec.run(protocols::ramsey_sequence(protocols::Manifold::kMs0), exec.prepare({}), {}),
               BindingError);
}

}  // namespace
