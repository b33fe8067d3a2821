#include "nvgyro/noise.hpp"

#include <array>
#include <cmath>

#include "nvgyro/errors.hpp"
#include "nvgyro/spin_core.hpp"
#include "nvgyro/units.hpp"

namespace nvgyro::noise {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void validate_spread(const Spread& s, const char* name) {
  if (!std::isfinite(s.width) || s.width < 0.0) {
    throw InvalidArgument(std::string("noise spread ") + name + " must be finite and >= 0");
  }
}

double draw_independent(const Spread& s, CounterRng& rng) {
  // Always consume two uniforms so later variates stay aligned across kinds.
  const double u = rng.uniform();
  const double u2 = rng.uniform();
  switch (s.kind) {
    case Distribution::kNone:
      return 0.0;
    case Distribution::kGaussian:
      return s.width * std::sqrt(-2.0 * std::log(u)) * std::cos(kTwoPi * u2);
    case Distribution::kLorentzian:
      return s.width * std::tan(kPi * (u - 0.5));
  }
  return 0.0;
}

double band_limited(double amplitude, double timescale_s, std::uint64_t seed,
                    std::uint64_t channel, double time_s) {
  if (amplitude == 0.0) return 0.0;
  static constexpr std::array<double, 4> kHarmonics{1.0, 2.0, 3.0, 5.0};
  CounterRng rng(seed, channel, streams::kDrift);
  double sum = 0.0;
  double norm = 0.0;
  for (double h : kHarmonics) {
    const double phase = kTwoPi * rng.uniform();
    const double w = 1.0 / h;
    sum += w * std::sin(kTwoPi * h * time_s / timescale_s + phase);
    norm += w;
  }
  return amplitude * sum / norm;
}

}  // namespace

void NoiseModel::validate() const {
  validate_spread(b_z, "b_z");
  validate_spread(b_x, "b_x");
  validate_spread(b_y, "b_y");
  validate_spread(temperature, "temperature");
  if (!std::isfinite(dazz_dt_hz_per_k)) {
    throw InvalidArgument("dA_zz/dT must be finite");
  }
  if (!std::isfinite(drift.offset_amplitude) || !std::isfinite(drift.temperature_amplitude_k) ||
      !(drift.timescale_s > 0.0)) {
    throw InvalidArgument("drift amplitudes must be finite and timescale > 0");
  }
}

NoiseModel NoiseModel::magnetic_from(const spin::NVParams& params) {
  const double delta_b = spin::delta_b_from_t2e(params);
  NoiseModel model;
  model.b_z = {Distribution::kLorentzian, delta_b};
  model.b_x = {Distribution::kLorentzian, delta_b};
  model.b_y = {Distribution::kLorentzian, delta_b};
  model.temperature = {Distribution::kLorentzian, 0.0};
  model.dazz_dt_hz_per_k = params.dazz_dt_hz_per_k;
  return model;
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t index, std::uint64_t stream)
    : state_(mix64(mix64(seed + kGolden * (stream + 1)) ^ (index * kGolden + 0x632BE59BD9B4E019ULL))) {}

std::uint64_t CounterRng::next_u64() {
  state_ += kGolden;
  return mix64(state_);
}

double CounterRng::uniform() {
  // 53 random bits, offset by half an ulp so 0 and 1 never occur.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  const double angle = kTwoPi * uniform();
  spare_ = r * std::sin(angle);
  has_spare_ = true;
  return r * std::cos(angle);
}

double CounterRng::cauchy() { return std::tan(kPi * (uniform() - 0.5)); }

NoiseDraw sample(const NoiseModel& model, std::uint64_t master_seed,
                 std::uint64_t shot_index) {
  CounterRng rng(master_seed, shot_index, streams::kQuasiStatic);
  NoiseDraw draw;

  const std::array<const Spread*, 3> axes{&model.b_z, &model.b_x, &model.b_y};
  std::array<double*, 3> out{&draw.d_bz_g, &draw.d_bx_g, &draw.d_by_g};

  if (model.coupling == MagneticCoupling::kIsotropic) {
    // Shared scale 1/|w|: z_i/|w| is standard Cauchy for each axis, and any
    // linear combination sum a_i z_i/|w| is Cauchy with scale |a|.
    const double w = std::abs(rng.normal());
    for (std::size_t i = 0; i < 3; ++i) {
      const double z = rng.normal();
      const Spread& s = *axes[i];
      switch (s.kind) {
        case Distribution::kNone: *out[i] = 0.0; break;
        case Distribution::kGaussian: *out[i] = s.width * z; break;
        case Distribution::kLorentzian: *out[i] = s.width * z / w; break;
      }
    }
  } else {
    for (std::size_t i = 0; i < 3; ++i) *out[i] = draw_independent(*axes[i], rng);
  }

  const double d_temperature = draw_independent(model.temperature, rng);
  draw.d_azz_hz = model.dazz_dt_hz_per_k * d_temperature;
  // Exact zeros when a spread is zero (the scale mixture can give 0 * inf).
  for (std::size_t i = 0; i < 3; ++i) {
    if (axes[i]->width == 0.0) *out[i] = 0.0;
  }
  if (model.temperature.width == 0.0) draw.d_azz_hz = 0.0;
  return draw;
}

double drift_offset(const NoiseModel& model, std::uint64_t seed, double time_s) {
  return band_limited(model.drift.offset_amplitude, model.drift.timescale_s, seed, 0, time_s);
}

double drift_temperature(const NoiseModel& model, std::uint64_t seed, double time_s) {
  return band_limited(model.drift.temperature_amplitude_k, model.drift.timescale_s, seed, 1,
                      time_s);
}

}  // namespace nvgyro::noise
