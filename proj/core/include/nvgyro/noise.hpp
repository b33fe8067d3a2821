#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nvgyro/noise_draw.hpp"

namespace nvgyro::spin {
struct NVParams;
}

namespace nvgyro::noise {

enum class Distribution { kNone, kGaussian, kLorentzian };

// Lorentzian magnetic components either share one Gaussian scale mixture
// (isotropic multivariate Cauchy: every projection of the field noise is
// Lorentzian and widths add in quadrature) or are drawn independently.
enum class MagneticCoupling { kIsotropic, kIndependent };

// width is the standard deviation for kGaussian and the HWHM for kLorentzian.
struct Spread {
  Distribution kind = Distribution::kLorentzian;
  double width = 0.0;

  bool operator==(const Spread&) const = default;
};

// Slow drifts seen across gyroscope points: an additive readout offset and a
// temperature excursion (mapped onto A_zz). Band-limited, peak |value| is the
// amplitude.
struct DriftModel {
  double offset_amplitude = 0.0;
  double temperature_amplitude_k = 0.0;
  double timescale_s = 60.0;

  bool operator==(const DriftModel&) const = default;
};

struct NoiseModel {
  Spread b_z{Distribution::kLorentzian, 0.0};
  Spread b_x{Distribution::kLorentzian, 0.0};
  Spread b_y{Distribution::kLorentzian, 0.0};
  Spread temperature{Distribution::kLorentzian, 0.0};  // Kelvin
  double dazz_dt_hz_per_k = -272.0;
  MagneticCoupling coupling = MagneticCoupling::kIsotropic;
  DriftModel drift;
  bool t1e_envelope = false;

  void validate() const;

  // Lorentzian Delta_B = 1/(gamma_e T2e*) on all three axes, no temperature
  // spread, envelope off.
  static NoiseModel magnetic_from(const spin::NVParams& params);

  bool operator==(const NoiseModel&) const = default;
};

// SplitMix64 stream keyed by (seed, index, stream). Two generators with the
// same key produce the same sequence; distinct keys are decorrelated by the
// 64-bit finalizer.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t index, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  double cauchy();

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Stream ids used by the library so independent consumers never overlap.
namespace streams {
inline constexpr std::uint64_t kQuasiStatic = 0;
inline constexpr std::uint64_t kDrift = 1;
inline constexpr std::uint64_t kShotNoise = 2;
inline constexpr std::uint64_t kMeasurement = 3;
}  // namespace streams

NoiseDraw sample(const NoiseModel& model, std::uint64_t master_seed,
                 std::uint64_t shot_index);

double drift_offset(const NoiseModel& model, std::uint64_t seed, double time_s);
double drift_temperature(const NoiseModel& model, std::uint64_t seed, double time_s);

struct SignalPoint {
  double time_s = 0.0;
  double value = 0.0;
  // The T1e envelope scales value - baseline (the coherence-carrying part).
  double baseline = 0.0;
};
using SignalTable = std::vector<SignalPoint>;

using ExperimentFn = std::function<SignalTable(const NoiseDraw&, std::size_t)>;

struct EnsembleOptions {
  // Worker threads; 0 picks hardware concurrency (or NVGYRO_THREADS).
  std::size_t threads = 0;
  // Required when the model enables the T1e envelope.
  double t1e_s = 0.0;
};

struct EnsembleResult {
  SignalTable mean;
  // Means over fixed, index-contiguous batches (at most kBatches), for
  // Monte Carlo error estimates.
  std::vector<SignalTable> batch_means;
  std::size_t draws = 0;
};

inline constexpr std::size_t kBatches = 16;

class EnsembleError : public std::runtime_error {
 public:
  EnsembleError(std::size_t draw_index, const std::string& what)
      : std::runtime_error("draw " + std::to_string(draw_index) + ": " + what),
        draw_index_(draw_index) {}
  std::size_t draw_index() const { return draw_index_; }

 private:
  std::size_t draw_index_;
};

// Mean of experiment_fn over draws 0..n_draws-1 sampled from `model`. Every
// draw must return a table with the same shape. Results are reduced in batch
// order, so thread count never changes a single bit of the output.
EnsembleResult ensemble_average(const ExperimentFn& experiment_fn,
                                const NoiseModel& model, std::size_t n_draws,
                                std::uint64_t seed, const EnsembleOptions& options = {});

}  // namespace nvgyro::noise
