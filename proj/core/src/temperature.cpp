#include "nvgyro/analysis.hpp"
#include "nvgyro/errors.hpp"
#include "nvgyro/noise.hpp"
#include "nvgyro/protocols.hpp"

namespace nvgyro::protocols {

TemperatureResult temperature_roundtrip(const TemperatureConfig& cfg) {
  if (cfg.delta_t_k.size() < 3) throw InvalidArgument("temperature round trip needs >= 3 points");
  if (!(cfg.measurement_noise_hz >= 0.0)) throw InvalidArgument("measurement noise must be >= 0");

  TemperatureResult result;
  for (std::size_t i = 0; i < cfg.delta_t_k.size(); ++i) {
    spin::NVParams shifted = cfg.params;
    shifted.a_zz_hz += cfg.injected_dazz_dt_hz_per_k * cfg.delta_t_k[i];
    double omega_p = spin::nuclear_transition_frequency(shifted, cfg.field, +1);
    double omega_m = spin::nuclear_transition_frequency(shifted, cfg.field, -1);
    if (cfg.measurement_noise_hz > 0.0) {
      noise::CounterRng rng(cfg.seed, i, noise::streams::kMeasurement);
      omega_p += cfg.measurement_noise_hz * rng.normal();
      omega_m += cfg.measurement_noise_hz * rng.normal();
    }
    result.mean_frequency_hz.push_back(0.5 * (omega_p + omega_m));
  }
  const analysis::FitResult fit = analysis::fit_linear(cfg.delta_t_k, result.mean_frequency_hz);
  result.slope_hz_per_k = fit.params[analysis::linear::kSlope];
  result.slope_err_hz_per_k = fit.std_errors[analysis::linear::kSlope];
  result.intercept_hz = fit.params[analysis::linear::kIntercept];
  return result;
}

}  // namespace nvgyro::protocols
