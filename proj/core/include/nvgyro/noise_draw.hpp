#pragma once

namespace nvgyro::noise {

// One quasi-static realization of the noise model, constant over a shot.
struct NoiseDraw {
  double d_bz_g = 0.0;
  double d_bx_g = 0.0;
  double d_by_g = 0.0;
  double d_azz_hz = 0.0;
  // Additive offset drift of the readout signal, used by gyroscope runs.
  double d_c0 = 0.0;

  bool is_zero() const {
    return d_bz_g == 0.0 && d_bx_g == 0.0 && d_by_g == 0.0 &&
           d_azz_hz == 0.0 && d_c0 == 0.0;
  }
  bool operator==(const NoiseDraw&) const = default;
};

}  // namespace nvgyro::noise
