#include <cmath>

#include "nvgyro/errors.hpp"
#include "nvgyro/spin_core.hpp"
#include "nvgyro/units.hpp"

namespace nvgyro::spin {

ZqAngles zq_rotation_angles(const NVParams& params, double bz_g) {
  params.validate();
  if (!std::isfinite(bz_g)) throw InvalidArgument("B_z must be finite");
  const double d = params.zero_field_splitting_hz;
  const double dz = (params.gamma_e_hz_per_g - params.gamma_n_hz_per_g) * bz_g;
  const double den_plus = d + dz - params.a_zz_hz / 2.0;
  const double den_minus = d - dz - params.a_zz_hz / 2.0;
  if (std::abs(den_plus) < kGslacGuardHz || std::abs(den_minus) < kGslacGuardHz) {
    throw GslacProximityError("ZQ denominator within 1 kHz of zero at B_z = " +
                              std::to_string(bz_g) + " G");
  }
  const double two_aperp = 2.0 * params.a_perp_hz;
  return {0.5 * std::atan(two_aperp / den_plus),
          0.5 * std::atan(-two_aperp / den_minus)};
}

double EnhancementFactors::alpha(int ms) const {
  switch (ms) {
    case 1: return alpha_p1;
    case 0: return alpha_0;
    case -1: return alpha_m1;
    default: throw InvalidArgument("manifold m_S must be -1, 0 or +1");
  }
}

EnhancementFactors enhancement_factors(const NVParams& params, double bz_g) {
  const ZqAngles zq = zq_rotation_angles(params, bz_g);
  const double ratio = params.gamma_e_hz_per_g / params.gamma_n_hz_per_g;
  const double tp = zq.theta_plus;
  const double tm = zq.theta_minus;

  EnhancementFactors ef;
  ef.theta_plus = tp;
  ef.theta_minus = tm;
  ef.alpha_p1 = std::cos(tp) + ratio * std::sin(tp);
  ef.alpha_0 = std::cos(tp) * std::cos(tm) - ratio * std::sin(tp - tm);
  ef.alpha_m1 = std::cos(tm) - ratio * std::sin(tm);
  ef.kappa = approx_alpha(params, 0).kappa;
  return ef;
}

ApproxAlpha approx_alpha(const NVParams& params, int ms) {
  if (ms < -1 || ms > 1) {
    throw InvalidArgument("manifold m_S must be -1, 0 or +1");
  }
  params.validate();
  const double kappa = params.gamma_e_hz_per_g * params.a_perp_hz /
                       (params.gamma_n_hz_per_g * params.zero_field_splitting_hz);
  return {kappa, 1.0 - 2.0 * kappa + 3.0 * kappa * ms * ms};
}

double closed_form_omega_n(const NVParams& params, double b_g, double theta_rad,
                           double alpha_0) {
  const double c = std::cos(theta_rad);
  const double s = std::sin(theta_rad);
  return params.gamma_n_hz_per_g * b_g * std::sqrt(c * c + alpha_0 * alpha_0 * s * s);
}

double closed_form_omega_n(const NVParams& params, double b_g, double theta_rad,
                           AlphaSource source) {
  const double alpha_0 = source == AlphaSource::kExact
                             ? enhancement_factors(params, b_g * std::cos(theta_rad)).alpha_0
                             : approx_alpha(params, 0).alpha;
  return closed_form_omega_n(params, b_g, theta_rad, alpha_0);
}

}  // namespace nvgyro::spin
