#include <cmath>

#include "nvgyro/errors.hpp"
#include "nvgyro/protocols.hpp"
#include "nvgyro/units.hpp"

namespace nvgyro::protocols {

std::vector<MisalignmentRow> misalignment_sweep(const MisalignmentConfig& cfg) {
  cfg.params.validate();
  if (cfg.times_per_angle < 4) throw InvalidArgument("misalignment sweep needs >= 4 times per angle");
  std::vector<MisalignmentRow> rows;
  for (double theta_deg : cfg.angles_deg) {
    if (!(theta_deg >= 0.0 && theta_deg <= 90.0)) {
      throw InvalidArgument("misalignment angle outside [0, 90] deg");
    }
    const double theta = deg_to_rad(theta_deg);
    const spin::FieldVector field{cfg.field_g, theta, 0.0};
    const double alpha_0 = spin::enhancement_factors(cfg.params, cfg.field_g * std::cos(theta)).alpha_0;

    MisalignmentRow row;
    row.theta_deg = theta_deg;
    row.omega_n_exact_hz = spin::nuclear_transition_frequency(cfg.params, field, 0);
    row.omega_n_cf_hz = spin::closed_form_omega_n(cfg.params, cfg.field_g, theta, alpha_0);
    row.t2n_pred_s = spin::predicted_t2n(cfg.params, theta, false, alpha_0);
    row.t2n_pred_t1e_s = spin::predicted_t2n(cfg.params, theta, true, alpha_0);

    if (cfg.simulate) {
      const double scale = cfg.noise.t1e_envelope ? row.t2n_pred_t1e_s : row.t2n_pred_s;
      RamseyConfig rc;
      rc.manifold = Manifold::kMs0;
      rc.params = cfg.params;
      rc.field = field;
      rc.noise = cfg.noise;
      rc.draws = cfg.draws;
      rc.seed = cfg.seed;
      rc.phases_rad = cfg.phases_rad;
      rc.threads = cfg.threads;
      const std::size_t n = cfg.times_per_angle;
      for (std::size_t i = 0; i < n; ++i) {
        rc.times_s.push_back(scale * (0.1 + 2.4 * static_cast<double>(i) / static_cast<double>(n - 1)));
      }
      try {
        const T2Estimate est = fit_t2n(ramsey_scan(rc));
        row.t2n_sim_s = est.t2_s;
        row.t2n_sim_err_s = est.t2_err_s;
        row.sim_ok = true;
      } catch (const FitError&) {
        row.sim_ok = false;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

double misalignment_from_frequency(const spin::NVParams& params, double field_g, double omega_n_hz) {
  const auto omega = [&](double theta) {
    return spin::nuclear_transition_frequency(params, spin::FieldVector{field_g, theta, 0.0}, 0);
  };
  double lo = 0.0;
  double hi = kPi / 2.0;
  const double f_lo = omega(lo) - omega_n_hz;
  const double f_hi = omega(hi) - omega_n_hz;
  if (f_lo > 0.0 || f_hi < 0.0) {
    throw InvalidArgument("frequency outside the m_S = 0 range for this field");
  }
  for (int i = 0; i < 200 && hi - lo > 1e-14; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (omega(mid) < omega_n_hz) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace nvgyro::protocols
