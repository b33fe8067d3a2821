#include <algorithm>
#include <cmath>

#include "nvgyro/errors.hpp"
#include "nvgyro/protocols.hpp"
#include "nvgyro/units.hpp"

namespace nvgyro::protocols {

std::vector<EnhancementRow> enhancement_sweep(const spin::NVParams& params, double b_max_g,
                                              std::size_t points, SweepAxis axis) {
  params.validate();
  if (!(b_max_g > 0.0) || !std::isfinite(b_max_g)) throw InvalidArgument("sweep needs b_max > 0");
  if (points < 2) throw InvalidArgument("sweep needs at least 2 points");

  std::vector<double> grid;
  for (std::size_t i = 0; i < points; ++i) {
    grid.push_back(b_max_g * static_cast<double>(i) / static_cast<double>(points - 1));
  }

  std::vector<EnhancementRow> rows;
  if (axis == SweepAxis::kZ) {
    // The theta- resonance is narrower than any practical uniform grid.
    const double slope = params.gamma_e_hz_per_g - params.gamma_n_hz_per_g;
    const double center = params.zero_field_splitting_hz - params.a_zz_hz / 2.0;
    for (double s : {1.0, 0.1, 0.01, 0.001}) {
      for (double sign : {1.0, -1.0}) {
        const double b = (center - sign * 2.0 * params.a_perp_hz * s) / slope;
        if (b >= 0.0 && b <= b_max_g) grid.push_back(b);
      }
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    for (double b : grid) {
      try {
        const spin::EnhancementFactors f = spin::enhancement_factors(params, b);
        rows.push_back({b, f.alpha_p1, f.alpha_0, f.alpha_m1});
      } catch (const GslacProximityError&) {
      }
    }
  } else {
    const auto omega = [&](double b, int ms) {
      return spin::nuclear_transition_frequency(params, spin::FieldVector{b, kPi / 2.0, 0.0}, ms);
    };
    const double w0_p1 = omega(0.0, 1);
    const double w0_0 = omega(0.0, 0);
    const double w0_m1 = omega(0.0, -1);
    const auto alpha = [&](double w, double w0, double b) {
      return std::sqrt(std::max(0.0, w * w - w0 * w0)) / (params.gamma_n_hz_per_g * b);
    };
    for (double b : grid) {
      if (b == 0.0) continue;
      rows.push_back({b, alpha(omega(b, 1), w0_p1, b), alpha(omega(b, 0), w0_0, b),
                      alpha(omega(b, -1), w0_m1, b)});
    }
  }
  return rows;
}

double max_abs_alpha(const std::vector<EnhancementRow>& rows) {
  double m = 0.0;
  for (const EnhancementRow& r : rows) {
    m = std::max({m, std::abs(r.alpha_p1), std::abs(r.alpha_0), std::abs(r.alpha_m1)});
  }
  return m;
}

double gslac_alpha_limit(const spin::NVParams& params) {
  return params.gamma_e_hz_per_g / (std::sqrt(2.0) * params.gamma_n_hz_per_g);
}

}  // namespace nvgyro::protocols
