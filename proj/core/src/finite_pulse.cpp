#include <cmath>
#include <sstream>

#include "nvgyro/errors.hpp"
#include "nvgyro/executor.hpp"
#include "nvgyro/units.hpp"

namespace nvgyro::seq::detail {

using spin::Complex;
using spin::kDim;

Matrix6c finite_pulse_propagator(const FinitePulseInput& in,
                                 const std::array<double, kDim>& energies,
                                 const std::array<double, kDim>& diagonal_shifts, double t_s,
                                 double& duration_s, std::vector<std::string>& warnings) {
  if (!std::isfinite(in.rabi_hz) || in.rabi_hz < 0.0) {
    throw BindingError("Rabi frequency must be finite and >= 0");
  }
  if (!(in.angle > 0.0 && in.angle <= kTwoPi + 1e-12)) {
    throw BindingError("pulse angle outside (0, 2pi]");
  }
  if (!std::isfinite(in.detuning_hz) || !(in.cutoff_hz > 0.0)) {
    throw BindingError("detuning must be finite and the cutoff positive");
  }
  duration_s = 0.0;
  if (in.rabi_hz == 0.0) return Matrix6c::Identity();

  if (in.cutoff_hz <= in.rabi_hz) {
    std::ostringstream msg;
    msg << "rotating-wave cutoff " << in.cutoff_hz << " Hz does not exceed the Rabi frequency "
        << in.rabi_hz << " Hz";
    warnings.push_back(msg.str());
  }

  const std::vector<Line> targets = addressed_lines(in.spec);
  const std::vector<Line> lines = all_lines(in.spec);

  double drive = 0.0;
  for (const Line& l : targets) drive += energies[l.b] - energies[l.a];
  drive = drive / static_cast<double>(targets.size()) + to_angular(in.detuning_hz);

  // Frame rotating at the drive: the "b" side of every line is lowered by
  // one drive quantum.
  std::array<double, kDim> eps = energies;
  for (const Line& l : lines) eps[l.b] = energies[l.b] - drive;

  Matrix6c h = Matrix6c::Zero();
  for (std::size_t k = 0; k < kDim; ++k) {
    h(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = eps[k] + diagonal_shifts[k];
  }
  const double half_rabi = 0.5 * to_angular(in.rabi_hz);
  const double cutoff = to_angular(in.cutoff_hz);
  for (const Line& l : lines) {
    const double detuning = energies[l.b] - energies[l.a] - drive;
    if (std::abs(detuning) >= cutoff) continue;
    const auto a = static_cast<Eigen::Index>(l.a);
    const auto b = static_cast<Eigen::Index>(l.b);
    h(a, b) = half_rabi * std::polar(1.0, -in.phase);
    h(b, a) = half_rabi * std::polar(1.0, in.phase);
  }

  duration_s = in.angle / to_angular(in.rabi_hz);
  const Matrix6c u = spin::propagator(spin::HermitianOperator(h), duration_s).matrix();

  // Back to the interaction picture of the nominal Hamiltonian:
  // G_kl = U_kl exp(i[(eps_k - eps_l) t + eps_k T]).
  Matrix6c g;
  for (std::size_t k = 0; k < kDim; ++k) {
    for (std::size_t l = 0; l < kDim; ++l) {
      const double phase = (k == l ? 0.0 : (eps[k] - eps[l]) * t_s) + eps[k] * duration_s;
      g(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) =
          u(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) * std::polar(1.0, phase);
    }
  }
  return g;
}

}  // namespace nvgyro::seq::detail
