#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <optional>

#include <Eigen/Dense>

#include "nvgyro/noise_draw.hpp"

namespace nvgyro::spin {

using Complex = std::complex<double>;
using Matrix6c = Eigen::Matrix<Complex, 6, 6>;
using Vector6c = Eigen::Matrix<Complex, 6, 1>;

inline constexpr std::size_t kDim = 6;

// Physical constants of the 15NV ground state. Frequencies in cycles
// (Hz, Hz/G); they are converted to rad/s only inside the Hamiltonian.
struct NVParams {
  double zero_field_splitting_hz = 2.87e9;
  double gamma_e_hz_per_g = 2.8024e6;
  double gamma_n_hz_per_g = 431.6;
  double a_zz_hz = 3.03e6;
  double a_perp_hz = 3.65e6;
  double t2e_star_s = 0.69e-6;
  double t1e_s = 5e-3;
  double dazz_dt_hz_per_k = -272.0;

  // Throws InvalidArgument unless every frequency and time is finite and
  // strictly positive (the temperature coefficient may carry any sign).
  void validate() const;

  bool operator==(const NVParams&) const = default;
};

struct CartesianField {
  double x_g = 0.0;
  double y_g = 0.0;
  double z_g = 0.0;
};

// Magnetic field in the NV frame: magnitude, polar misalignment from the NV
// axis, azimuth.
struct FieldVector {
  double magnitude_g = 239.0;
  double theta_rad = 0.0;
  double phi_rad = 0.0;

  void validate() const;
  CartesianField cartesian() const;

  bool operator==(const FieldVector&) const = default;
};

// Adiabatic level label (m_S, m_I). m_I is stored doubled so it stays an
// integer: twice_mi = +1 for m_I = +1/2, -1 for m_I = -1/2.
struct SpinLabel {
  int ms = 0;
  int twice_mi = 1;

  bool operator==(const SpinLabel&) const = default;
};

// Canonical ordering [|+1,+1/2>, |+1,-1/2>, |0,+1/2>, |0,-1/2>, |-1,+1/2>,
// |-1,-1/2>]: index = (1 - m_S) * 2 + (1/2 - m_I).
constexpr std::size_t canonical_index(SpinLabel label) {
  return static_cast<std::size_t>((1 - label.ms) * 2 + (1 - label.twice_mi) / 2);
}
constexpr SpinLabel label_at(std::size_t index) {
  return SpinLabel{1 - static_cast<int>(index / 2),
                   index % 2 == 0 ? 1 : -1};
}

struct SpinOperators {
  Matrix6c sx, sy, sz, sz2, s_plus, s_minus;
  Matrix6c ix, iy, iz, i_plus, i_minus;
};

// S=1 (x) I=1/2 operators lifted to the product space in canonical order.
const SpinOperators& spin_operators();

class HermitianOperator {
 public:
  // Throws InvalidArgument if m differs from its adjoint by more than
  // 1e-12 relative to its norm.
  explicit HermitianOperator(const Matrix6c& m);

  const Matrix6c& matrix() const { return m_; }

 private:
  Matrix6c m_;
};

class UnitaryOperator {
 public:
  // Throws NumericalError if ||U^dagger U - 1|| exceeds 1e-10.
  explicit UnitaryOperator(const Matrix6c& m);

  const Matrix6c& matrix() const { return m_; }

 private:
  Matrix6c m_;
};

// Eigenvalues (rad/s) ascending, orthonormal eigenvectors as columns, and a
// bijective adiabatic label per level. Each eigenvector is phased so its
// component on the labelled canonical state is real and positive.
struct LabeledEigensystem {
  std::array<double, kDim> eigenvalues{};
  Matrix6c eigenvectors = Matrix6c::Zero();
  std::array<SpinLabel, kDim> labels{};

  std::size_t index_of(SpinLabel label) const;
  double energy(SpinLabel label) const { return eigenvalues[index_of(label)]; }
  Vector6c state(SpinLabel label) const {
    return eigenvectors.col(static_cast<Eigen::Index>(index_of(label)));
  }
  // Eigenvectors reordered so column i carries label_at(i).
  Matrix6c dressed_basis() const;
  // Energies reordered to canonical label order.
  std::array<double, kDim> dressed_energies() const;
};

// H = D Sz^2 + gamma_e B.S + gamma_n B.I + A_zz Sz Iz + A_perp (Sx Ix + Sy Iy)
// in rad/s. The optional draw offsets the field components and A_zz.
HermitianOperator build_hamiltonian(
    const NVParams& params, const FieldVector& field,
    const std::optional<noise::NoiseDraw>& perturbation = std::nullopt);

LabeledEigensystem eigensystem(const HermitianOperator& h);

// Labels eigenvectors of an arbitrary Hermitian matrix against the columns of
// `reference` (identity = canonical basis). Exposed for the executor, which
// labels noisy levels against the nominal dressed basis.
LabeledEigensystem eigensystem_in_basis(const Matrix6c& h, const Matrix6c& reference);

// |E(m_S,+1/2) - E(m_S,-1/2)| in Hz from exact diagonalization.
double nuclear_transition_frequency(const NVParams& params,
                                    const FieldVector& field, int ms);

struct ZqAngles {
  double theta_plus = 0.0;
  double theta_minus = 0.0;
};

// Minimum |denominator| (Hz) accepted by the closed-form ZQ angles.
inline constexpr double kGslacGuardHz = 1e3;

// tan(2 theta+) = 2 A_perp / (D + (gamma_e - gamma_n) Bz - A_zz/2)
// tan(2 theta-) = -2 A_perp / (D - (gamma_e - gamma_n) Bz - A_zz/2)
// Principal branch, so both angles vanish with A_perp. Throws
// GslacProximityError when a denominator falls below kGslacGuardHz.
ZqAngles zq_rotation_angles(const NVParams& params, double bz_g);

struct EnhancementFactors {
  double alpha_p1 = 0.0;
  double alpha_0 = 0.0;
  double alpha_m1 = 0.0;
  double theta_plus = 0.0;
  double theta_minus = 0.0;
  double kappa = 0.0;

  double alpha(int ms) const;
};

EnhancementFactors enhancement_factors(const NVParams& params, double bz_g);

// Low-field constant approximation alpha = 1 - 2 kappa + 3 kappa m_S^2 with
// kappa = gamma_e A_perp / (gamma_n D). Only meaningful for gamma_e B << D.
struct ApproxAlpha {
  double kappa = 0.0;
  double alpha = 0.0;
};
ApproxAlpha approx_alpha(const NVParams& params, int ms);

enum class AlphaSource { kExact, kApprox };

// omega_n(theta) = gamma_n B sqrt(cos^2 theta + alpha_0^2 sin^2 theta), Hz.
double closed_form_omega_n(const NVParams& params, double b_g, double theta_rad,
                           double alpha_0);
double closed_form_omega_n(const NVParams& params, double b_g, double theta_rad,
                           AlphaSource source = AlphaSource::kExact);

// f(theta) = sqrt((1 + a^4 tan^2) / (1 + a^2 tan^2)). theta = pi/2 returns
// the analytic limit |alpha_0|.
double noise_enhancement_f(double theta_rad, double alpha_0);

// Delta_B = 1 / (gamma_e T2e*) with gamma_e in rad/s/G, in Gauss.
double delta_b_from_t2e(const NVParams& params);

// T = 1/(gamma_n Delta_B f(theta)); with include_t1e the extra rate
// 1/(1.5 T1e) is added. The first overload uses the approximate alpha_0.
double predicted_t2n(const NVParams& params, double theta_rad, bool include_t1e);
double predicted_t2n(const NVParams& params, double theta_rad, bool include_t1e,
                     double alpha_0);

// exp(-i H t) by spectral decomposition; t in seconds, H in rad/s.
UnitaryOperator propagator(const HermitianOperator& h, double t_s);

}  // namespace nvgyro::spin
