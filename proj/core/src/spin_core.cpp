#include "nvgyro/spin_core.hpp"

#include <cmath>
#include <string>

#include "nvgyro/errors.hpp"
#include "nvgyro/units.hpp"

namespace nvgyro::spin {
namespace {

void require_positive(double value, const char* name) {
  if (!std::isfinite(value) || value <= 0.0) {
    throw InvalidArgument(std::string("NVParams.") + name +
                          " must be finite and > 0");
  }
}

Matrix6c kron(const Eigen::Matrix3cd& a, const Eigen::Matrix2cd& b) {
  Matrix6c out;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    }
  }
  return out;
}

SpinOperators make_operators() {
  const double r = 1.0 / std::sqrt(2.0);
  const Complex i{0.0, 1.0};

  // Spin-1 in the |+1>, |0>, |-1> ordering.
  Eigen::Matrix3cd sx, sy, sz;
  sx << 0, r, 0, r, 0, r, 0, r, 0;
  sy << 0, -i * r, 0, i * r, 0, -i * r, 0, i * r, 0;
  sz << 1, 0, 0, 0, 0, 0, 0, 0, -1;

  // Spin-1/2 in the |+1/2>, |-1/2> ordering.
  Eigen::Matrix2cd ix, iy, iz;
  ix << 0, 0.5, 0.5, 0;
  iy << 0, -0.5 * i, 0.5 * i, 0;
  iz << 0.5, 0, 0, -0.5;

  const Eigen::Matrix3cd e3 = Eigen::Matrix3cd::Identity();
  const Eigen::Matrix2cd e2 = Eigen::Matrix2cd::Identity();

  SpinOperators ops;
  ops.sx = kron(sx, e2);
  ops.sy = kron(sy, e2);
  ops.sz = kron(sz, e2);
  ops.sz2 = kron(sz * sz, e2);
  ops.s_plus = ops.sx + i * ops.sy;
  ops.s_minus = ops.sx - i * ops.sy;
  ops.ix = kron(e3, ix);
  ops.iy = kron(e3, iy);
  ops.iz = kron(e3, iz);
  ops.i_plus = ops.ix + i * ops.iy;
  ops.i_minus = ops.ix - i * ops.iy;
  return ops;
}

}  // namespace

void NVParams::validate() const {
  require_positive(zero_field_splitting_hz, "zero_field_splitting_hz");
  require_positive(gamma_e_hz_per_g, "gamma_e_hz_per_g");
  require_positive(gamma_n_hz_per_g, "gamma_n_hz_per_g");
  require_positive(a_zz_hz, "a_zz_hz");
  require_positive(a_perp_hz, "a_perp_hz");
  require_positive(t2e_star_s, "t2e_star_s");
  require_positive(t1e_s, "t1e_s");
  if (!std::isfinite(dazz_dt_hz_per_k)) {
    throw InvalidArgument("NVParams.dazz_dt_hz_per_k must be finite");
  }
}

void FieldVector::validate() const {
  if (!std::isfinite(magnitude_g) || magnitude_g < 0.0) {
    throw InvalidArgument("field magnitude must be finite and >= 0");
  }
  if (!std::isfinite(theta_rad) || theta_rad < 0.0 || theta_rad > kPi) {
    throw InvalidArgument("field theta must lie in [0, pi]");
  }
  if (!std::isfinite(phi_rad)) {
    throw InvalidArgument("field phi must be finite");
  }
}

CartesianField FieldVector::cartesian() const {
  const double transverse = magnitude_g * std::sin(theta_rad);
  return {transverse * std::cos(phi_rad), transverse * std::sin(phi_rad),
          magnitude_g * std::cos(theta_rad)};
}

const SpinOperators& spin_operators() {
  static const SpinOperators ops = make_operators();
  return ops;
}

HermitianOperator::HermitianOperator(const Matrix6c& m) : m_(m) {
  const double scale = std::max(1.0, m.norm());
  if (!m.allFinite()) {
    throw InvalidArgument("operator has non-finite entries");
  }
  if ((m - m.adjoint()).norm() > 1e-12 * scale) {
    throw InvalidArgument("operator is not Hermitian");
  }
}

UnitaryOperator::UnitaryOperator(const Matrix6c& m) : m_(m) {
  if ((m.adjoint() * m - Matrix6c::Identity()).norm() > 1e-10) {
    throw NumericalError("operator is not unitary");
  }
}

HermitianOperator build_hamiltonian(const NVParams& params,
                                    const FieldVector& field,
                                    const std::optional<noise::NoiseDraw>& perturbation) {
  params.validate();
  field.validate();

  CartesianField b = field.cartesian();
  double a_zz = params.a_zz_hz;
  if (perturbation) {
    b.x_g += perturbation->d_bx_g;
    b.y_g += perturbation->d_by_g;
    b.z_g += perturbation->d_bz_g;
    a_zz += perturbation->d_azz_hz;
  }
  if (!std::isfinite(b.x_g) || !std::isfinite(b.y_g) || !std::isfinite(b.z_g) ||
      !std::isfinite(a_zz)) {
    throw InvalidArgument("non-finite noise perturbation");
  }

  const SpinOperators& op = spin_operators();
  const double d = to_angular(params.zero_field_splitting_hz);
  const double ge = to_angular(params.gamma_e_hz_per_g);
  const double gn = to_angular(params.gamma_n_hz_per_g);
  const double azz = to_angular(a_zz);
  const double aperp = to_angular(params.a_perp_hz);

  Matrix6c h = d * op.sz2;
  h += ge * (b.x_g * op.sx + b.y_g * op.sy + b.z_g * op.sz);
  h += gn * (b.x_g * op.ix + b.y_g * op.iy + b.z_g * op.iz);
  h += azz * (op.sz * op.iz);
  h += aperp * (op.sx * op.ix + op.sy * op.iy);
  // Products of commuting Hermitian factors carry rounding asymmetry.
  h = 0.5 * (h + h.adjoint()).eval();
  return HermitianOperator(h);
}

double nuclear_transition_frequency(const NVParams& params,
                                    const FieldVector& field, int ms) {
  if (ms < -1 || ms > 1) {
    throw InvalidArgument("manifold m_S must be -1, 0 or +1");
  }
  const LabeledEigensystem es = eigensystem(build_hamiltonian(params, field));
  return to_cycles(std::abs(es.energy({ms, 1}) - es.energy({ms, -1})));
}

double delta_b_from_t2e(const NVParams& params) {
  if (std::isinf(params.t2e_star_s)) return 0.0;
  if (!(params.t2e_star_s > 0.0)) {
    throw InvalidArgument("T2e* must be > 0");
  }
  return 1.0 / (to_angular(params.gamma_e_hz_per_g) * params.t2e_star_s);
}

double noise_enhancement_f(double theta_rad, double alpha_0) {
  if (!std::isfinite(theta_rad) || theta_rad < 0.0 || theta_rad > kPi / 2.0) {
    throw InvalidArgument("noise enhancement needs theta in [0, pi/2]");
  }
  // tan overflows well before pi/2 is reached exactly; take the limit there.
  if (kPi / 2.0 - theta_rad < 1e-12) return std::abs(alpha_0);
  const double t2 = std::tan(theta_rad) * std::tan(theta_rad);
  const double a2 = alpha_0 * alpha_0;
  return std::sqrt((1.0 + a2 * a2 * t2) / (1.0 + a2 * t2));
}

double predicted_t2n(const NVParams& params, double theta_rad, bool include_t1e,
                     double alpha_0) {
  const double rate_b = to_angular(params.gamma_n_hz_per_g) *
                        delta_b_from_t2e(params) *
                        noise_enhancement_f(theta_rad, alpha_0);
  double rate = rate_b;
  if (include_t1e) rate += 1.0 / (1.5 * params.t1e_s);
  return 1.0 / rate;
}

double predicted_t2n(const NVParams& params, double theta_rad, bool include_t1e) {
  return predicted_t2n(params, theta_rad, include_t1e, approx_alpha(params, 0).alpha);
}

UnitaryOperator propagator(const HermitianOperator& h, double t_s) {
  if (!std::isfinite(t_s) || t_s < 0.0) {
    throw InvalidArgument("propagation time must be finite and >= 0");
  }
  if (t_s == 0.0) return UnitaryOperator(Matrix6c::Identity());
  Eigen::SelfAdjointEigenSolver<Matrix6c> solver(h.matrix());
  if (solver.info() != Eigen::Success) {
    throw NumericalError("Hermitian eigensolver did not converge");
  }
  const auto& v = solver.eigenvectors();
  Eigen::Matrix<Complex, 6, 1> phases;
  for (int k = 0; k < 6; ++k) {
    phases(k) = std::polar(1.0, -solver.eigenvalues()(k) * t_s);
  }
  return UnitaryOperator(v * phases.asDiagonal() * v.adjoint());
}

}  // namespace nvgyro::spin
