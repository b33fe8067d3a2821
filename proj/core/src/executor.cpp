#include "nvgyro/executor.hpp"

#include <cmath>
#include <cstdio>

#include "nvgyro/errors.hpp"
#include "nvgyro/noise.hpp"
#include "nvgyro/units.hpp"

namespace nvgyro::seq {

using spin::Complex;
using spin::kDim;
using spin::label_at;
using spin::SpinLabel;

namespace {

constexpr auto kN = static_cast<Eigen::Index>(kDim);

std::size_t idx(int ms, int twice_mi) { return spin::canonical_index(SpinLabel{ms, twice_mi}); }

double mi_of(std::size_t k) { return 0.5 * label_at(k).twice_mi; }

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

void check_step(const Matrix6c& rho, std::size_t line, const char* what) {
  const DensityState s{rho};
  const double tr = s.trace_error();
  const double herm = s.hermiticity_error();
  if (tr > kStateTolerance || herm > kStateTolerance || !std::isfinite(tr)) {
    throw NumericalError("non-physical state after " + std::string(what) + " (line " +
                         std::to_string(line) + "): trace error " + sci(tr) +
                         ", hermiticity error " + sci(herm));
  }
}

Matrix6c rotation(const std::vector<detail::Line>& lines, double angle, double phase,
                  const std::array<double, kDim>& energies, double t, PhaseReference ref) {
  Matrix6c r = Matrix6c::Identity();
  const double c = std::cos(angle / 2.0);
  const double s = std::sin(angle / 2.0);
  for (const detail::Line& line : lines) {
    double phi = phase;
    if (ref == PhaseReference::kLab) phi += (energies[line.b] - energies[line.a]) * t;
    const auto a = static_cast<Eigen::Index>(line.a);
    const auto b = static_cast<Eigen::Index>(line.b);
    r(a, a) = c;
    r(b, b) = c;
    r(a, b) = Complex(0.0, -s) * std::polar(1.0, -phi);
    r(b, a) = Complex(0.0, -s) * std::polar(1.0, phi);
  }
  return r;
}

}  // namespace

// ------------------------------------------------------------ DensityState

double DensityState::trace_error() const { return std::abs(rho.trace() - Complex(1.0, 0.0)); }

double DensityState::hermiticity_error() const { return (rho - rho.adjoint()).cwiseAbs().maxCoeff(); }

double DensityState::min_eigenvalue() const {
  const Matrix6c h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix6c> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

double ExecutionResult::population(int ms) const {
  double p = 0.0;
  for (std::size_t k = 0; k < kDim; ++k) {
    if (label_at(k).ms == ms) p += state.rho(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)).real();
  }
  return p;
}

// ------------------------------------------------------------ lines

namespace detail {

std::vector<Line> addressed_lines(const PulseSpec& spec) {
  std::vector<Line> lines;
  if (spec.band == Band::kMicrowave) {
    for (int m : {1, -1}) {
      if (spec.select && *spec.select != m) continue;
      lines.push_back({idx(0, m), idx(spec.sq_ms, m)});
    }
  } else {
    for (int ms : {1, 0, -1}) {
      if (spec.select && *spec.select != ms) continue;
      lines.push_back({idx(ms, 1), idx(ms, -1)});
    }
  }
  return lines;
}

std::vector<Line> all_lines(const PulseSpec& spec) {
  PulseSpec open = spec;
  open.select.reset();
  return addressed_lines(open);
}

}  // namespace detail

// ------------------------------------------------------------ Executor

Executor::Executor(const spin::NVParams& params, const spin::FieldVector& field)
    : params_(params), field_(field) {
  params_.validate();
  field_.validate();
  nominal_ = spin::eigensystem(spin::build_hamiltonian(params_, field_));
  basis_ = nominal_.dressed_basis();
  energies_ = nominal_.dressed_energies();
}

DrawContext Executor::prepare(const noise::NoiseDraw& draw, double iz_rate_rad_s) const {
  if (!std::isfinite(iz_rate_rad_s)) throw InvalidArgument("rotation rate must be finite");
  DrawContext ctx;
  std::array<double, kDim> iz{};
  for (std::size_t k = 0; k < kDim; ++k) iz[k] = -iz_rate_rad_s * mi_of(k);

  const bool quiet = draw.d_bz_g == 0.0 && draw.d_bx_g == 0.0 && draw.d_by_g == 0.0 &&
                     draw.d_azz_hz == 0.0;
  if (quiet) {
    ctx.shifts = iz;
    ctx.diagonal_shifts = iz;
    ctx.diagonal = true;
    return ctx;
  }

  const Matrix6c h = spin::build_hamiltonian(params_, field_, draw).matrix();
  Matrix6c perturbation = basis_.adjoint() * h * basis_;
  for (std::size_t k = 0; k < kDim; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    perturbation(kk, kk) -= energies_[k] - iz[k];
  }
  perturbation = 0.5 * (perturbation + perturbation.adjoint()).eval();

  Matrix6c full = perturbation;
  for (std::size_t k = 0; k < kDim; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    full(kk, kk) += energies_[k];
  }
  const spin::LabeledEigensystem es = spin::eigensystem_in_basis(full, Matrix6c::Identity());
  ctx.mixing = es.dressed_basis();
  ctx.diagonal = false;
  for (std::size_t j = 0; j < kDim; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    // Rayleigh quotient relative to E_j: avoids cancelling two GHz-scale
    // numbers.
    const auto v = ctx.mixing.col(jj);
    double shift = (v.adjoint() * perturbation * v)(0, 0).real();
    for (std::size_t k = 0; k < kDim; ++k) {
      shift += std::norm(v(static_cast<Eigen::Index>(k))) * (energies_[k] - energies_[j]);
    }
    ctx.shifts[j] = shift;
    ctx.diagonal_shifts[j] = perturbation(jj, jj).real();
  }
  return ctx;
}

ExecutionResult Executor::run(const Sequence& seq, const DrawContext& ctx,
                              const Bindings& bindings, const RunOptions& options) const {
  const Bindings b = seq.resolve(bindings);
  ExecutionResult result;
  Matrix6c rho;
  if (options.initial_state) {
    rho = basis_.adjoint() * *options.initial_state * basis_;
  } else {
    rho = Matrix6c::Zero();
    const auto k = static_cast<Eigen::Index>(idx(0, 1));
    rho(k, k) = 1.0;
  }
  check_step(rho, 0, "initial state");

  double t = 0.0;
  bool read = false;
  const auto apply = [&](const Matrix6c& u, std::size_t line, const char* what) {
    rho = (u * rho * u.adjoint()).eval();
    check_step(rho, line, what);
    rho = 0.5 * (rho + rho.adjoint()).eval();
  };
  const auto lab_phases = [&](double sign) {
    for (Eigen::Index k = 0; k < kN; ++k) {
      for (Eigen::Index l = 0; l < kN; ++l) {
        if (k == l) continue;
        rho(k, l) *= std::polar(1.0, sign * (energies_[static_cast<std::size_t>(k)] -
                                             energies_[static_cast<std::size_t>(l)]) * t);
      }
    }
  };

  for (const Element& element : seq.elements) {
    const std::size_t line = element.line;
    const auto& body = element.body;

    if (const auto* p = std::get_if<IdealPulse>(&body)) {
      const double angle = p->spec.angle.evaluate(b);
      if (!(angle > 0.0 && angle <= kTwoPi + 1e-12)) {
        throw BindingError("pulse angle " + std::to_string(angle) + " outside (0, 2pi] (line " +
                           std::to_string(line) + ")");
      }
      apply(rotation(detail::addressed_lines(p->spec), angle, p->spec.phase.evaluate(b),
                     energies_, t, options.phase_reference),
            line, "pulse");
    } else if (std::holds_alternative<DQPulse>(body)) {
      for (const IdealPulse& sub : expand_dq()) {
        apply(rotation(detail::addressed_lines(sub.spec), sub.spec.angle.evaluate(b),
                       sub.spec.phase.evaluate(b), energies_, t, options.phase_reference),
              line, "dq pulse");
      }
    } else if (const auto* f = std::get_if<FinitePulse>(&body)) {
      detail::FinitePulseInput in;
      in.spec = f->spec;
      in.angle = f->spec.angle.evaluate(b);
      in.phase = f->spec.phase.evaluate(b);
      in.rabi_hz = f->rabi_hz.evaluate(b);
      in.detuning_hz = f->detuning_hz.evaluate(b);
      in.cutoff_hz = f->cutoff_hz.evaluate(b);
      if (options.phase_reference == PhaseReference::kLab) {
        const detail::Line target = detail::addressed_lines(f->spec).front();
        in.phase += (energies_[target.b] - energies_[target.a]) * t;
      }
      double duration = 0.0;
      const Matrix6c g = detail::finite_pulse_propagator(in, energies_, ctx.diagonal_shifts, t,
                                                         duration, result.warnings);
      apply(g, line, "finite pulse");
      t += duration;
    } else if (const auto* e = std::get_if<FreeEvolve>(&body)) {
      const double tau = e->duration_s.evaluate(b);
      if (!(tau >= 0.0) || !std::isfinite(tau)) {
        throw BindingError("evolution time must be finite and >= 0 (line " + std::to_string(line) + ")");
      }
      Matrix6c w = Matrix6c::Zero();
      if (ctx.diagonal) {
        for (std::size_t k = 0; k < kDim; ++k) {
          w(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = std::polar(1.0, -ctx.shifts[k] * tau);
        }
      } else {
        // W_kl = e^{i(E_k - E_l)t} sum_j M_kj conj(M_lj) e^{i(E_k - E_j - d_j) tau}
        const Matrix6c& m = ctx.mixing;
        for (std::size_t k = 0; k < kDim; ++k) {
          std::array<Complex, kDim> a{};
          for (std::size_t j = 0; j < kDim; ++j) {
            a[j] = m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) *
                   std::polar(1.0, (energies_[k] - energies_[j] - ctx.shifts[j]) * tau);
          }
          for (std::size_t l = 0; l < kDim; ++l) {
            Complex sum = 0.0;
            for (std::size_t j = 0; j < kDim; ++j) {
              sum += a[j] * std::conj(m(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(j)));
            }
            w(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) =
                sum * (k == l ? Complex(1.0, 0.0) : std::polar(1.0, (energies_[k] - energies_[l]) * t));
          }
        }
        // Each phase above is rounded on its own (arguments reach 1e8 rad),
        // which costs ~1e-9 of unitarity for strongly mixed draws; one
        // Newton-Schulz polar step restores it.
        w = (w * (1.5 * Matrix6c::Identity() - 0.5 * w.adjoint() * w)).eval();
      }
      apply(w, line, "evolution");
      t += tau;
    } else if (const auto* r = std::get_if<LaserReset>(&body)) {
      const double fid = r->fidelity.evaluate(b);
      if (!(fid >= 0.0 && fid <= 1.0)) {
        throw BindingError("reset fidelity outside [0, 1] (line " + std::to_string(line) + ")");
      }
      lab_phases(-1.0);
      const Matrix6c bare = basis_ * rho * basis_.adjoint();
      Eigen::Matrix2cd sigma = Eigen::Matrix2cd::Zero();
      for (int ms : {1, 0, -1}) {
        for (int i = 0; i < 2; ++i) {
          for (int j = 0; j < 2; ++j) {
            sigma(i, j) += bare(static_cast<Eigen::Index>(idx(ms, 1 - 2 * i)),
                                static_cast<Eigen::Index>(idx(ms, 1 - 2 * j)));
          }
        }
      }
      const Eigen::Matrix2cd nuclear = fid * sigma + (1.0 - fid) * 0.5 * Eigen::Matrix2cd::Identity();
      Matrix6c reset = Matrix6c::Zero();
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          reset(static_cast<Eigen::Index>(idx(r->ms, 1 - 2 * i)),
                static_cast<Eigen::Index>(idx(r->ms, 1 - 2 * j))) = nuclear(i, j);
        }
      }
      rho = basis_.adjoint() * reset * basis_;
      lab_phases(1.0);
      check_step(rho, line, "reset");
      rho = 0.5 * (rho + rho.adjoint()).eval();
    } else if (const auto* ro = std::get_if<Readout>(&body)) {
      result.state.rho = rho;
      result.readout = result.population(ro->ms);
      read = true;
    }
  }
  if (!read) throw BindingError("sequence has no readout");

  result.state.rho = rho;
  result.elapsed_s = t;
  const double min_eig = result.state.min_eigenvalue();
  if (min_eig < -kStateTolerance) {
    throw NumericalError("density matrix lost positivity (min eigenvalue " + std::to_string(min_eig) + ")");
  }
  return result;
}

ExecutionResult execute(const Sequence& seq, const spin::NVParams& params,
                        const spin::FieldVector& field, const noise::NoiseDraw& draw,
                        const Bindings& bindings, const RunOptions& options) {
  const Executor exec(params, field);
  return exec.run(seq, exec.prepare(draw), bindings, options);
}

double readout_signal(const DensityState& state, const ReadoutModel& model, std::uint64_t seed,
                      std::uint64_t index) {
  if (model.shots < 1) throw InvalidArgument("readout needs at least one shot");
  double p0 = 0.0;
  for (std::size_t k = 0; k < kDim; ++k) {
    if (label_at(k).ms == 0) p0 += state.rho(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)).real();
  }
  double value = model.offset + model.contrast * p0;
  if (model.shot_noise_std > 0.0) {
    noise::CounterRng rng(seed, index, noise::streams::kShotNoise);
    value += rng.normal() * model.shot_noise_std / std::sqrt(static_cast<double>(model.shots));
  }
  return value;
}

}  // namespace nvgyro::seq
