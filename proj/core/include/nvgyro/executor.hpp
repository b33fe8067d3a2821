#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nvgyro/noise_draw.hpp"
#include "nvgyro/sequence.hpp"
#include "nvgyro/spin_core.hpp"

namespace nvgyro::seq {

using spin::Matrix6c;

// Density operator with the physicality checks used by the executor.
struct DensityState {
  Matrix6c rho = Matrix6c::Zero();

  double trace_error() const;
  double hermiticity_error() const;
  double min_eigenvalue() const;
};

inline constexpr double kStateTolerance = 1e-10;

// How a pulse phase is referenced. kRotating: each transition's own frame
// (the frame phase advances at the nominal transition frequency, so a
// noiseless Ramsey fringe is flat in t). kLab: a fixed reference, so the
// fringe oscillates at the transition frequency.
enum class PhaseReference { kRotating, kLab };

// Per-draw free-evolution data: eigensystem of the perturbed Hamiltonian
// expressed in the nominal dressed basis.
struct DrawContext {
  Matrix6c mixing = Matrix6c::Identity();  // columns: perturbed eigenvectors
  std::array<double, spin::kDim> shifts{};  // Lambda_j - E_j, rad/s
  std::array<double, spin::kDim> diagonal_shifts{};  // diag of the perturbation
  bool diagonal = true;
};

struct RunOptions {
  // Initial state in the canonical (bare) basis; default |0,+1/2><0,+1/2|.
  std::optional<Matrix6c> initial_state;
  PhaseReference phase_reference = PhaseReference::kRotating;
};

struct ExecutionResult {
  // Interaction picture w.r.t. the nominal Hamiltonian, dressed basis
  // (column i of the nominal eigenvectors carries spin::label_at(i)).
  DensityState state;
  double readout = 0.0;
  double elapsed_s = 0.0;
  std::vector<std::string> warnings;

  // Population of the dressed levels with electron projection ms.
  double population(int ms) const;
};

// Executes sequences for one (params, field). The nominal eigensystem is
// computed once; per-draw data via prepare().
class Executor {
 public:
  Executor(const spin::NVParams& params, const spin::FieldVector& field);

  // iz_rate_rad_s adds -Omega * I_z (I_z diagonal in the dressed basis) to
  // the free-evolution Hamiltonian: the rotating-frame term of a gyroscope.
  DrawContext prepare(const noise::NoiseDraw& draw, double iz_rate_rad_s = 0.0) const;

  ExecutionResult run(const Sequence& seq, const DrawContext& ctx, const Bindings& bindings,
                      const RunOptions& options = {}) const;

  const spin::LabeledEigensystem& nominal() const { return nominal_; }
  const Matrix6c& dressed_basis() const { return basis_; }
  const std::array<double, spin::kDim>& dressed_energies() const { return energies_; }

 private:
  spin::NVParams params_;
  spin::FieldVector field_;
  spin::LabeledEigensystem nominal_;
  Matrix6c basis_;
  std::array<double, spin::kDim> energies_{};
};

ExecutionResult execute(const Sequence& seq, const spin::NVParams& params,
                        const spin::FieldVector& field, const noise::NoiseDraw& draw,
                        const Bindings& bindings, const RunOptions& options = {});

// Linear photoluminescence model for the m_S = 0 population.
struct ReadoutModel {
  double contrast = 1.0;
  double offset = 0.0;
  std::uint64_t shots = 1;
  double shot_noise_std = 0.0;
};

// offset + contrast * P(m_S = 0) + eps, eps ~ N(0, shot_noise_std^2 / shots),
// deterministic in (seed, index).
double readout_signal(const DensityState& state, const ReadoutModel& model,
                      std::uint64_t seed = 0, std::uint64_t index = 0);

// Internal pieces shared with the finite-pulse integrator.
namespace detail {

// Index of the "b" partner and the "a" side for one ideal line.
struct Line {
  std::size_t a = 0;
  std::size_t b = 0;
};

// Lines addressed by a pulse spec, dressed (canonical-label) indices.
std::vector<Line> addressed_lines(const PulseSpec& spec);
// Every line of the same band/transition, ignoring selectivity.
std::vector<Line> all_lines(const PulseSpec& spec);

struct FinitePulseInput {
  PulseSpec spec;
  double angle = 0.0;
  double phase = 0.0;
  double rabi_hz = 0.0;
  double detuning_hz = 0.0;
  double cutoff_hz = 0.0;
};

// Interaction-picture propagator for a square pulse starting at elapsed
// time t_s; returns the duration through duration_s.
Matrix6c finite_pulse_propagator(const FinitePulseInput& in,
                                 const std::array<double, spin::kDim>& energies,
                                 const std::array<double, spin::kDim>& diagonal_shifts,
                                 double t_s, double& duration_s,
                                 std::vector<std::string>& warnings);

}  // namespace detail

}  // namespace nvgyro::seq
