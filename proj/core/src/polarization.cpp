#include <array>
#include <charconv>

#include "nvgyro/errors.hpp"
#include "nvgyro/protocols.hpp"

namespace nvgyro::protocols {
namespace {

std::string hz(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr) + "Hz";
}

std::string plain(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace

std::string polarization_sequence_text(const PolarizationConfig& cfg, std::size_t rounds) {
  std::string text = "# nuclear polarization, " + std::to_string(rounds) + " round(s)\n";
  for (std::size_t r = 0; r < rounds; ++r) {
    if (cfg.finite_mw) {
      text += "fpulse mw sq(-1) pi mi(-1/2) rabi=" + hz(cfg.mw_rabi_hz) + " cutoff=" + hz(cfg.cutoff_hz) + "\n";
    } else {
      text += "pulse mw sq(-1) pi mi(-1/2)\n";
    }
    text += "pulse rf ms(-1) pi\n";
    text += "reset fidelity=" + plain(cfg.nuclear_fidelity) + "\n";
  }
  text += "readout\n";
  return text;
}

PolarizationResult polarization_sequence(const PolarizationConfig& cfg) {
  if (!(cfg.nuclear_fidelity >= 0.0 && cfg.nuclear_fidelity <= 1.0)) {
    throw InvalidArgument("nuclear fidelity must lie in [0, 1]");
  }
  const seq::Executor exec(cfg.params, cfg.field);
  const seq::DrawContext ctx = exec.prepare(noise::NoiseDraw{});

  seq::RunOptions opts;
  seq::Matrix6c initial = seq::Matrix6c::Zero();
  for (int twice_mi : {1, -1}) {
    const auto k = static_cast<Eigen::Index>(spin::canonical_index({0, twice_mi}));
    initial(k, k) = 0.5;
  }
  opts.initial_state = initial;

  PolarizationResult result;
  for (std::size_t r = 0; r <= cfg.rounds; ++r) {
    const std::string text = polarization_sequence_text(cfg, r);
    const seq::ExecutionResult run = exec.run(seq::parse_sequence(text), ctx, {}, opts);
    double p_up = 0.0;
    for (std::size_t k = 0; k < spin::kDim; ++k) {
      if (spin::label_at(k).twice_mi == 1) {
        p_up += run.state.rho(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)).real();
      }
    }
    if (r > 0) result.per_round.push_back(p_up);
    result.polarization = p_up;
    if (r == cfg.rounds) {
      result.sequence_text = text;
      result.warnings = run.warnings;
    }
  }
  return result;
}

}  // namespace nvgyro::protocols
