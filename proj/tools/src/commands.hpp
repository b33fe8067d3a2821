#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace nvgyro::cli {

// Command-line overrides; unset options fall back to the config file.
struct Flags {
  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::string> mode;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> draws;
  std::size_t threads = 0;

  std::optional<double> bmax_g;
  std::optional<std::uint64_t> points;
  std::optional<std::string> axis;

  std::vector<double> angles_deg;
  std::optional<double> field_g;

  std::optional<std::uint64_t> rounds;
  std::optional<double> noise_hz;

  std::optional<std::string> emulation;
  std::optional<std::uint64_t> repetitions;
  std::optional<double> shot_noise;

  std::string seq_file;
  bool print = false;
  std::vector<std::string> bindings;
};

void cmd_enhancement(const Flags& flags, std::ostream& out);
void cmd_misalign(const Flags& flags, std::ostream& out);
void cmd_ramsey(const Flags& flags, std::ostream& out);
void cmd_dq_ramsey(const Flags& flags, std::ostream& out);
void cmd_polarize(const Flags& flags, std::ostream& out);
void cmd_tempshift(const Flags& flags, std::ostream& out);
void cmd_gyro(const Flags& flags, std::ostream& out, std::ostream& err);
void cmd_seq_check(const Flags& flags, std::ostream& out);

}  // namespace nvgyro::cli
