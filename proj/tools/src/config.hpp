#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nvgyro/errors.hpp"
#include "nvgyro/noise.hpp"
#include "nvgyro/spin_core.hpp"

namespace nvgyro::cli {

using json = nlohmann::json;

class IoError : public Error {
 public:
  using Error::Error;
};

// Read-only view of one JSON object with its dotted path for diagnostics.
// A missing section behaves as an empty object.
class Node {
 public:
  Node(const json* value, std::string path);

  bool has(std::string_view key) const;
  Node child(std::string_view key) const;
  // Throws ConfigError naming any key outside `allowed`.
  void allow(std::initializer_list<std::string_view> allowed) const;

  double number(std::string_view key, double fallback) const;
  std::uint64_t count(std::string_view key, std::uint64_t fallback) const;
  bool flag(std::string_view key, bool fallback) const;
  std::string text(std::string_view key, std::string fallback) const;
  std::vector<double> numbers(std::string_view key, std::vector<double> fallback) const;
  const json* raw(std::string_view key) const;

  std::string path(std::string_view key) const;

 private:
  const json* value_;
  std::string path_;
};

// Empty object when path is empty. IoError when unreadable, ConfigError on
// malformed JSON or a non-object root.
json load_config(const std::string& path);

spin::NVParams read_params(const Node& root);
spin::FieldVector read_field(const Node& root);

enum class NoisePreset { kNone, kMagnetic, kCalibratedUnprotected };

// noise.preset picks the starting model (default `fallback`); explicit keys
// override it.
noise::NoiseModel read_noise(const Node& root, const spin::NVParams& params, NoisePreset fallback);

json to_json(const spin::NVParams& params);
json to_json(const spin::FieldVector& field);
json to_json(const noise::NoiseModel& model);

std::uint64_t fnv1a(std::string_view data);
std::string hex64(std::uint64_t value);

}  // namespace nvgyro::cli
