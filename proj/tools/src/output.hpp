#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "config.hpp"

namespace nvgyro::cli {

// Shortest decimal that round-trips the double.
std::string format_number(double value);

// One subcommand invocation: effective config, its hash and the artifacts
// written so far. Everything written is a pure function of the config.
class Run {
 public:
  Run(std::string command, std::filesystem::path out_dir, std::uint64_t seed, json config);

  const std::string& config_hash() const { return hash_; }
  std::string manifest_line() const;

  // `# manifest:` line, header, one line per row.
  void write_csv(const std::string& name, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows);
  json& results() { return results_; }
  // manifest.json with config, hash, seed, version, outputs and results.
  void write_manifest();

 private:
  void write_file(const std::string& name, const std::string& content);

  std::string command_;
  std::filesystem::path out_dir_;
  std::uint64_t seed_;
  json config_;
  std::string hash_;
  json results_ = json::object();
  std::vector<std::string> outputs_;
};

}  // namespace nvgyro::cli
