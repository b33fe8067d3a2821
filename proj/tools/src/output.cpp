#include "output.hpp"

#include <charconv>
#include <fstream>
#include <system_error>

#include "nvgyro/version.hpp"

namespace nvgyro::cli {

std::string format_number(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

Run::Run(std::string command, std::filesystem::path out_dir, std::uint64_t seed, json config)
    : command_(std::move(command)), out_dir_(std::move(out_dir)), seed_(seed), config_(std::move(config)) {
  const json keyed{{"command", command_}, {"config", config_}, {"seed", seed_}};
  hash_ = hex64(fnv1a(keyed.dump()));
}

std::string Run::manifest_line() const {
  return "# manifest: config_hash=" + hash_ + " seed=" + std::to_string(seed_) +
         " version=" + kVersion + " command=" + command_;
}

void Run::write_file(const std::string& name, const std::string& content) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir_, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir_.string() + "': " + ec.message());
  const std::filesystem::path path = out_dir_ / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
  out.close();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void Run::write_csv(const std::string& name, const std::vector<std::string>& header,
                    const std::vector<std::vector<double>>& rows) {
  std::string text = manifest_line() + "\n";
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i > 0) text += ',';
    text += header[i];
  }
  text += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) text += ',';
      text += format_number(row[i]);
    }
    text += '\n';
  }
  write_file(name, text);
  outputs_.push_back(name);
}

void Run::write_manifest() {
  json manifest{{"tool", "nvgyro"},
                {"version", kVersion},
                {"command", command_},
                {"config_hash", hash_},
                {"seed", seed_},
                {"config", config_},
                {"outputs", outputs_},
                {"results", results_}};
  write_file("manifest.json", manifest.dump(2) + "\n");
}

}  // namespace nvgyro::cli
