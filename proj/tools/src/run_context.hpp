#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "geohealth/error.hpp"

namespace geohealth::cli {

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

/// Collects the inputs, outputs and resolved configuration of one command and
/// writes them to <out>/manifest.json.
class RunContext {
 public:
  RunContext(std::filesystem::path out_dir, std::string command, std::vector<std::string> args,
             std::uint64_t seed);

  /// Registers an input file; FileNotFound when it does not exist.
  std::filesystem::path input(const std::string& path);
  /// Atomically writes <out>/<name> and records its hash.
  void write(const std::string& name, std::string_view content);
  void set_config(nlohmann::json config) { config_ = std::move(config); }

  const std::filesystem::path& out_dir() const noexcept { return out_dir_; }
  std::uint64_t seed() const noexcept { return seed_; }
  Diagnostics& diagnostics() noexcept { return diag_; }
  Diagnostics* diag() noexcept { return &diag_; }

  nlohmann::json manifest() const;
  void finish();

 private:
  std::filesystem::path out_dir_;
  std::string command_;
  std::vector<std::string> args_;
  std::uint64_t seed_;
  nlohmann::json config_ = nlohmann::json::object();
  std::vector<std::pair<std::string, std::string>> inputs_;
  std::vector<std::pair<std::string, std::string>> outputs_;
  Diagnostics diag_;
};

}  // namespace geohealth::cli
