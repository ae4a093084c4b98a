#include "run_context.hpp"

#include <algorithm>

#include <Eigen/Core>
#include <openssl/evp.h>

#include "geohealth/csv.hpp"

namespace geohealth::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(csv::read_text(path)); }

RunContext::RunContext(fs::path out_dir, std::string command, std::vector<std::string> args, std::uint64_t seed)
    : out_dir_(std::move(out_dir)), command_(std::move(command)), args_(std::move(args)), seed_(seed) {}

fs::path RunContext::input(const std::string& path) {
  const fs::path p(path);
  if (!fs::is_regular_file(p)) throw Error(ErrorCode::FileNotFound, "cannot open '" + path + "'");
  const std::string hash = sha256_file(p);
  const auto it = std::find_if(inputs_.begin(), inputs_.end(), [&](const auto& e) { return e.first == path; });
  if (it == inputs_.end()) inputs_.emplace_back(path, hash);
  return p;
}

void RunContext::write(const std::string& name, std::string_view content) {
  const fs::path target = out_dir_ / name;
  fs::create_directories(target.parent_path());
  csv::write_text_atomic(target, content);
  const std::string hash = sha256_hex(content);
  const auto it = std::find_if(outputs_.begin(), outputs_.end(), [&](const auto& e) { return e.first == name; });
  if (it == outputs_.end()) outputs_.emplace_back(name, hash);
  else it->second = hash;
}

json RunContext::manifest() const {
  json inputs = json::array(), outputs = json::array();
  for (const auto& [p, h] : inputs_) inputs.push_back({{"path", p}, {"sha256", h}});
  auto sorted = outputs_;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& [p, h] : sorted) outputs.push_back({{"path", p}, {"sha256", h}});
  return {{"tool", "geohealth"},
          {"command", command_},
          {"args", args_},
          {"seed", seed_},
          {"config", config_},
          {"inputs", inputs},
          {"outputs", outputs},
          {"warnings", diag_.warnings},
          {"versions",
           {{"geohealth", GEOHEALTH_VERSION},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}}};
}

void RunContext::finish() {
  fs::create_directories(out_dir_);
  csv::write_text_atomic(out_dir_ / "manifest.json", manifest().dump(2) + "\n");
}

}  // namespace geohealth::cli
