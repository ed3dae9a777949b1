#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "germeval/csv.hpp"

namespace germeval {

inline std::uint64_t fnv1a_hash(std::string_view data) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

inline std::string hash_hex(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string hash_file(const std::string& path) {
  return hash_hex(fnv1a_hash(csv::read_file(path)));
}

/// Hash of the canonical (sorted-key) JSON dump; keys a run's artifact
/// directory and makes reruns comparable.
inline std::string config_hash(const nlohmann::json& config) {
  return hash_hex(fnv1a_hash(config.dump()));
}

/// Replay record for a command: configuration, input hashes, outputs.
/// The timestamp is the only part of a run that is not reproducible, and it
/// lives here and nowhere else.
struct RunManifest {
  std::string command;
  nlohmann::json config;
  std::vector<std::pair<std::string, std::string>> inputs;   // path, content hash
  std::vector<std::string> outputs;

  void add_input(const std::string& path) { inputs.emplace_back(path, hash_file(path)); }
  void add_output(const std::string& path) { outputs.push_back(path); }

  nlohmann::json to_json() const {
    nlohmann::json in = nlohmann::json::object();
    for (const auto& [path, hash] : inputs) in[path] = hash;
    const std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return nlohmann::json{{"command", command}, {"config", config},
                          {"config_hash", config_hash(config)}, {"inputs", in},
                          {"outputs", outputs}, {"timestamp", stamp}};
  }

  void write(const std::string& dir) const {
    csv::write_file((std::filesystem::path(dir) / "manifest.json").string(),
                    to_json().dump(2) + "\n");
  }
};

}  // namespace germeval
