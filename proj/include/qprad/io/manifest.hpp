#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace qprad::io {

std::string sha256_hex(const std::string& bytes);

/// Writes via a temporary sibling and rename, so readers never see a partial file.
void write_atomic(const std::filesystem::path& path, const std::string& bytes);

struct OutputFile {
  std::string name;  // relative to the run directory
  std::string bytes;
};

struct RunManifest {
  std::string command;
  std::string tool_version;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> checksums;  // file name, sha256
  double wall_time_s = 0;
  std::string started_utc;
  int exit_code = 0;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
};

/// Writes every output atomically, then manifest.json last.
void commit_run(const std::filesystem::path& dir, const std::vector<OutputFile>& outputs,
                RunManifest manifest);

}  // namespace qprad::io
