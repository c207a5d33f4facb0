#include "qprad/io/manifest.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <memory>

#include <openssl/evp.h>

#include "qprad/errors.hpp"

namespace qprad::io {

std::string sha256_hex(const std::string& bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw std::runtime_error("sha256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& bytes) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot move " + tmp + " into place: " + ec.message());
  }
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["tool_version"] = tool_version;
  j["config_sha256"] = config_hash;
  j["seed"] = seed;
  j["started_utc"] = started_utc;
  j["wall_time_s"] = wall_time_s;
  j["exit_code"] = exit_code;
  nlohmann::json files = nlohmann::json::object();
  for (const auto& [name, sum] : checksums) files[name] = sum;
  j["outputs_sha256"] = files;
  j["warnings"] = warnings;
  return j;
}

void commit_run(const std::filesystem::path& dir, const std::vector<OutputFile>& outputs,
                RunManifest manifest) {
  std::filesystem::create_directories(dir);
  manifest.checksums.clear();
  for (const auto& f : outputs) {
    std::filesystem::create_directories((dir / f.name).parent_path());
    write_atomic(dir / f.name, f.bytes);
    manifest.checksums.emplace_back(f.name, sha256_hex(f.bytes));
  }
  write_atomic(dir / "manifest.json", manifest.to_json().dump(2) + "\n");
}

}  // namespace qprad::io
