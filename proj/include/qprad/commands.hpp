#pragma once

// Batch verbs behind the qprad executable. Each verb builds all of its
// outputs in memory; files are only written once the verb has succeeded.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qprad/io/config.hpp"
#include "qprad/io/manifest.hpp"

namespace qprad::cli {

inline constexpr const char* tool_version = "1.0.0";

enum class OutputFormat { csv, json };

struct GlobalOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = "qprad-run";
  int threads = 1;
  OutputFormat format = OutputFormat::csv;
};

// Exit codes.
inline constexpr int exit_ok = 0;
inline constexpr int exit_failure = 1;
inline constexpr int exit_config = 2;
inline constexpr int exit_data = 3;
inline constexpr int exit_nonconvergence = 4;

struct CommandResult {
  std::vector<io::OutputFile> files;
  std::vector<std::string> warnings;
  bool converged = true;
};

struct CommandInputs {
  std::filesystem::path table;          // exposure, records or histogram file
  std::filesystem::path templates_dir;  // fit-spectrum only
};

CommandResult simulate_exposure(const io::ScenarioConfig& cfg, std::uint64_t seed, OutputFormat fmt);
CommandResult fit_exposure(const io::ScenarioConfig& cfg, const std::filesystem::path& exposure);
CommandResult simulate_shield_ab(const io::ScenarioConfig& cfg, std::uint64_t seed, int threads,
                                 OutputFormat fmt);
CommandResult analyze_ab(const io::ScenarioConfig& cfg, const std::filesystem::path& records,
                         std::uint64_t seed, OutputFormat fmt);
CommandResult inject_qp(const io::ScenarioConfig& cfg, std::uint64_t seed, OutputFormat fmt);
CommandResult simulate_spectrum(const io::ScenarioConfig& cfg, std::uint64_t seed, OutputFormat fmt);
CommandResult fit_spectrum(const io::ScenarioConfig& cfg, const std::filesystem::path& histogram,
                           const std::filesystem::path& templates_dir);

/// Loads the configuration, runs `verb`, commits outputs plus manifest, and
/// maps failures onto exit codes. Diagnostics go to `err`.
int run(const std::string& verb, const GlobalOptions& options, const CommandInputs& inputs,
        std::ostream& err);

std::vector<std::string> verbs();

}  // namespace qprad::cli
