#pragma once

// Scenario configuration. JSON with // and /* */ comments; every physical
// quantity carries its unit in the key name. Unknown keys are rejected with
// their full path. Every section is optional and falls back to the built-in
// defaults, which match configs/default.json.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qprad/ab_analysis.hpp"
#include "qprad/experiment_synth.hpp"
#include "qprad/qubit_observables.hpp"
#include "qprad/source_model.hpp"
#include "qprad/spectrum.hpp"

namespace qprad::io {

struct NamedQubit {
  std::string id;
  QubitParams<double> params;
};

struct ExposureSettings {
  std::string qubit = "Q1";
  double start_h = 0;
  double stop_h = 400;
  double step_h = 2;
  double measurement_offset_h = 0;  // campaign start relative to the activity reference
  ExposureConfig synth{};
};

struct AbGroupSettings {
  std::vector<std::string> qubits;
  int cycles = 1;
  int n_per_position = 1;
  double sample_interval_s = 9;
  double start_h = 0;
};

struct ShieldAbSettings {
  ShieldScenario<double> scenario{};
  double gamma_other_per_us = 0.005;  // replaces each qubit's own value during A/B runs
  std::vector<AbGroupSettings> groups;
  double drift_alpha = 1.5;
  double drift_psd_us2_per_hz = 3.4e4;  // at drift_reference_hz
  double drift_reference_hz = 1.0 / 900.0;
  double t1_noise_rel = 0.05;
  double t1_floor_us = 1.0;
};

struct NoiseBand {
  std::string name;
  double f_lo_hz = 0;
  double f_hi_hz = 0;
};

struct AnalysisSettings {
  AnalysisConfig analysis{};
  std::string reference_qubit = "Q1";
  std::vector<double> robustness_cutoffs_us;
  std::vector<double> robustness_sigmas;
  double eta_up = 0.461;
  double eta_down = 0.02;
  double p_ext = 0.10;
  double a = 5.4e-3;
  double gamma_other_ref_per_us = 0.005;
  double pint_curve_max_ratio = 3.0;
  int pint_curve_points = 61;
  int psd_segments = 8;
  std::vector<NoiseBand> bands;
};

struct InjectionSettings {
  std::string qubit = "Q1";
  double x0 = 5e-6;
  double r_per_s = 2e8;
  double s_per_s = 0;
  double gamma_other_per_us = 1.0 / 35.0;
  double delay_max_ms = 10;
  int n_delays = 41;
  double noise_rel = 0.01;
};

struct SpectrumSettings {
  SpectrumModel initial{};
  Eigen::Index n_channels = 1024;
  std::vector<EnergyRange> ranges;
  double degeneracy_cosine = 0.999;
  // Toy generator for simulate-spectrum.
  std::vector<double> true_weights;
  double counts_scale = 2e5;
  double bin_kev = 3;
  double max_kev = 3000;
};

struct ScenarioConfig {
  std::uint64_t seed = 20220101;
  std::string material = "Al";
  SuperconductorConstants<double> superconductor{};
  std::vector<NamedQubit> qubits;
  double a = 5.4e-3;
  SourceInventory inventory;
  EnvironmentModel environment;
  ExposureSettings exposure{};
  ShieldAbSettings shield_ab{};
  AnalysisSettings analysis{};
  InjectionSettings injection{};
  SpectrumSettings spectrum{};

  nlohmann::json canonical;  // parsed document used for the manifest hash

  const NamedQubit& qubit(const std::string& id) const;
  AbCampaignConfig ab_campaign(std::uint64_t seed, int threads) const;
};

/// Built-in defaults (the shipped default scenario).
ScenarioConfig default_config();

/// Applies a JSON document over the defaults and validates the result.
ScenarioConfig parse_config(const nlohmann::json& doc);
ScenarioConfig parse_config_text(const std::string& text, const std::string& source);
ScenarioConfig load_config(const std::filesystem::path& path);

}  // namespace qprad::io
