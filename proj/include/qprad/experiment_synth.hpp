#pragma once

// Synthetic measurement campaigns with known ground truth.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "qprad/ab_record.hpp"
#include "qprad/qubit_observables.hpp"
#include "qprad/source_model.hpp"

namespace qprad {

struct TraceConfig {
  Eigen::ArrayXd delays_s;
  int shots = 1000;
  double residual_excited = 0.017;
  int repeats = 20;
  double gamma1_jitter_rel = 0.0;

  void validate() const;
};

struct DecayTrace {
  Eigen::ArrayXd delay_s;
  Eigen::ArrayXd population;  // median over repeats
  Eigen::ArrayXd ci_lower;    // Wilson 95% interval on pooled counts
  Eigen::ArrayXd ci_upper;
  Eigen::ArrayXd sigma;       // one-sigma proxy for the median, used as fit weight
};

/// Excited-state population after a pi pulse, sampled shot by shot. Each shot
/// draws its own rate gamma1 (1 + jitter N(0,1)), rejecting non-positive
/// draws, so fluctuations average into a heavier-than-exponential tail.
DecayTrace synth_decay_trace(double gamma1, const TraceConfig& cfg, std::uint64_t seed);

// Power spectral density S(f) = s_const / f^alpha, one-sided, in us^2 / Hz.
struct DriftModel {
  double alpha = 1.5;
  double s_const = 0.0;
  double dt_s = 1.0;

  void validate() const;
  double psd(double f_hz) const;
};

/// Real Gaussian series (us) with the model PSD in expectation, built by
/// shaping white noise in the frequency domain. `n` must be a power of two >= 64.
Eigen::ArrayXd synth_onef_drift(const DriftModel& model, Eigen::Index n, std::uint64_t seed);

enum class ExposureNoise {
  none,   // gamma1_measured = gamma1_true
  gamma,  // multiplicative Gaussian noise on the rate with known sigma
  trace,  // synthesize a decay trace and fit it
};

ExposureNoise exposure_noise_from_string(const std::string& text);

struct ExposureConfig {
  std::string material = "Al";
  ExposureNoise noise = ExposureNoise::gamma;
  double gamma_noise_rel = 0.03;
  TraceConfig trace{};  // delays are rescaled per point to span ~4 / gamma1 when empty
};

struct ExposureSeries {
  Eigen::ArrayXd t_s;
  Eigen::ArrayXd p_src;
  Eigen::ArrayXd p_tot;
  Eigen::ArrayXd gamma1_true;
  Eigen::ArrayXd gamma1_measured;
  Eigen::ArrayXd gamma1_stderr;
};

ExposureSeries synth_exposure_campaign(const SourceInventory& inventory,
                                       const EnvironmentModel& env,
                                       const QubitParams<double>& qubit, double a,
                                       const Eigen::ArrayXd& times_s, const ExposureConfig& cfg,
                                       std::uint64_t seed);

struct AbQubit {
  std::string id;
  QubitParams<double> params;
};

struct AbGroup {
  std::vector<AbQubit> qubits;
  int cycles = 1;
  int n_per_position = 1;
  double sample_interval_s = 9.0;  // one T1 measurement every interval
  double start_time_s = 0.0;
};

struct AbCampaignConfig {
  std::vector<AbGroup> groups;
  ShieldScenario<double> scenario{};
  DriftModel drift{};          // dt is replaced by each group's sample interval
  double t1_noise_rel = 0.05;  // independent per-measurement scatter
  double t1_floor_us = 1.0;
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const;
};

/// Up block of N measurements then down block of N per cycle. Drift is
/// additive on T1 in microseconds; every qubit has its own derived streams,
/// so the output does not depend on `threads`.
std::vector<AbRecord> synth_ab_campaign(const AbCampaignConfig& cfg);

struct InjectionSeries {
  Eigen::ArrayXd t_s;
  Eigen::ArrayXd gamma1;
  Eigen::ArrayXd sigma;  // zeros when noiseless
};

/// Gamma1 after a quasiparticle injection leaves density x0, with optional
/// multiplicative Gaussian noise of relative size `noise_rel`.
InjectionSeries synth_injection_series(double x0, double r, double s,
                                       const QubitParams<double>& qubit,
                                       const Eigen::ArrayXd& delays_s, double noise_rel,
                                       std::uint64_t seed);

}  // namespace qprad
