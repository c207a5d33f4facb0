#pragma once

// Shield A/B analysis: pairing of up/down relaxation rates, location
// statistics and robustness scans over the post-processing cuts.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "qprad/ab_record.hpp"
#include "qprad/constants.hpp"
#include "qprad/statistics.hpp"

namespace qprad {

enum class PairingMode {
  real,      // k-th up measurement against k-th down measurement of the same cycle
  no_move,   // consecutive measurements inside one block; no shield change
  shuffled,  // random partners from the qubit's pooled rates, random sign
};

enum class Aggregation { per_measurement, per_cycle };

PairingMode pairing_mode_from_string(const std::string& text);
std::string to_string(PairingMode mode);
Aggregation aggregation_from_string(const std::string& text);
std::string to_string(Aggregation a);

struct AnalysisConfig {
  double t1_cutoff_us = 30.0;  // pairs with either T1 below this are removed
  double outlier_sigma = 10.0;
  double omega_ref = 2 * constants::pi * 3.48e9;
  double ci_level = 0.95;
  PairingMode mode = PairingMode::real;
  Aggregation aggregation = Aggregation::per_measurement;
  std::uint64_t seed = 0;  // shuffled mode only
  int histogram_bins = 60;

  void validate() const;
};

struct RatePair {
  std::string qubit_id;
  int cycle = 0;
  int index = 0;
  double gamma_up = 0;    // s^-1
  double gamma_down = 0;  // s^-1
  double delta = 0;       // (gamma_down - gamma_up) sqrt(omega_ref / omega_q)
};

struct PairingResult {
  std::vector<RatePair> pairs;
  int removed_cutoff = 0;
  int removed_outlier = 0;
  int unmatched = 0;  // records left without a partner

  std::vector<double> deltas() const;
};

PairingResult pair_and_normalize(const std::vector<AbRecord>& records, const AnalysisConfig& cfg);

struct Histogram {
  Eigen::ArrayXd edges;
  Eigen::ArrayXd counts;
};

Histogram make_histogram(const std::vector<double>& values, int bins);

struct AsymmetryStats {
  std::vector<double> values;  // 2 (G_d - G_u) / (G_d + G_u) per pair
  double median = 0;
  Histogram histogram;
};

AsymmetryStats asymmetry_stats(const std::vector<RatePair>& pairs, int bins = 60);

struct RobustnessCell {
  double t1_cutoff_us = 0;
  double outlier_sigma = 0;
  int n_pairs = 0;
  double p_value = 1;
  double median_delta = 0;
  bool valid = false;  // at least 8 surviving pairs
};

std::vector<RobustnessCell> robustness_map(const std::vector<AbRecord>& records,
                                           const std::vector<double>& cutoffs_us,
                                           const std::vector<double>& sigmas,
                                           const AnalysisConfig& cfg);

struct AbReport {
  PairingResult pairing;
  MedianCi median;
  WilcoxonResult wilcoxon;
  AsymmetryStats asymmetry;
  Histogram delta_histogram;
};

AbReport analyze_ab(const std::vector<AbRecord>& records, const AnalysisConfig& cfg);

}  // namespace qprad
