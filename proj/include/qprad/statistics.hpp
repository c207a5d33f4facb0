#pragma once

// Rank statistics and spectral estimation used by the A/B analysis.

#include <vector>

#include <Eigen/Core>

namespace qprad {

struct MedianCi {
  double median = 0;
  double lower = 0;
  double upper = 0;
  bool exact = false;  // binomial order-statistic interval (small n)
  double achieved_level = 0;
};

/// Sample median with a distribution-free interval from order statistics.
/// n >= 8 uses the normal approximation to the rank positions
/// n/2 -/+ z sqrt(n)/2, rounded outward; smaller samples use exact binomial
/// order statistics and set `exact`.
MedianCi median_with_ci(std::vector<double> values, double level = 0.95);

enum class Alternative { greater, less, two_sided };

struct WilcoxonResult {
  double w_plus = 0;  // sum of ranks of positive differences
  double p_value = 1;
  int n_effective = 0;  // non-zero differences
  bool exact = false;
  double z = 0;  // normal score when approximate
};

/// Signed-rank test of zero location. Zeros are dropped, ties get average
/// ranks. Exact null distribution for n_effective <= exact_limit, otherwise
/// the normal approximation with tie and continuity corrections.
/// Throws DataError when every difference is zero.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& diffs,
                                    Alternative alternative = Alternative::greater,
                                    int exact_limit = 25);

/// Normal approximation only (used to cross-check the exact branch).
WilcoxonResult wilcoxon_signed_rank_normal(const std::vector<double>& diffs,
                                           Alternative alternative = Alternative::greater);

struct Psd {
  Eigen::ArrayXd frequency_hz;
  Eigen::ArrayXd density;  // one-sided, units^2 / Hz
};

/// Welch estimate: Hann window, 50% overlap, mean removed per segment.
Psd psd_estimate(const Eigen::ArrayXd& series, double dt_s, int segments = 8);

/// Same, after checking that timestamps are uniform to within 1% of the step.
Psd psd_estimate(const Eigen::ArrayXd& series, const Eigen::ArrayXd& timestamps_s,
                 int segments = 8);

struct PowerLaw {
  double alpha = 0;
  double s_const = 0;  // S(f) = s_const / f^alpha
};

/// Least squares line through (log f, log S), skipping f = 0 and the first
/// `skip_low` positive bins.
PowerLaw power_law_fit(const Psd& psd, int skip_low = 1);

/// Integral of s_const / f^alpha over [f_lo, f_hi].
double noise_power_in_band(const PowerLaw& model, double f_lo, double f_hi);

}  // namespace qprad
