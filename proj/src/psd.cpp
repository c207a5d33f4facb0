#include <cmath>
#include <complex>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "qprad/constants.hpp"
#include "qprad/errors.hpp"
#include "qprad/statistics.hpp"

namespace qprad {

Psd psd_estimate(const Eigen::ArrayXd& series, double dt_s, int segments) {
  const Eigen::Index n = series.size();
  if (n < 64) throw DataError("psd_estimate: need at least 64 samples");
  if (!(dt_s > 0)) throw ContractViolation("psd_estimate: sample interval must be > 0");
  if (segments < 1) throw ContractViolation("psd_estimate: segment count must be >= 1");

  const Eigen::Index len = segments == 1 ? n : 2 * n / (segments + 1);
  const Eigen::Index step = segments == 1 ? n : len / 2;
  if (len < 16) throw DataError("psd_estimate: too many segments for the series length");
  const auto ulen = static_cast<std::size_t>(len);

  std::vector<double> window(ulen);
  double wsum2 = 0;
  for (std::size_t j = 0; j < ulen; ++j) {
    window[j] = 0.5 * (1 - std::cos(2 * constants::pi * static_cast<double>(j) / static_cast<double>(len)));
    wsum2 += window[j] * window[j];
  }

  const Eigen::Index n_freq = len / 2 + 1;
  Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(n_freq);
  Eigen::FFT<double> fft;
  std::vector<double> buf(ulen);
  std::vector<std::complex<double>> spec;
  int used = 0;
  for (Eigen::Index start = 0; start + len <= n; start += step) {
    const double mean = series.segment(start, len).mean();
    for (std::size_t j = 0; j < ulen; ++j) {
      buf[j] = (series[start + static_cast<Eigen::Index>(j)] - mean) * window[j];
    }
    fft.fwd(spec, buf);
    for (Eigen::Index k = 0; k < n_freq; ++k) acc[k] += std::norm(spec[static_cast<std::size_t>(k)]);
    ++used;
  }

  Psd out;
  out.frequency_hz = Eigen::ArrayXd::LinSpaced(n_freq, 0.0, 0.5 / dt_s);
  out.density = acc * (dt_s / (wsum2 * used));
  out.density.segment(1, n_freq - 2) *= 2.0;  // fold negative frequencies
  return out;
}

Psd psd_estimate(const Eigen::ArrayXd& series, const Eigen::ArrayXd& timestamps_s, int segments) {
  if (series.size() != timestamps_s.size()) throw DataError("psd_estimate: timestamp count mismatch");
  if (series.size() < 2) throw DataError("psd_estimate: need at least 64 samples");
  const Eigen::Index n = timestamps_s.size();
  const double dt = (timestamps_s[n - 1] - timestamps_s[0]) / static_cast<double>(n - 1);
  for (Eigen::Index i = 1; i < n; ++i) {
    const double step = timestamps_s[i] - timestamps_s[i - 1];
    if (std::abs(step - dt) > 0.01 * dt) {
      throw DataError("psd_estimate: timestamps are not uniform (step " + std::to_string(step) +
                      " s at index " + std::to_string(i) + ", nominal " + std::to_string(dt) + " s)");
    }
  }
  return psd_estimate(series, dt, segments);
}

PowerLaw power_law_fit(const Psd& psd, int skip_low) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  int positive_seen = 0;
  for (Eigen::Index k = 0; k < psd.frequency_hz.size(); ++k) {
    const double f = psd.frequency_hz[k];
    const double s = psd.density[k];
    if (!(f > 0)) continue;
    if (positive_seen++ < skip_low) continue;
    if (!(s > 0)) continue;
    const double x = std::log(f);
    const double y = std::log(s);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  const double den = m * sxx - sx * sx;
  if (m < 3 || !(den > 0)) throw DataError("power_law_fit: fewer than 3 usable frequency bins");
  const double slope = (m * sxy - sx * sy) / den;
  const double intercept = (sy - slope * sx) / m;
  return {-slope, std::exp(intercept)};
}

double noise_power_in_band(const PowerLaw& model, double f_lo, double f_hi) {
  if (!(f_lo > 0)) throw ContractViolation("noise_power_in_band: lower edge must be > 0");
  if (!(f_hi >= f_lo)) throw ContractViolation("noise_power_in_band: band edges reversed");
  const double a = model.alpha;
  if (std::abs(a - 1) < 1e-12) return model.s_const * std::log(f_hi / f_lo);
  return model.s_const * (std::pow(f_hi, 1 - a) - std::pow(f_lo, 1 - a)) / (1 - a);
}

}  // namespace qprad
