#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "qprad/errors.hpp"
#include "qprad/experiment_synth.hpp"
#include "qprad/rng.hpp"

namespace qprad {

void DriftModel::validate() const {
  if (!(alpha > 0 && alpha < 3)) throw ConfigError("drift alpha must lie in (0, 3)");
  if (!(s_const >= 0)) throw ConfigError("drift PSD constant must be >= 0");
  if (!(dt_s > 0)) throw ConfigError("drift sample interval must be > 0");
}

double DriftModel::psd(double f_hz) const { return s_const / std::pow(f_hz, alpha); }

Eigen::ArrayXd synth_onef_drift(const DriftModel& model, Eigen::Index n, std::uint64_t seed) {
  model.validate();
  if (n < 64 || (n & (n - 1)) != 0) {
    throw ContractViolation("synth_onef_drift: length must be a power of two >= 64, got " +
                            std::to_string(n));
  }
  if (model.s_const == 0) return Eigen::ArrayXd::Zero(n);

  Rng rng(seed);
  std::normal_distribution<double> normal;
  const auto un = static_cast<std::size_t>(n);
  const double df = 1.0 / (static_cast<double>(n) * model.dt_s);
  // Periodogram convention: S_k = 2 dt |X_k|^2 / n for 0 < k < n/2.
  const double scale = static_cast<double>(n) / (2.0 * model.dt_s);

  std::vector<std::complex<double>> spectrum(un);
  spectrum[0] = 0.0;
  for (std::size_t k = 1; k < un / 2; ++k) {
    const double amp = std::sqrt(model.psd(df * static_cast<double>(k)) * scale / 2.0);
    const double re = normal(rng);
    const double im = normal(rng);
    spectrum[k] = {amp * re, amp * im};
    spectrum[un - k] = std::conj(spectrum[k]);
  }
  spectrum[un / 2] = std::sqrt(model.psd(df * static_cast<double>(un / 2)) * scale) * normal(rng);

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> series;
  fft.inv(series, spectrum);
  Eigen::ArrayXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = series[static_cast<std::size_t>(i)].real();
  return out;
}

}  // namespace qprad
