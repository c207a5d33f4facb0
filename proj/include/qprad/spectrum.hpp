#pragma once

// Scintillator spectrum response: energy templates are smeared with a
// Gaussian whose mean follows a quadratic energy-to-channel calibration and
// whose variance is quadratic in energy, then summed with free weights.

#include <string>
#include <vector>

#include <Eigen/Core>

#include "qprad/least_squares.hpp"

namespace qprad {

struct EnergyTemplate {
  std::string name;
  Eigen::ArrayXd edges_kev;  // n + 1 bin edges, increasing
  Eigen::ArrayXd counts;     // n bins

  void validate() const;
  Eigen::ArrayXd centres() const;
};

struct SpectrumModel {
  double c0 = 0, c1 = 1, c2 = 0;               // channel = c0 + c1 E + c2 E^2
  double var0 = 1, var1 = 0, var2 = 0;         // sigma^2 = var0 + var1 E + var2 E^2 (channels^2)
  std::vector<double> weights;

  double channel(double e_kev) const { return c0 + (c1 + c2 * e_kev) * e_kev; }
  double variance(double e_kev) const { return var0 + (var1 + var2 * e_kev) * e_kev; }
};

/// Expected counts per channel (0 .. n_channels-1) for one template, integrating
/// the Gaussian over each channel. Throws ContractViolation when the variance
/// is not positive anywhere on the template.
Eigen::ArrayXd smear_template(const EnergyTemplate& tmpl, const SpectrumModel& model,
                              Eigen::Index n_channels, double weight = 1.0);

/// Weighted sum of smeared templates using model.weights.
Eigen::ArrayXd spectrum_prediction(const std::vector<EnergyTemplate>& templates,
                                   const SpectrumModel& model, Eigen::Index n_channels);

struct EnergyRange {
  double lo_kev = 0;
  double hi_kev = 0;
};

struct SpectrumFitOptions {
  std::vector<EnergyRange> ranges{{200, 1300}, {1300, 2900}, {200, 2900}};
  double degeneracy_cosine = 0.999;
  LsqOptions lsq{};
};

struct RangeFit {
  EnergyRange range;
  FitResult fit;  // c0, c1, c2, var0, var1, var2, w_<template name>...
};

struct SpectrumFitReport {
  std::vector<RangeFit> fits;
  std::vector<std::string> warnings;
  Eigen::VectorXd weight_spread;  // max - min of each weight across ranges
};

/// Poisson-weighted least squares of the full model over one energy range.
/// `initial` supplies the starting calibration (also used to map the range
/// onto channels); initial weights are re-estimated linearly when absent.
FitResult fit_spectrum_range(const Eigen::ArrayXd& measured,
                             const std::vector<EnergyTemplate>& templates,
                             const SpectrumModel& initial, EnergyRange range,
                             const LsqOptions& options = {});

SpectrumFitReport fit_spectrum(const Eigen::ArrayXd& measured,
                               const std::vector<EnergyTemplate>& templates,
                               const SpectrumModel& initial,
                               const SpectrumFitOptions& options = {});

}  // namespace qprad
