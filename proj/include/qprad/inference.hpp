#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "qprad/least_squares.hpp"
#include "qprad/qp_dynamics.hpp"
#include "qprad/qubit_observables.hpp"

namespace qprad {

/// p(t) = amplitude exp(-gamma1 t) + offset. `sigma` may be empty (unit weights).
FitResult fit_exponential(const Eigen::ArrayXd& t, const Eigen::ArrayXd& population,
                          const Eigen::ArrayXd& sigma = {}, const LsqOptions& options = {});

struct PowerLawFitOptions {
  bool fix_gamma_other_zero = false;
  int a_grid_points = 7;  // multi-start grid over a in [1e-4, 1e-1]
  LsqOptions lsq{};
};

/// Gamma1 = a sqrt(omega P) + gamma_other, weighted by sigma (s^-1).
/// Parameters "a" and "gamma_other" (the latter pinned to 0 when fixed).
FitResult fit_power_law_model(const Eigen::ArrayXd& power, const Eigen::ArrayXd& gamma1,
                              const Eigen::ArrayXd& sigma, double omega_q,
                              const PowerLawFitOptions& options = {});

enum class InjectionModel {
  full,                    // recombination, trapping and gamma_other
  recombination,           // s = 0
  recombination_no_other,  // s = 0, gamma_other = 0
  trapping,                // r = 0
  trapping_no_other,       // r = 0, gamma_other = 0
};

std::string to_string(InjectionModel model);

struct InjectionFit {
  InjectionModel model;
  int n_parameters = 0;
  FitResult fit;  // parameters among x0, r, s, gamma_other; absent ones are held at 0
};

/// Fits Gamma1(t) = C(omega) x(t) + gamma_other with x(t) from the free-decay
/// closed form. Returns every variant sorted by ascending rss.
std::vector<InjectionFit> fit_injection(const Eigen::ArrayXd& t, const Eigen::ArrayXd& gamma1,
                                        const Eigen::ArrayXd& sigma,
                                        const QubitParams<double>& qubit,
                                        const LsqOptions& options = {});

/// y(t) = y_inf + amplitude 2^(-t / t_half). Parameters "t_half", "y_inf", "amplitude".
FitResult fit_halflife(const Eigen::ArrayXd& t, const Eigen::ArrayXd& y,
                       const Eigen::ArrayXd& sigma = {}, const LsqOptions& options = {});

}  // namespace qprad
