#include "qprad/qubit_observables.hpp"

#include <boost/math/tools/roots.hpp>

namespace qprad {

std::optional<double> solve_internal_power(const ShieldScenario<double>& sc,
                                           const QubitParams<double>& q, double delta_gamma) {
  ShieldScenario<double> trial = sc;
  trial.p_int = 0.0;
  const double at_zero = delta_gamma_shield(trial, q);
  if (!(delta_gamma > 0.0) || delta_gamma > at_zero) return std::nullopt;
  if (delta_gamma == at_zero) return 0.0;

  auto residual = [&](double p_int) {
    trial.p_int = p_int;
    return delta_gamma_shield(trial, q) - delta_gamma;
  };
  // delta_gamma falls like 1/sqrt(P_int); grow the bracket until it changes sign.
  double hi = std::max(sc.p_ext, 1e-12);
  while (residual(hi) > 0.0) hi *= 2.0;
  boost::math::tools::eps_tolerance<double> tol(50);
  std::uintmax_t max_iter = 200;
  auto [lo_root, hi_root] = boost::math::tools::toms748_solve(residual, 0.0, hi, tol, max_iter);
  return 0.5 * (lo_root + hi_root);
}

double pint_bound_from_asymmetry(double asymmetry_median, double eta_up, double eta_down,
                                 double p_ext) {
  if (!(asymmetry_median > 0.0)) {
    throw ContractViolation("asymmetry must be positive; the shield did not lower the rates");
  }
  return (eta_up - eta_down) / (2.0 * asymmetry_median) * p_ext;
}

double internal_power_from_bound(double effective_bound, double gamma_other, double a,
                                 double omega_q) {
  return effective_bound - gamma_other / (a * std::sqrt(omega_q));
}

double fc_correction(double rho_src_al, double rho_src_si, double p_ext_al, double p_ext_si) {
  if (!(rho_src_al > 0 && rho_src_si > 0 && p_ext_al > 0 && p_ext_si > 0)) {
    throw ContractViolation("fc_correction: all inputs must be positive");
  }
  return std::sqrt((rho_src_al / rho_src_si) * (p_ext_si / p_ext_al));
}

}  // namespace qprad
