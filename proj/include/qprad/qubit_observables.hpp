#pragma once

// Maps quasiparticle density and absorbed radiation power onto transmon and
// resonator observables. Rates in s^-1, angular frequencies in rad/s, power
// densities in keV s^-1 mm^-3, and the power-law coefficient `a` in
// sqrt(mm^3 / keV).

#include <cmath>
#include <optional>

#include <Eigen/Core>

#include "qprad/constants.hpp"
#include "qprad/errors.hpp"
#include "qprad/qp_dynamics.hpp"

namespace qprad {

template <typename Scalar = double>
struct QubitParams {
  Scalar omega_q = 0;
  Scalar gamma_other = 0;
  SuperconductorConstants<Scalar> sc{};

  void validate() const {
    if (!(omega_q > 0)) throw ConfigError("qubit angular frequency must be positive");
    if (!(gamma_other >= 0)) throw ConfigError("gamma_other must be non-negative");
    sc.validate();
  }
};

template <typename Scalar = double>
struct ResonatorParams {
  Scalar omega_r0 = 0;
  Scalar alpha_k = 0;  // kinetic inductance fraction
};

template <typename Scalar = double>
struct ShieldScenario {
  Scalar a = 0;
  Scalar p_int = 0;
  Scalar p_ext = 0;
  Scalar eta_up = 0;
  Scalar eta_down = 0;

  void validate() const {
    if (!(p_int >= 0) || !(p_ext >= 0)) throw ConfigError("shield scenario powers must be >= 0");
    if (!(eta_down >= 0 && eta_up <= 1 && eta_up >= eta_down)) {
      throw ConfigError("shield scenario requires 0 <= eta_down <= eta_up <= 1");
    }
  }

  Scalar power(bool shield_up) const {
    return p_int + (Scalar(1) - (shield_up ? eta_up : eta_down)) * p_ext;
  }
};

/// sqrt(2 omega Delta / (pi^2 hbar)): Gamma_qp per unit x_qp.
template <typename Scalar>
Scalar qp_coupling(Scalar omega_q, const SuperconductorConstants<Scalar>& sc) {
  using std::sqrt;
  const Scalar pi2 = Scalar(constants::pi * constants::pi);
  return sqrt(Scalar(2) * omega_q * sc.delta_ev / (pi2 * Scalar(constants::hbar_ev_s)));
}

template <typename Scalar>
Scalar gamma_qp(QpState<Scalar> x, const QubitParams<Scalar>& q) {
  return qp_coupling(q.omega_q, q.sc) * x.x;
}

template <typename Derived>
auto gamma_qp(const Eigen::ArrayBase<Derived>& x,
              const QubitParams<typename Derived::Scalar>& q) {
  return (qp_coupling(q.omega_q, q.sc) * x).eval();
}

template <typename Scalar>
QpState<Scalar> xqp_from_gamma(Scalar gamma, const QubitParams<Scalar>& q) {
  if (!(gamma >= 0)) throw ContractViolation("xqp_from_gamma: rate must be >= 0");
  return {gamma / qp_coupling(q.omega_q, q.sc)};
}

template <typename Scalar>
Scalar gamma1_total(Scalar gamma_qp_rate, Scalar gamma_other) {
  return gamma_qp_rate + gamma_other;
}

/// a sqrt(omega P) + Gamma_other.
template <typename Scalar>
Scalar gamma1_from_power(Scalar a, const QubitParams<Scalar>& q, Scalar power) {
  using std::sqrt;
  if (!(power >= 0)) throw ContractViolation("gamma1_from_power: power must be >= 0");
  return a * sqrt(q.omega_q * power) + q.gamma_other;
}

template <typename Derived>
auto gamma1_from_power(typename Derived::Scalar a, const QubitParams<typename Derived::Scalar>& q,
                       const Eigen::ArrayBase<Derived>& power) {
  return (a * (q.omega_q * power).sqrt() + q.gamma_other).eval();
}

template <typename Scalar>
Scalar survival_probability(Scalar gamma1, Scalar t) {
  using std::exp;
  if (!(t >= 0)) throw ContractViolation("survival_probability: time must be >= 0");
  return exp(-gamma1 * t);
}

/// Quasiparticle pull on the qubit frequency, -sqrt(Delta omega / (2 hbar pi^2)) x.
/// Equals -Gamma_qp / 2 for the same density.
template <typename Scalar>
Scalar qubit_frequency_shift(QpState<Scalar> x, const QubitParams<Scalar>& q) {
  using std::sqrt;
  const Scalar pi2 = Scalar(constants::pi * constants::pi);
  return -sqrt(q.sc.delta_ev * q.omega_q / (Scalar(2) * Scalar(constants::hbar_ev_s) * pi2)) * x.x;
}

/// delta_omega = -omega_r0 (alpha / 4) delta_n / n. A quasiparticle increase
/// lowers the frequency, so positive `relative_qp_change` gives a negative shift.
template <typename Scalar>
Scalar resonator_frequency_shift(Scalar relative_qp_change, const ResonatorParams<Scalar>& res) {
  return -res.omega_r0 * res.alpha_k / Scalar(4) * relative_qp_change;
}

/// Expected Gamma1(down) - Gamma1(up).
template <typename Scalar>
Scalar delta_gamma_shield(const ShieldScenario<Scalar>& sc, const QubitParams<Scalar>& q) {
  using std::sqrt;
  sc.validate();
  return sc.a * sqrt(q.omega_q) * (sqrt(sc.power(false)) - sqrt(sc.power(true)));
}

/// Internal power density for which delta_gamma_shield equals `delta_gamma`.
/// The scenario's own p_int is ignored. Empty when the target exceeds the
/// P_int = 0 prediction or is not positive.
std::optional<double> solve_internal_power(const ShieldScenario<double>& sc,
                                           const QubitParams<double>& q, double delta_gamma);

/// Effective internal power (P_int + Gamma_other / (a sqrt(omega))) from the
/// median shield asymmetry, using the large-P_int linearisation.
double pint_bound_from_asymmetry(double asymmetry_median, double eta_up, double eta_down,
                                 double p_ext);

/// Removes the Gamma_other / (a sqrt(omega)) term from the effective bound.
/// The subtracted term is not dimensionally a power density; it is applied
/// as written in the reference relation.
double internal_power_from_bound(double effective_bound, double gamma_other, double a,
                                 double omega_q);

/// sqrt((rho_src_Al / rho_src_Si) * (P_ext_Si / P_ext_Al)).
double fc_correction(double rho_src_al, double rho_src_si, double p_ext_al, double p_ext_si);

}  // namespace qprad
