#pragma once

// Normalized quasiparticle density x_qp = n_qp / n_cp under the rate equation
//
//   dx/dt = -r x^2 - s x + g
//
// with recombination r, trapping s and generation g (all in s^-1).

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Core>

#include "qprad/constants.hpp"
#include "qprad/errors.hpp"

namespace qprad {

template <typename Scalar = double>
struct SuperconductorConstants {
  Scalar delta_ev = Scalar(constants::aluminium_gap_ev);
  Scalar n_cp_per_um3 = Scalar(constants::aluminium_n_cp_per_um3);

  void validate() const {
    if (!(delta_ev > 0) || !(n_cp_per_um3 > 0)) {
      throw ConfigError("superconductor constants must be positive");
    }
  }
};

template <typename Scalar = double>
struct QpParams {
  Scalar r = 0;  // recombination, per unit x_qp
  Scalar s = 0;  // trapping
  Scalar g = 0;  // generation

  void validate() const {
    if (!(r >= 0) || !(s >= 0) || !(g >= 0)) {
      throw ContractViolation("quasiparticle rates must be non-negative");
    }
  }
};

template <typename Scalar = double>
struct QpState {
  Scalar x = 0;
};

template <typename Scalar>
Scalar rate_equation_rhs(Scalar x, const QpParams<Scalar>& p) {
  return -p.r * x * x - p.s * x + p.g;
}

/// Root of the steady-state quadratic. Uses 2g / (s + sqrt(s^2 + 4rg)), the
/// cancellation-free form of (-s + sqrt(s^2 + 4rg)) / 2r.
template <typename Scalar>
QpState<Scalar> steady_state_xqp(const QpParams<Scalar>& p) {
  using std::sqrt;
  p.validate();
  if (p.g == 0) return {Scalar(0)};
  if (p.r == 0 && p.s == 0) {
    throw ContractViolation("no steady state: r = s = 0 with g > 0 grows without bound");
  }
  return {Scalar(2) * p.g / (p.s + sqrt(p.s * p.s + Scalar(4) * p.r * p.g))};
}

/// Free decay (g = 0) in closed form. The general branch is evaluated as
/// x0 / (e^{st} + r x0 (e^{st} - 1)/s), which is algebraically the textbook
/// x0 s / (-r x0 + e^{st}(s + r x0)) but stays accurate as s -> 0.
template <typename Scalar>
QpState<Scalar> evolve_xqp_closed(QpState<Scalar> x0, Scalar r, Scalar s, Scalar t) {
  using std::exp;
  using std::expm1;
  if (!(t >= 0)) throw ContractViolation("evolve_xqp_closed: time must be non-negative");
  if (!(r >= 0) || !(s >= 0)) throw ContractViolation("evolve_xqp_closed: rates must be >= 0");
  if (t == 0) return x0;
  if (s == 0) return {x0.x / (Scalar(1) + x0.x * r * t)};
  if (r == 0) return {x0.x * exp(-s * t)};
  const Scalar growth = exp(s * t);
  return {x0.x / (growth + r * x0.x * expm1(s * t) / s)};
}

template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> evolve_xqp_closed(
    QpState<Scalar> x0, Scalar r, Scalar s, const Eigen::Array<Scalar, Eigen::Dynamic, 1>& t) {
  Eigen::Array<Scalar, Eigen::Dynamic, 1> out(t.size());
  for (Eigen::Index i = 0; i < t.size(); ++i) out[i] = evolve_xqp_closed(x0, r, s, t[i]).x;
  return out;
}

struct IntegratorOptions {
  double step_fraction = 1e-2;  // step = step_fraction / (fastest rate)
  double max_step = 0.0;        // 0: no explicit cap beyond the defaults
  double clamp_tolerance = 1e-15;
};

/// Fixed-step RK4 solution of the rate equation with a time-dependent
/// generation rate. Returns x at every grid point; grid[0] carries x0.
template <typename Scalar, typename GenerationFn>
Eigen::Array<Scalar, Eigen::Dynamic, 1> evolve_xqp_numeric(
    QpState<Scalar> x0, Scalar r, Scalar s, GenerationFn&& g,
    const Eigen::Array<Scalar, Eigen::Dynamic, 1>& grid, const IntegratorOptions& opts = {}) {
  using std::ceil;
  using std::max;
  using std::min;
  const Eigen::Index n = grid.size();
  if (n == 0) return {};
  for (Eigen::Index i = 1; i < n; ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw ContractViolation("evolve_xqp_numeric: time grid must be strictly increasing");
    }
  }
  if (!(r >= 0) || !(s >= 0)) throw ContractViolation("evolve_xqp_numeric: rates must be >= 0");

  Scalar g_max = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar gi = g(grid[i]);
    if (!(gi >= 0)) throw ContractViolation("evolve_xqp_numeric: generation must be >= 0");
    g_max = max(g_max, gi);
  }
  Scalar x_scale = x0.x;
  if (g_max > 0 && (r > 0 || s > 0)) {
    x_scale = max(x_scale, steady_state_xqp(QpParams<Scalar>{r, s, g_max}).x);
  }
  const Scalar span = grid[n - 1] - grid[0];
  Scalar h = span > 0 ? span / Scalar(1e4) : Scalar(1);
  const Scalar fastest = s + Scalar(2) * r * x_scale;
  if (fastest > 0) h = min(h, Scalar(opts.step_fraction) / fastest);
  if (opts.max_step > 0) h = min(h, Scalar(opts.max_step));

  auto rhs = [&](Scalar t, Scalar x) { return -r * x * x - s * x + g(t); };
  auto check = [&](Scalar& x, Scalar t) {
    if (x < 0) {
      if (x >= -Scalar(opts.clamp_tolerance)) {
        x = 0;
      } else {
        throw NumericalInstability("x_qp went negative at t = " + std::to_string(double(t)) +
                                   " s; reduce the integration step");
      }
    }
    if (x > Scalar(1) + Scalar(opts.clamp_tolerance)) {
      throw NumericalInstability("x_qp exceeded 1 at t = " + std::to_string(double(t)) +
                                 " s; reduce the integration step");
    }
  };

  Eigen::Array<Scalar, Eigen::Dynamic, 1> out(n);
  Scalar x = x0.x;
  out[0] = x;
  for (Eigen::Index i = 1; i < n; ++i) {
    const Scalar dt = grid[i] - grid[i - 1];
    const auto steps = static_cast<long>(ceil(dt / h));
    const Scalar step = dt / Scalar(steps);
    Scalar t = grid[i - 1];
    for (long k = 0; k < steps; ++k) {
      const Scalar k1 = rhs(t, x);
      const Scalar k2 = rhs(t + step / 2, x + step / 2 * k1);
      const Scalar k3 = rhs(t + step / 2, x + step / 2 * k2);
      const Scalar k4 = rhs(t + step, x + step * k3);
      x += step / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
      t = grid[i - 1] + step * Scalar(k + 1);
      check(x, t);
    }
    out[i] = x;
  }
  return out;
}

/// Thermal-equilibrium density sqrt(2 pi kT / Delta) exp(-Delta / kT).
template <typename Scalar>
QpState<Scalar> thermal_xqp(Scalar temperature_k, const SuperconductorConstants<Scalar>& sc) {
  using std::exp;
  using std::sqrt;
  if (!(temperature_k > 0)) throw ContractViolation("thermal_xqp: temperature must be > 0");
  const Scalar kt = Scalar(constants::k_boltzmann_ev_per_k) * temperature_k;
  return {sqrt(Scalar(2 * constants::pi) * kt / sc.delta_ev) * exp(-sc.delta_ev / kt)};
}

/// Generation rate that, with trapping neglected, puts the steady state on
/// the square-root power law a sqrt(omega P). The qubit frequency cancels.
template <typename Scalar>
Scalar generation_from_power(Scalar power, Scalar a, const SuperconductorConstants<Scalar>& sc,
                             Scalar r) {
  if (!(power >= 0)) throw ContractViolation("generation_from_power: power must be >= 0");
  if (!(r > 0)) throw ContractViolation("generation_from_power: r must be > 0");
  const Scalar pi2 = Scalar(constants::pi * constants::pi);
  return r * a * a * pi2 * Scalar(constants::hbar_ev_s) * power / (Scalar(2) * sc.delta_ev);
}

}  // namespace qprad
