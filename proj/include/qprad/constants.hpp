#pragma once

#include <numbers>

namespace qprad::constants {

// Physical constants shared by every module.
inline constexpr double hbar_ev_s = 6.582119569e-16;   // reduced Planck constant (eV s)
inline constexpr double k_boltzmann_ev_per_k = 8.617333262e-5;
inline constexpr double pi = std::numbers::pi;

// Unit conversions.
inline constexpr double bq_per_uci = 3.7e4;
inline constexpr double seconds_per_hour = 3600.0;
inline constexpr double ev_per_uev = 1e-6;
inline constexpr double s_per_us = 1e-6;

// Thin-film aluminium.
inline constexpr double aluminium_gap_ev = 180e-6;
inline constexpr double aluminium_n_cp_per_um3 = 4e6;

}  // namespace qprad::constants
