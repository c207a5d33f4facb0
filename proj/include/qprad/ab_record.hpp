#pragma once

#include <string>

#include "qprad/source_model.hpp"

namespace qprad {

// One T1 estimate taken during a shield A/B cycle.
struct AbRecord {
  std::string qubit_id;
  double omega_q = 0.0;      // rad/s
  int cycle = 0;
  ShieldState position = ShieldState::up;
  int repetition = 0;        // index within the (cycle, position) block
  double t1_us = 0.0;
  double timestamp_s = 0.0;  // since campaign start
};

}  // namespace qprad
