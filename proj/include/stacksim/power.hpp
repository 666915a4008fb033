// Hold-leakage measurement over waveforms and the per-bit conventional vs
// proposed comparison.
#pragma once

#include <string>

#include "stacksim/solver.hpp"

namespace stacksim {

// 64-bit FNV-1a of arbitrary text, as a hex string.
std::string fingerprint_hex(const std::string& data);

// Hash of everything both sides of a comparison must share: model cards,
// solver settings and the hold duration.
std::string shared_config_fingerprint(const Netlist& n, const SolverConfig& cfg,
                                      double hold_duration);

struct PowerMeasurement {
  double mean_current = 0.0; // trapezoidal time-average of |i| [A]
  double power = 0.0;        // v_supply * mean_current [W]
};

// Averages |supply current| over [t0, t1]. The window must lie inside the
// waveform span and cover at least 10 time steps.
PowerMeasurement measure_hold_power(const Waveform& w, const std::string& supply_signal,
                                    double v_supply, double t0, double t1);

struct ArchPowerInput {
  std::string architecture;
  const Waveform* waveform = nullptr;
  std::string supply_signal;
  double supply_voltage = 0.0;
  double window_t0 = 0.0, window_t1 = 0.0;
  int stored_bits = 1;
  std::string config_fingerprint; // from shared_config_fingerprint
  std::string netlist_text;       // serialized netlist, folded into the report id
};

struct ArchPowerBlock {
  std::string architecture;
  double supply_voltage = 0.0;
  double window_t0 = 0.0, window_t1 = 0.0;
  double mean_current = 0.0;
  double leakage_power = 0.0;
  int stored_bits = 1;
  double leakage_per_bit = 0.0;
};

struct PowerReport {
  std::string config_fingerprint; // hash of both netlists + shared config
  ArchPowerBlock conventional;
  ArchPowerBlock proposed;
  double ratio = 0.0;           // conventional per-bit / proposed per-bit
  double savings_percent = 0.0; // 100 * (1 - 1/ratio)

  std::string to_json() const;
};

// Per-bit normalization of both measurements. Refuses mismatched
// configuration fingerprints.
PowerReport compare_architectures(const ArchPowerInput& conv, const ArchPowerInput& prop);

} // namespace stacksim
