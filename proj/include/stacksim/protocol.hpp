// Read/write/hold stimulus generation for either column architecture, plus
// the harness that runs a schedule and evaluates its checks.
#pragma once

#include "stacksim/builders.hpp"
#include "stacksim/solver.hpp"
#include "stacksim/stimulus.hpp"

namespace stacksim {

struct CellSelect {
  int address = 0; // conventional: row index; proposed: even=upper, odd=lower

  static CellSelect upper(int pair = 0) { return {2 * pair}; }
  static CellSelect lower(int pair = 0) { return {2 * pair + 1}; }
  static CellSelect row(int r) { return {r}; }
};

struct PhaseTiming {
  double lead_in = 2e-9;      // settle past the forcing release
  double precharge = 2e-9;
  double settle = 1e-9;
  double wl_pulse = 2e-9;
  double strobe_lead = 100e-12; // sense strobe before WL fall
  double edge = 100e-12;
  double tail = 6e-9;           // post-access observation window
};

struct DecodedAddress {
  std::string word_line;
  double word_line_high = 0.0;
  std::string bl, blb;
  std::string sense_out;
  int branch = 0; // 0 = BL0 pair / SA0, 1 = BL1 pair / SA1
};

// conventional: row k -> (wl<k>, the only pair, the only SA);
// proposed: even addresses -> (WL0 of the pair, BL0 pair, SA0), odd -> WL1/BL1/SA1.
DecodedAddress decode_address(const ColumnSignals& sig, int address);

// Precharge the selected pair, release, pulse the word line with the data
// path disabled, strobe the sense output just before WL falls. expected_bit
// = -1 reads the expectation from the column's preset bits.
StimulusSchedule sequence_read(const ColumnSignals& sig, const CellSelect& sel,
                               const PhaseTiming& t = {}, int expected_bit = -1);

// Drive D, assert the selected data enable, pulse the word line inside the
// enable window, check the internal node polarity afterwards.
StimulusSchedule sequence_write(const ColumnSignals& sig, const CellSelect& sel, int bit,
                                const PhaseTiming& t = {});

// Quiescent window: all word lines grounded, data enables low, precharge off;
// end-of-window checks bound the storage-node drift.
StimulusSchedule sequence_hold(const ColumnSignals& sig, double duration,
                               const PhaseTiming& t = {});

// b appended after a, shifted by a.duration.
StimulusSchedule concat_schedules(const StimulusSchedule& a, const StimulusSchedule& b);

StimulusSchedule sequence_write_then_read(const ColumnSignals& sig, const CellSelect& sel,
                                          int bit, const PhaseTiming& t = {});

struct CheckResult {
  ScheduleCheck check;
  double measured = 0.0;
  bool pass = false;
};

struct ScenarioResult {
  Waveform waveform;
  std::vector<CheckResult> checks;
  bool all_passed() const;
};

// Runs the schedule as piecewise-linear drives through the transient engine
// and evaluates every check against the waveform.
ScenarioResult run_scenario(const Netlist& n, const ColumnSignals& sig,
                            const StimulusSchedule& s, const SolverConfig& cfg);

} // namespace stacksim
