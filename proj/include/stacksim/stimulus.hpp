// Timed control events realizing one protocol, consumed by the transient
// engine as piecewise-linear node drives.
#pragma once

#include <string>
#include <vector>

namespace stacksim {

struct StimulusEvent {
  double time = 0.0;   // seconds, non-decreasing across the schedule
  std::string signal;  // node name in the target netlist
  double level = 0.0;  // volts
};

struct ScheduleCheck {
  std::string name;
  double time = 0.0;
  std::string signal;
  double expected = 0.0;
  double tolerance = 0.0;
};

struct StimulusSchedule {
  std::vector<StimulusEvent> events;
  double duration = 0.0;
  std::vector<ScheduleCheck> checks;
  double edge = 100e-12; // rise/fall time applied to every level change
};

} // namespace stacksim
