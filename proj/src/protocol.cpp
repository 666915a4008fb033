#include "stacksim/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stacksim {

namespace {

void init_controls(StimulusSchedule& s, const ColumnSignals& sig, double d_level) {
  for (const auto& wl : sig.word_lines) s.events.push_back({0.0, wl, 0.0});
  s.events.push_back({0.0, sig.den0, sig.den_levels.off});
  if (!sig.den1.empty()) s.events.push_back({0.0, sig.den1, sig.den_levels.off});
  s.events.push_back({0.0, sig.pc0, sig.pc0_levels.off});
  if (!sig.pc1.empty()) s.events.push_back({0.0, sig.pc1, sig.pc1_levels.off});
  s.events.push_back({0.0, sig.data_in, d_level});
}

void check_storage_nodes(StimulusSchedule& s, const ColumnSignals& sig, int address, int bit,
                         double at, double tolerance, const std::string& tag) {
  const RailSpan span = sig.rails[address];
  const double q_level = bit ? span.hi : span.lo;
  const double qb_level = bit ? span.lo : span.hi;
  s.checks.push_back({tag + ":" + sig.q_nodes[address], at, sig.q_nodes[address], q_level,
                      tolerance});
  s.checks.push_back({tag + ":" + sig.qb_nodes[address], at, sig.qb_nodes[address], qb_level,
                      tolerance});
}

} // namespace

DecodedAddress decode_address(const ColumnSignals& sig, int address) {
  if (address < 0 || address >= sig.capacity)
    throw std::out_of_range("address " + std::to_string(address) + " outside column capacity " +
                            std::to_string(sig.capacity));
  DecodedAddress d;
  d.word_line = sig.word_lines[address];
  d.word_line_high = sig.word_line_high[address];
  if (!sig.proposed || address % 2 == 0) {
    d.bl = sig.bl0;
    d.blb = sig.bl0b;
    d.sense_out = sig.sa0_out;
    d.branch = 0;
  } else {
    d.bl = sig.bl1;
    d.blb = sig.bl1b;
    d.sense_out = sig.sa1_out;
    d.branch = 1;
  }
  return d;
}

StimulusSchedule sequence_read(const ColumnSignals& sig, const CellSelect& sel,
                               const PhaseTiming& t, int expected_bit) {
  const DecodedAddress dec = decode_address(sig, sel.address);
  const int bit = expected_bit < 0 ? sig.preset_bits[sel.address] : expected_bit;

  StimulusSchedule s;
  s.edge = t.edge;
  init_controls(s, sig, 0.0); // data path stays disabled throughout

  const std::string pc = dec.branch == 0 ? sig.pc0 : sig.pc1;
  const SignalLevels pc_lv = dec.branch == 0 ? sig.pc0_levels : sig.pc1_levels;

  const double pc_on = t.lead_in;
  const double pc_off = pc_on + t.precharge;
  const double wl_rise = pc_off + t.settle;
  const double wl_fall = wl_rise + t.wl_pulse;

  s.events.push_back({pc_on, pc, pc_lv.on});
  s.events.push_back({pc_off, pc, pc_lv.off});
  s.events.push_back({wl_rise, dec.word_line, dec.word_line_high});
  s.events.push_back({wl_fall, dec.word_line, 0.0});

  const double vdd_out = sig.data_levels.on; // SA logic swing
  s.checks.push_back({"sense:" + dec.sense_out, wl_fall - t.strobe_lead, dec.sense_out,
                      bit ? vdd_out : 0.0, 0.1 * vdd_out});
  // read must be non-destructive
  check_storage_nodes(s, sig, sel.address, bit, wl_fall + 5e-9, 0.05, "post_read");

  s.duration = wl_fall + t.tail;
  return s;
}

StimulusSchedule sequence_write(const ColumnSignals& sig, const CellSelect& sel, int bit,
                                const PhaseTiming& t) {
  if (bit != 0 && bit != 1) throw std::invalid_argument("bit must be 0 or 1");
  const DecodedAddress dec = decode_address(sig, sel.address);

  StimulusSchedule s;
  s.edge = t.edge;
  init_controls(s, sig, bit ? sig.data_levels.on : sig.data_levels.off);

  const std::string den = dec.branch == 0 ? sig.den0 : sig.den1;

  const double den_on = t.lead_in;
  const double wl_rise = den_on + t.settle;
  const double wl_fall = wl_rise + t.wl_pulse;
  const double den_off = wl_fall + t.settle; // WL falls before DEN releases

  s.events.push_back({den_on, den, sig.den_levels.on});
  s.events.push_back({wl_rise, dec.word_line, dec.word_line_high});
  s.events.push_back({wl_fall, dec.word_line, 0.0});
  s.events.push_back({den_off, den, sig.den_levels.off});

  const double span = sig.rails[sel.address].hi - sig.rails[sel.address].lo;
  check_storage_nodes(s, sig, sel.address, bit, den_off + 2e-9, 0.15 * span, "post_write");

  s.duration = den_off + t.tail;
  return s;
}

StimulusSchedule sequence_hold(const ColumnSignals& sig, double duration, const PhaseTiming& t) {
  if (!(duration > 0.0)) throw std::invalid_argument("hold duration must be positive");
  StimulusSchedule s;
  s.edge = t.edge;
  init_controls(s, sig, 0.0);
  for (int a = 0; a < sig.capacity; ++a)
    check_storage_nodes(s, sig, a, sig.preset_bits[a], duration, 1e-3, "hold");
  s.duration = duration;
  return s;
}

StimulusSchedule concat_schedules(const StimulusSchedule& a, const StimulusSchedule& b) {
  StimulusSchedule s = a;
  s.duration = a.duration + b.duration;
  for (StimulusEvent ev : b.events) {
    ev.time += a.duration;
    s.events.push_back(ev);
  }
  for (ScheduleCheck ck : b.checks) {
    ck.time += a.duration;
    s.checks.push_back(ck);
  }
  return s;
}

StimulusSchedule sequence_write_then_read(const ColumnSignals& sig, const CellSelect& sel,
                                          int bit, const PhaseTiming& t) {
  return concat_schedules(sequence_write(sig, sel, bit, t),
                          sequence_read(sig, sel, t, bit));
}

bool ScenarioResult::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

ScenarioResult run_scenario(const Netlist& n, const ColumnSignals& sig,
                            const StimulusSchedule& s, const SolverConfig& cfg) {
  // schedule signals must resolve against the column's signal map
  auto known = [&](const std::string& name) {
    if (name == sig.den0 || name == sig.den1 || name == sig.pc0 || name == sig.pc1 ||
        name == sig.data_in || name == sig.sa0_out || name == sig.sa1_out)
      return true;
    for (const auto& w : sig.word_lines)
      if (name == w) return true;
    for (const auto& q : sig.q_nodes)
      if (name == q) return true;
    for (const auto& qb : sig.qb_nodes)
      if (name == qb) return true;
    return name == sig.bl0 || name == sig.bl0b || name == sig.bl1 || name == sig.bl1b;
  };
  for (const auto& ev : s.events)
    if (!known(ev.signal))
      throw std::invalid_argument("schedule signal '" + ev.signal +
                                  "' does not resolve in the column signals");

  SolverConfig run_cfg = cfg;
  run_cfg.tstop = s.duration;
  ScenarioResult out;
  try {
    out.waveform = transient(n, run_cfg, &s);
  } catch (const NonConvergenceError& e) {
    // tag with the protocol phase: the last control change before the failure
    std::string phase = "lead-in";
    double best = -1.0;
    for (const auto& ev : s.events)
      if (ev.time <= e.time && ev.time >= best) {
        best = ev.time;
        phase = ev.signal + " change at t=" + format_double(ev.time);
      }
    throw NonConvergenceError(std::string(e.what()) + " (scenario phase: after " + phase + ")",
                              e.time, e.residual_trace);
  }
  for (const auto& ck : s.checks) {
    CheckResult r;
    r.check = ck;
    r.measured = out.waveform.value_near(ck.time, ck.signal);
    r.pass = std::fabs(r.measured - ck.expected) <= ck.tolerance;
    out.checks.push_back(r);
  }
  return out;
}

} // namespace stacksim
