// Circuit data model plus the SPICE-subset text format (parser, canonical
// serializer, validator).
//
// Grammar: first line is the title (unless it already parses as a card);
// comments start with '*' or ';'; everything is case-insensitive; magnitude
// suffixes k/m/u/n/p/f. Cards:
//   R<name> a b <ohms>
//   C<name> a b <farads>
//   V<name> p n DC <volts> | V<name> p n PULSE(v1 v2 delay rise fall width period)
//   M<name> d g s b <model> [W=<w>] [L=<l>]
//   A<name> plus minus out ref gain=<v/v> vlo=<v> vhi=<v>     behavioral sense amp
//   S<name> p n c ron=<ohms> roff=<ohms> vt=<volts> [inv=1]   voltage-controlled switch
//   .model <name> nmos|pmos [(]key=value...[)]
//   .op    .tran <step> <stop>    .end
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stacksim/device_models.hpp"

namespace stacksim {

enum class DeviceKind { Mos, Resistor, Capacitor, DcSource, PulseSource, SenseAmp, Switch };

struct PulseSpec {
  double v1 = 0, v2 = 0, delay = 0, rise = 0, fall = 0, width = 0, period = 0;
  bool operator==(const PulseSpec&) const = default;
};

struct SenseAmpSpec {
  double gain = 1000.0;
  double vlo = 0.0;
  double vhi = 1.2;
  bool operator==(const SenseAmpSpec&) const = default;
};

struct SwitchSpec {
  double ron = 1.0;
  double roff = 1e12;
  double vt = 0.6;     // control threshold
  bool inverted = false; // conducts when control is below vt
  bool operator==(const SwitchSpec&) const = default;
};

struct DeviceInstance {
  std::string name;
  DeviceKind kind = DeviceKind::Resistor;
  std::vector<std::string> nodes; // mos: d g s b; senseamp: + - out ref; switch: p n c
  double value = 0.0;             // ohms / farads / DC volts
  PulseSpec pulse;
  std::string model;    // mos model card name
  double w_over_l = 1.0;
  SenseAmpSpec senseamp;
  SwitchSpec sw;

  bool operator==(const DeviceInstance&) const = default;
};

struct TranDirective {
  double dt = 0.0;
  double tstop = 0.0;
  bool operator==(const TranDirective&) const = default;
};

struct AnalysisDirectives {
  bool op = false;
  std::optional<TranDirective> tran;
  bool operator==(const AnalysisDirectives&) const = default;
};

struct Netlist {
  std::string title;
  std::vector<DeviceInstance> devices;         // ordered; instance names unique
  std::map<std::string, MosParams> model_cards;
  AnalysisDirectives directives;

  // Node names in first-use order, ground "0" excluded.
  std::vector<std::string> node_order() const;
  const DeviceInstance* find_device(const std::string& name) const;

  bool operator==(const Netlist&) const = default;
};

enum class Severity { Error, Warning };

struct Diagnostic {
  int line = 1;   // 1-based
  int column = 1; // 1-based
  Severity severity = Severity::Error;
  std::string message;
};

struct ParseResult {
  std::optional<Netlist> netlist; // present iff no error-severity diagnostics
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return netlist.has_value(); }
};

// Parses and validates; never throws on malformed input. All diagnostics are
// reported, not just the first.
ParseResult parse_netlist(const std::string& source);

// Canonical, deterministic text form; parse_netlist maps it back to a
// structurally equal Netlist.
std::string serialize_netlist(const Netlist& n);

// Invariant + connectivity checks. Empty result means the netlist is clean.
std::vector<Diagnostic> validate(const Netlist& n);

// Shortest round-trip decimal form used across text outputs.
std::string format_double(double v);

std::string to_string(const Diagnostic& d);

} // namespace stacksim
