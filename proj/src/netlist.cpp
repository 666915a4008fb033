#include "stacksim/netlist.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_map>

namespace stacksim {

std::vector<std::string> Netlist::node_order() const {
  std::vector<std::string> order;
  std::set<std::string> seen;
  for (const auto& d : devices)
    for (const auto& n : d.nodes)
      if (n != "0" && seen.insert(n).second) order.push_back(n);
  return order;
}

const DeviceInstance* Netlist::find_device(const std::string& name) const {
  for (const auto& d : devices)
    if (d.name == name) return &d;
  return nullptr;
}

std::string format_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string to_string(const Diagnostic& d) {
  std::ostringstream os;
  os << "line " << d.line << ", col " << d.column << ": "
     << (d.severity == Severity::Error ? "error" : "warning") << ": " << d.message;
  return os.str();
}

std::string serialize_netlist(const Netlist& n) {
  std::ostringstream os;
  os << n.title << "\n";
  for (const auto& [name, p] : n.model_cards) {
    os << ".model " << name << " " << (p.polarity == Polarity::NChannel ? "nmos" : "pmos")
       << " vth0=" << format_double(p.vth0) << " kp=" << format_double(p.kp)
       << " n=" << format_double(p.n_slope) << " eta=" << format_double(p.eta_dibl)
       << " lambda=" << format_double(p.lambda_clm) << " vt=" << format_double(p.temp_vt)
       << "\n";
  }
  for (const auto& d : n.devices) {
    os << d.name;
    for (const auto& nd : d.nodes) os << " " << nd;
    switch (d.kind) {
      case DeviceKind::Resistor:
      case DeviceKind::Capacitor:
        os << " " << format_double(d.value);
        break;
      case DeviceKind::DcSource:
        os << " DC " << format_double(d.value);
        break;
      case DeviceKind::PulseSource:
        os << " PULSE(" << format_double(d.pulse.v1) << " " << format_double(d.pulse.v2) << " "
           << format_double(d.pulse.delay) << " " << format_double(d.pulse.rise) << " "
           << format_double(d.pulse.fall) << " " << format_double(d.pulse.width) << " "
           << format_double(d.pulse.period) << ")";
        break;
      case DeviceKind::Mos:
        os << " " << d.model << " W=" << format_double(d.w_over_l) << " L=1";
        break;
      case DeviceKind::SenseAmp:
        os << " gain=" << format_double(d.senseamp.gain) << " vlo=" << format_double(d.senseamp.vlo)
           << " vhi=" << format_double(d.senseamp.vhi);
        break;
      case DeviceKind::Switch:
        os << " ron=" << format_double(d.sw.ron) << " roff=" << format_double(d.sw.roff)
           << " vt=" << format_double(d.sw.vt);
        if (d.sw.inverted) os << " inv=1";
        break;
    }
    os << "\n";
  }
  if (n.directives.op) os << ".op\n";
  if (n.directives.tran)
    os << ".tran " << format_double(n.directives.tran->dt) << " "
       << format_double(n.directives.tran->tstop) << "\n";
  os << ".end\n";
  return os.str();
}

std::vector<Diagnostic> validate(const Netlist& n) {
  std::vector<Diagnostic> diags;
  auto error = [&](const std::string& msg) { diags.push_back({1, 1, Severity::Error, msg}); };
  auto warn = [&](const std::string& msg) { diags.push_back({1, 1, Severity::Warning, msg}); };

  std::set<std::string> names;
  bool ground_seen = n.devices.empty(); // empty netlist is trivially fine
  for (const auto& d : n.devices) {
    if (!names.insert(d.name).second) error("duplicate instance '" + d.name + "'");

    size_t want = 0;
    switch (d.kind) {
      case DeviceKind::Mos: want = 4; break;
      case DeviceKind::SenseAmp: want = 4; break;
      case DeviceKind::Switch: want = 3; break;
      default: want = 2; break;
    }
    if (d.nodes.size() != want)
      error("device '" + d.name + "' has " + std::to_string(d.nodes.size()) +
            " terminals, expected " + std::to_string(want));

    for (const auto& nd : d.nodes)
      if (nd == "0") ground_seen = true;

    switch (d.kind) {
      case DeviceKind::Mos: {
        auto it = n.model_cards.find(d.model);
        if (it == n.model_cards.end()) {
          error("missing model '" + d.model + "' for device '" + d.name + "'");
        } else {
          std::string why;
          MosParams p = it->second;
          p.w_over_l = d.w_over_l;
          if (!mos_params_valid(p, &why))
            error("model '" + d.model + "' on '" + d.name + "': " + why);
        }
        break;
      }
      case DeviceKind::Resistor:
        if (!(d.value > 0.0) || !std::isfinite(d.value))
          error("resistor '" + d.name + "' needs a positive finite resistance");
        break;
      case DeviceKind::Capacitor:
        if (!(d.value > 0.0) || !std::isfinite(d.value))
          error("capacitor '" + d.name + "' needs a positive finite capacitance");
        break;
      case DeviceKind::DcSource:
        if (!std::isfinite(d.value)) error("source '" + d.name + "' has a non-finite level");
        break;
      case DeviceKind::PulseSource: {
        const PulseSpec& p = d.pulse;
        for (double x : {p.v1, p.v2, p.delay, p.rise, p.fall, p.width, p.period})
          if (!std::isfinite(x)) {
            error("pulse source '" + d.name + "' has a non-finite parameter");
            break;
          }
        if (p.rise < 0 || p.fall < 0 || p.delay < 0 || p.width < 0 || p.period < 0)
          error("pulse source '" + d.name + "' has a negative time parameter");
        break;
      }
      case DeviceKind::SenseAmp:
        if (!(d.senseamp.gain > 0.0) || !(d.senseamp.vhi > d.senseamp.vlo))
          error("sense amp '" + d.name + "' needs gain > 0 and vhi > vlo");
        break;
      case DeviceKind::Switch:
        if (!(d.sw.ron > 0.0) || !(d.sw.roff > 0.0) || d.sw.roff < d.sw.ron)
          error("switch '" + d.name + "' needs 0 < ron <= roff");
        break;
    }
  }
  if (!ground_seen) error("missing ground node '0'");

  if (n.directives.tran) {
    const auto& t = *n.directives.tran;
    if (!(t.dt > 0.0) || !(t.tstop >= t.dt))
      error(".tran needs 0 < step <= stop");
  }

  // connectivity: node index, per-node touch count, union through devices
  std::unordered_map<std::string, int> index;
  std::vector<std::string> node_names;
  auto node_id = [&](const std::string& s) {
    auto it = index.find(s);
    if (it != index.end()) return it->second;
    int id = static_cast<int>(node_names.size());
    index.emplace(s, id);
    node_names.push_back(s);
    return id;
  };
  int ground = node_id("0");
  std::vector<int> touches;
  std::vector<std::vector<int>> adj;
  auto grow = [&](int id) {
    if (static_cast<size_t>(id) >= touches.size()) {
      touches.resize(id + 1, 0);
      adj.resize(id + 1);
    }
  };
  grow(ground);
  for (const auto& d : n.devices) {
    std::vector<int> ids;
    for (const auto& nd : d.nodes) {
      int id = node_id(nd);
      grow(id);
      ++touches[id];
      ids.push_back(id);
    }
    for (size_t a = 0; a < ids.size(); ++a)
      for (size_t b = a + 1; b < ids.size(); ++b) {
        adj[ids[a]].push_back(ids[b]);
        adj[ids[b]].push_back(ids[a]);
      }
  }
  std::vector<char> reached(node_names.size(), 0);
  std::queue<int> bfs;
  bfs.push(ground);
  reached[ground] = 1;
  while (!bfs.empty()) {
    int at = bfs.front();
    bfs.pop();
    for (int next : adj[at])
      if (!reached[next]) {
        reached[next] = 1;
        bfs.push(next);
      }
  }
  for (size_t id = 0; id < node_names.size(); ++id) {
    if (static_cast<int>(id) == ground) continue;
    if (!reached[id] || touches[id] < 2)
      warn("floating node '" + node_names[id] + "'");
  }
  return diags;
}

} // namespace stacksim
