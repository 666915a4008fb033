#include "stacksim/power.hpp"

#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace stacksim {

std::string fingerprint_hex(const std::string& data) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string shared_config_fingerprint(const Netlist& n, const SolverConfig& cfg,
                                      double hold_duration) {
  std::ostringstream os;
  for (const auto& [name, p] : n.model_cards)
    os << name << ";" << (p.polarity == Polarity::NChannel ? "n" : "p") << ";"
       << format_double(p.vth0) << ";" << format_double(p.kp) << ";" << format_double(p.n_slope)
       << ";" << format_double(p.eta_dibl) << ";" << format_double(p.lambda_clm) << ";"
       << format_double(p.temp_vt) << "\n";
  os << "abstol=" << format_double(cfg.abstol) << " vntol=" << format_double(cfg.vntol)
     << " reltol=" << format_double(cfg.reltol) << " gmin=" << format_double(cfg.gmin)
     << " dt=" << format_double(cfg.dt)
     << " integ=" << (cfg.integrator == Integrator::Trapezoidal ? "trap" : "be")
     << " hold=" << format_double(hold_duration);
  return fingerprint_hex(os.str());
}

PowerMeasurement measure_hold_power(const Waveform& w, const std::string& supply_signal,
                                    double v_supply, double t0, double t1) {
  const int col = w.column(supply_signal);
  if (col < 0) throw std::out_of_range("no signal '" + supply_signal + "' in waveform");
  if (!(t1 > t0)) throw std::invalid_argument("measurement window is empty");
  if (w.time.empty() || t0 < w.time.front() - 1e-15 || t1 > w.time.back() + 1e-15)
    throw std::invalid_argument("measurement window outside the waveform span");

  const double eps = 1e-12 * std::max(1.0, std::fabs(t1));
  int lo = 0;
  while (lo < static_cast<int>(w.time.size()) && w.time[lo] < t0 - eps) ++lo;
  int hi = static_cast<int>(w.time.size()) - 1;
  while (hi >= 0 && w.time[hi] > t1 + eps) --hi;
  if (hi - lo < 10) throw std::invalid_argument("measurement window shorter than 10 time steps");

  double integral = 0.0;
  for (int k = lo; k < hi; ++k) {
    const double a = std::fabs(w.samples(k, col));
    const double b = std::fabs(w.samples(k + 1, col));
    integral += 0.5 * (a + b) * (w.time[k + 1] - w.time[k]);
  }
  PowerMeasurement m;
  m.mean_current = integral / (w.time[hi] - w.time[lo]);
  m.power = v_supply * m.mean_current;
  return m;
}

namespace {

ArchPowerBlock make_block(const ArchPowerInput& in) {
  if (!in.waveform) throw std::invalid_argument("missing waveform for " + in.architecture);
  if (in.stored_bits < 1) throw std::invalid_argument("stored_bits must be >= 1");
  const PowerMeasurement m =
      measure_hold_power(*in.waveform, in.supply_signal, in.supply_voltage, in.window_t0,
                         in.window_t1);
  ArchPowerBlock b;
  b.architecture = in.architecture;
  b.supply_voltage = in.supply_voltage;
  b.window_t0 = in.window_t0;
  b.window_t1 = in.window_t1;
  b.mean_current = m.mean_current;
  b.leakage_power = m.power;
  b.stored_bits = in.stored_bits;
  b.leakage_per_bit = m.power / in.stored_bits;
  return b;
}

nlohmann::ordered_json block_json(const ArchPowerBlock& b) {
  return nlohmann::ordered_json{{"architecture", b.architecture},
                                {"supply_voltage_v", b.supply_voltage},
                                {"hold_window_s", {b.window_t0, b.window_t1}},
                                {"mean_supply_current_a", b.mean_current},
                                {"leakage_power_w", b.leakage_power},
                                {"stored_bits", b.stored_bits},
                                {"leakage_per_bit_w", b.leakage_per_bit}};
}

} // namespace

std::string PowerReport::to_json() const {
  nlohmann::ordered_json j{{"config_fingerprint", config_fingerprint},
                           {"conventional", block_json(conventional)},
                           {"proposed", block_json(proposed)},
                           {"ratio", ratio},
                           {"savings_percent", savings_percent}};
  return j.dump(2) + "\n";
}

PowerReport compare_architectures(const ArchPowerInput& conv, const ArchPowerInput& prop) {
  if (conv.config_fingerprint != prop.config_fingerprint)
    throw std::invalid_argument("mismatched configuration fingerprints: " +
                                conv.config_fingerprint + " vs " + prop.config_fingerprint);
  PowerReport r;
  r.conventional = make_block(conv);
  r.proposed = make_block(prop);
  r.config_fingerprint =
      fingerprint_hex(conv.netlist_text + prop.netlist_text + conv.config_fingerprint);
  r.ratio = r.conventional.leakage_per_bit / r.proposed.leakage_per_bit;
  r.savings_percent = 100.0 * (1.0 - 1.0 / r.ratio);
  return r;
}

} // namespace stacksim
