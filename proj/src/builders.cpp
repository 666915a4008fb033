#include "stacksim/builders.hpp"

#include <stdexcept>

namespace stacksim {

namespace {

constexpr double kSwitchVt = 0.6; // control threshold for all logic-driven switches

void ensure_models(Netlist& nl, const CellConfig& cfg) {
  auto put = [&](const std::string& name, MosParams p) {
    p.w_over_l = 1.0; // sizing goes on the instances
    nl.model_cards.emplace(name, p);
  };
  put("nmos_pd", cfg.pull_down);
  put("nmos_acc", cfg.access);
  put("pmos_pu", cfg.pull_up);
}

DeviceInstance mos(const std::string& name, const std::string& d, const std::string& g,
                   const std::string& s, const std::string& b, const std::string& model,
                   double w_over_l) {
  DeviceInstance dev;
  dev.name = name;
  dev.kind = DeviceKind::Mos;
  dev.nodes = {d, g, s, b};
  dev.model = model;
  dev.w_over_l = w_over_l;
  return dev;
}

DeviceInstance two_term(DeviceKind kind, const std::string& name, const std::string& p,
                        const std::string& n, double value) {
  DeviceInstance dev;
  dev.name = name;
  dev.kind = kind;
  dev.nodes = {p, n};
  dev.value = value;
  return dev;
}

DeviceInstance dc_source(const std::string& name, const std::string& p, const std::string& n,
                         double volts) {
  return two_term(DeviceKind::DcSource, name, p, n, volts);
}

DeviceInstance switch_dev(const std::string& name, const std::string& p, const std::string& n,
                          const std::string& c, double ron, double roff, bool inverted = false) {
  DeviceInstance dev;
  dev.name = name;
  dev.kind = DeviceKind::Switch;
  dev.nodes = {p, n, c};
  dev.sw.ron = ron;
  dev.sw.roff = roff;
  dev.sw.vt = kSwitchVt;
  dev.sw.inverted = inverted;
  return dev;
}

DeviceInstance sense_amp(const std::string& name, const std::string& plus,
                         const std::string& minus, const std::string& out,
                         const std::string& ref, double gain, double vhi) {
  DeviceInstance dev;
  dev.name = name;
  dev.kind = DeviceKind::SenseAmp;
  dev.nodes = {plus, minus, out, ref};
  dev.senseamp.gain = gain;
  dev.senseamp.vlo = 0.0;
  dev.senseamp.vhi = vhi;
  return dev;
}

// forcing window control: high until force_release, then off for good
DeviceInstance force_enable_source(const CellConfig& cfg) {
  DeviceInstance dev;
  dev.name = "vicen";
  dev.kind = DeviceKind::PulseSource;
  dev.nodes = {"icen", "0"};
  dev.pulse = {cfg.vdd, 0.0, cfg.force_release, 100e-12, 100e-12, 1.0, 2.0};
  return dev;
}

void append_forcing_switch(Netlist& nl, const CellConfig& cfg, const std::string& name,
                           const std::string& node, const std::string& rail) {
  nl.devices.push_back(switch_dev(name, node, rail, "icen", cfg.force_ron, cfg.switch_roff));
}

void check_bits(std::vector<int>& bits, int count) {
  if (bits.empty()) bits.assign(count, 1);
  if (static_cast<int>(bits.size()) != count)
    throw std::invalid_argument("preset_bits size does not match the column capacity");
  for (int b : bits)
    if (b != 0 && b != 1) throw std::invalid_argument("preset bits must be 0 or 1");
}

} // namespace

void append_6t_cell(Netlist& nl, const CellConfig& cfg, const std::string& instance_prefix,
                    int first_index, const std::string& rail_hi, const std::string& rail_lo,
                    const std::string& bl, const std::string& blb, const std::string& wl,
                    const std::string& q, const std::string& qb, const std::string& bulk_n,
                    const std::string& bulk_p) {
  ensure_models(nl, cfg);
  const std::string bn = bulk_n.empty() ? rail_lo : bulk_n;
  const std::string bp = bulk_p.empty() ? rail_hi : bulk_p;
  auto name = [&](int k) { return "m" + instance_prefix + std::to_string(first_index + k); };
  for (const auto& dev : {
           mos(name(1), q, qb, rail_lo, bn, "nmos_pd", cfg.pull_down.w_over_l),
           mos(name(2), q, qb, rail_hi, bp, "pmos_pu", cfg.pull_up.w_over_l),
           mos(name(3), qb, q, rail_lo, bn, "nmos_pd", cfg.pull_down.w_over_l),
           mos(name(4), qb, q, rail_hi, bp, "pmos_pu", cfg.pull_up.w_over_l),
           mos(name(5), bl, wl, q, bn, "nmos_acc", cfg.access.w_over_l),
           mos(name(6), blb, wl, qb, bn, "nmos_acc", cfg.access.w_over_l),
       }) {
    if (nl.find_device(dev.name))
      throw std::invalid_argument("instance name collision: " + dev.name);
    nl.devices.push_back(dev);
  }
}

Netlist build_6t_cell(const CellConfig& cfg, const std::string& instance_prefix,
                      const std::string& rail_hi, const std::string& rail_lo,
                      const std::string& bl, const std::string& blb, const std::string& wl) {
  Netlist nl;
  nl.title = "single 6t sram cell";
  append_6t_cell(nl, cfg, instance_prefix, 0, rail_hi, rail_lo, bl, blb, wl,
                 instance_prefix + "q", instance_prefix + "qb");
  return nl;
}

StackedPairFragment build_stacked_pair(const CellConfig& cfg, const std::string& prefix) {
  StackedPairFragment f;
  f.netlist.title = "stacked sram cell pair";
  f.rail_top = prefix + "vddh";
  f.rail_mid = prefix + "vm";
  f.q_upper = prefix + "q0";
  f.qb_upper = prefix + "qb0";
  f.q_lower = prefix + "q1";
  f.qb_lower = prefix + "qb1";
  f.bl0 = prefix + "bl0";
  f.bl0b = prefix + "bl0b";
  f.bl1 = prefix + "bl1";
  f.bl1b = prefix + "bl1b";
  f.wl0 = prefix + "wl0";
  f.wl1 = prefix + "wl1";
  // upper cell M1..M6, lower cell M7..M12; NMOS bulks on the common substrate
  // (ground), PMOS bulks in per-cell n-wells tied to each cell's high rail
  append_6t_cell(f.netlist, cfg, prefix, 0, f.rail_top, f.rail_mid, f.bl0, f.bl0b, f.wl0,
                 f.q_upper, f.qb_upper, "0", f.rail_top);
  append_6t_cell(f.netlist, cfg, prefix, 6, f.rail_mid, "0", f.bl1, f.bl1b, f.wl1, f.q_lower,
                 f.qb_lower, "0", f.rail_mid);
  f.netlist.devices.push_back(
      two_term(DeviceKind::Capacitor, "c" + prefix + "mid", f.rail_mid, "0", cfg.midrail_cap));
  return f;
}

ColumnBuild build_conventional_column(const CellConfig& cfg, int n_cells,
                                      std::vector<int> preset_bits) {
  if (n_cells < 1) throw std::invalid_argument("n_cells must be >= 1");
  check_bits(preset_bits, n_cells);

  ColumnBuild out;
  Netlist& nl = out.netlist;
  nl.title = "conventional sram column of " + std::to_string(n_cells) + " cells";

  nl.devices.push_back(dc_source("vvdd", "vdd", "0", cfg.vdd));

  for (int i = 0; i < n_cells; ++i) {
    const std::string si = std::to_string(i);
    append_6t_cell(nl, cfg, "", 6 * i, "vdd", "0", "bl", "blb", "wl" + si, "q" + si, "qb" + si,
                   "0", "vdd");
  }

  nl.devices.push_back(two_term(DeviceKind::Capacitor, "cbl", "bl", "0", cfg.bitline_cap));
  nl.devices.push_back(two_term(DeviceKind::Capacitor, "cblb", "blb", "0", cfg.bitline_cap));

  // precharge to vdd through p-channel devices gated by pc0 (active low)
  nl.devices.push_back(dc_source("vvpc", "vpc", "0", cfg.vdd));
  nl.devices.push_back(mos("mpc", "bl", "pc0", "vpc", "vpc", "pmos_pu", cfg.precharge_w_over_l));
  nl.devices.push_back(mos("mpcb", "blb", "pc0", "vpc", "vpc", "pmos_pu", cfg.precharge_w_over_l));

  // write path: d and its switch-generated complement, gated by den0
  nl.devices.push_back(dc_source("vvwr", "vwr", "0", cfg.vdd));
  nl.devices.push_back(switch_dev("sd", "bl", "d", "den0", cfg.data_switch_ron, cfg.switch_roff));
  nl.devices.push_back(
      switch_dev("sdb", "blb", "ddrvb", "den0", cfg.data_switch_ron, cfg.switch_roff));
  nl.devices.push_back(
      switch_dev("sinv1", "ddrvb", "0", "d", cfg.data_switch_ron, cfg.switch_roff));
  nl.devices.push_back(
      switch_dev("sinv2", "ddrvb", "vwr", "d", cfg.data_switch_ron, cfg.switch_roff, true));

  nl.devices.push_back(dc_source("vsaref0", "saref0", "0", cfg.vdd / 2.0));
  nl.devices.push_back(
      sense_amp("asa0", "bl", "blb", "sa0_out", "saref0", cfg.senseamp_gain, cfg.vdd));
  nl.devices.push_back(
      two_term(DeviceKind::Capacitor, "csa0", "sa0_out", "0", cfg.senseamp_load_cap));

  // initial-datum forcing: 1 ohm paths enabled for the first nanosecond
  nl.devices.push_back(force_enable_source(cfg));
  nl.devices.push_back(dc_source("vvic1", "vic1", "0", cfg.vdd));
  for (int i = 0; i < n_cells; ++i) {
    const std::string si = std::to_string(i);
    const bool one = preset_bits[i] == 1;
    append_forcing_switch(nl, cfg, "sfq" + si, "q" + si, one ? "vic1" : "0");
    append_forcing_switch(nl, cfg, "sfqb" + si, "qb" + si, one ? "0" : "vic1");
  }

  ColumnSignals& sig = out.signals;
  sig.proposed = false;
  sig.capacity = n_cells;
  for (int i = 0; i < n_cells; ++i) {
    sig.word_lines.push_back("wl" + std::to_string(i));
    sig.word_line_high.push_back(cfg.vdd);
    sig.q_nodes.push_back("q" + std::to_string(i));
    sig.qb_nodes.push_back("qb" + std::to_string(i));
    sig.rails.push_back({0.0, cfg.vdd});
  }
  sig.bl0 = "bl";
  sig.bl0b = "blb";
  sig.den0 = "den0";
  sig.den_levels = {0.0, cfg.vdd};
  sig.pc0 = "pc0";
  sig.pc0_levels = {cfg.vdd, 0.0};
  sig.data_in = "d";
  sig.data_levels = {0.0, cfg.vdd};
  sig.sa0_out = "sa0_out";
  sig.preset_bits = preset_bits;
  sig.supply_source = "vvdd";
  sig.supply_voltage = cfg.vdd;
  return out;
}

ColumnBuild build_proposed_column(const CellConfig& cfg, int n_pairs,
                                  std::vector<int> preset_bits) {
  if (n_pairs < 1) throw std::invalid_argument("n_pairs must be >= 1");
  check_bits(preset_bits, 2 * n_pairs);

  ColumnBuild out;
  Netlist& nl = out.netlist;
  nl.title = "proposed stacked sram column of " + std::to_string(n_pairs) + " pairs";

  const double vddh = cfg.vddh();
  nl.devices.push_back(dc_source("vvddh", "vddh", "0", vddh));

  for (int p = 0; p < n_pairs; ++p) {
    const std::string mid = "vm" + std::to_string(p);
    const std::string up = std::to_string(2 * p);
    const std::string lo = std::to_string(2 * p + 1);
    append_6t_cell(nl, cfg, "", 12 * p, "vddh", mid, "bl0", "bl0b", "wl" + up, "q" + up,
                   "qb" + up, "0", "vddh");
    append_6t_cell(nl, cfg, "", 12 * p + 6, mid, "0", "bl1", "bl1b", "wl" + lo, "q" + lo,
                   "qb" + lo, "0", mid);
    nl.devices.push_back(two_term(DeviceKind::Capacitor, "cmid" + std::to_string(p), mid, "0",
                                  cfg.midrail_cap));
  }

  for (const char* n : {"bl0", "bl0b", "bl1", "bl1b"})
    nl.devices.push_back(
        two_term(DeviceKind::Capacitor, std::string("c") + n, n, "0", cfg.bitline_cap));

  // elevated-branch precharge (to vddh) plus the standard branch (to vdd),
  // each with its reservoir capacitor pair
  nl.devices.push_back(dc_source("vvpc0", "vpc0", "0", vddh));
  nl.devices.push_back(mos("mpc0", "bl0", "pc0", "vpc0", "vpc0", "pmos_pu", cfg.precharge_w_over_l));
  nl.devices.push_back(
      mos("mpc0b", "bl0b", "pc0", "vpc0", "vpc0", "pmos_pu", cfg.precharge_w_over_l));
  nl.devices.push_back(two_term(DeviceKind::Capacitor, "cpc0", "bl0", "0", cfg.precharge_cap));
  nl.devices.push_back(two_term(DeviceKind::Capacitor, "cpc0b", "bl0b", "0", cfg.precharge_cap));

  nl.devices.push_back(dc_source("vvpc1", "vpc1", "0", cfg.vdd));
  nl.devices.push_back(mos("mpc1", "bl1", "pc1", "vpc1", "vpc1", "pmos_pu", cfg.precharge_w_over_l));
  nl.devices.push_back(
      mos("mpc1b", "bl1b", "pc1", "vpc1", "vpc1", "pmos_pu", cfg.precharge_w_over_l));
  nl.devices.push_back(two_term(DeviceKind::Capacitor, "cpc1", "bl1", "0", cfg.precharge_cap));
  nl.devices.push_back(two_term(DeviceKind::Capacitor, "cpc1b", "bl1b", "0", cfg.precharge_cap));

  // data routing: den0 drives the level-shifted BL0 pair, den1 the BL1 pair
  nl.devices.push_back(dc_source("vvwrh", "vwrh", "0", vddh));
  nl.devices.push_back(dc_source("vvwrl", "vwrl", "0", cfg.vdd));
  nl.devices.push_back(
      switch_dev("sd0", "bl0", "d0drv", "den0", cfg.data_switch_ron, cfg.switch_roff));
  nl.devices.push_back(
      switch_dev("sd0b", "bl0b", "d0drvb", "den0", cfg.data_switch_ron, cfg.switch_roff));
  nl.devices.push_back(
      switch_dev("sd1", "bl1", "d", "den1", cfg.data_switch_ron, cfg.switch_roff));
  nl.devices.push_back(
      switch_dev("sd1b", "bl1b", "d1drvb", "den1", cfg.data_switch_ron, cfg.switch_roff));
  // upper-branch write drivers run rail to rail (0 / vddh): the access NMOS
  // cannot pass mid-range lows hard enough to flip the body-biased upper
  // core, so writes overdrive the line the way conventional writes drive BL
  // fully to ground
  nl.devices.push_back(
      switch_dev("sls0a", "d0drv", "vwrh", "d", cfg.data_switch_ron, cfg.switch_roff));
  nl.devices.push_back(
      switch_dev("sls0b", "d0drv", "0", "d", cfg.data_switch_ron, cfg.switch_roff, true));
  nl.devices.push_back(
      switch_dev("sls0c", "d0drvb", "0", "d", cfg.data_switch_ron, cfg.switch_roff));
  nl.devices.push_back(
      switch_dev("sls0d", "d0drvb", "vwrh", "d", cfg.data_switch_ron, cfg.switch_roff, true));
  nl.devices.push_back(
      switch_dev("sls1a", "d1drvb", "0", "d", cfg.data_switch_ron, cfg.switch_roff));
  nl.devices.push_back(
      switch_dev("sls1b", "d1drvb", "vwrl", "d", cfg.data_switch_ron, cfg.switch_roff, true));

  // sensing: SA0 detects in the elevated range, both emit 0..vdd logic
  nl.devices.push_back(dc_source("vsaref0", "saref0", "0", (cfg.vdd + vddh) / 2.0));
  nl.devices.push_back(
      sense_amp("asa0", "bl0", "bl0b", "sa0_out", "saref0", cfg.senseamp_gain, cfg.vdd));
  nl.devices.push_back(
      two_term(DeviceKind::Capacitor, "csa0", "sa0_out", "0", cfg.senseamp_load_cap));
  nl.devices.push_back(dc_source("vsaref1", "saref1", "0", cfg.vdd / 2.0));
  nl.devices.push_back(
      sense_amp("asa1", "bl1", "bl1b", "sa1_out", "saref1", cfg.senseamp_gain, cfg.vdd));
  nl.devices.push_back(
      two_term(DeviceKind::Capacitor, "csa1", "sa1_out", "0", cfg.senseamp_load_cap));

  nl.devices.push_back(force_enable_source(cfg));
  nl.devices.push_back(dc_source("vvich", "vich", "0", vddh));
  nl.devices.push_back(dc_source("vvicm", "vicm", "0", cfg.vdd));
  for (int p = 0; p < n_pairs; ++p) {
    const std::string up = std::to_string(2 * p);
    const std::string lo = std::to_string(2 * p + 1);
    const bool upper_one = preset_bits[2 * p] == 1;
    const bool lower_one = preset_bits[2 * p + 1] == 1;
    append_forcing_switch(nl, cfg, "sfq" + up, "q" + up, upper_one ? "vich" : "vicm");
    append_forcing_switch(nl, cfg, "sfqb" + up, "qb" + up, upper_one ? "vicm" : "vich");
    append_forcing_switch(nl, cfg, "sfq" + lo, "q" + lo, lower_one ? "vicm" : "0");
    append_forcing_switch(nl, cfg, "sfqb" + lo, "qb" + lo, lower_one ? "0" : "vicm");
    append_forcing_switch(nl, cfg, "sfm" + std::to_string(p), "vm" + std::to_string(p), "vicm");
  }

  ColumnSignals& sig = out.signals;
  sig.proposed = true;
  sig.capacity = 2 * n_pairs;
  for (int a = 0; a < sig.capacity; ++a) {
    const bool upper = a % 2 == 0;
    sig.word_lines.push_back("wl" + std::to_string(a));
    sig.word_line_high.push_back(upper ? vddh : cfg.vdd);
    sig.q_nodes.push_back("q" + std::to_string(a));
    sig.qb_nodes.push_back("qb" + std::to_string(a));
    sig.rails.push_back(upper ? RailSpan{cfg.vdd, vddh} : RailSpan{0.0, cfg.vdd});
  }
  sig.bl0 = "bl0";
  sig.bl0b = "bl0b";
  sig.bl1 = "bl1";
  sig.bl1b = "bl1b";
  sig.den0 = "den0";
  sig.den1 = "den1";
  sig.den_levels = {0.0, cfg.vdd};
  sig.pc0 = "pc0";
  sig.pc0_levels = {vddh, 0.0};
  sig.pc1 = "pc1";
  sig.pc1_levels = {cfg.vdd, 0.0};
  sig.data_in = "d";
  sig.data_levels = {0.0, cfg.vdd};
  sig.sa0_out = "sa0_out";
  sig.sa1_out = "sa1_out";
  sig.preset_bits = preset_bits;
  sig.supply_source = "vvddh";
  sig.supply_voltage = vddh;
  return out;
}

} // namespace stacksim
