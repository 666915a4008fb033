// Parametric netlist generators for the conventional and series-stacked SRAM
// cells, pairs and columns, plus the signal map the protocol bench drives.
#pragma once

#include <string>
#include <vector>

#include "stacksim/netlist.hpp"

namespace stacksim {

struct CellConfig {
  double vdd = 1.2;
  MosParams pull_up = default_pmos(1.0);   // read-stability ratio: pd 2 / acc 1.5 / pu 1
  MosParams pull_down = default_nmos(2.0);
  MosParams access = default_nmos(1.5);
  double bitline_cap = 50e-15;   // per bit line
  double precharge_cap = 100e-15; // per C_PC device
  double senseamp_gain = 1000.0;
  double vddh_factor = 2.0;      // elevated supply = factor * vdd
  double midrail_cap = 2e-12;    // shared-rail decoupling per stacked pair
  double senseamp_load_cap = 10e-15;
  double precharge_w_over_l = 4.0;
  double data_switch_ron = 100.0;
  double switch_roff = 1e12;
  double force_ron = 1.0;        // IC forcing path
  double force_release = 1e-9;   // forcing window

  double vddh() const { return vddh_factor * vdd; }
};

struct SignalLevels {
  double off = 0.0;
  double on = 0.0;
};

struct RailSpan {
  double lo = 0.0;
  double hi = 0.0;
};

// Node names (plus drive levels) of everything the protocol bench touches.
// The conventional column leaves the second-branch fields empty.
struct ColumnSignals {
  bool proposed = false;
  int capacity = 0; // addressable cells

  std::vector<std::string> word_lines; // per address
  std::vector<double> word_line_high;  // active level per address

  std::string bl0, bl0b; // the only pair for conventional
  std::string bl1, bl1b;

  std::string den0, den1;
  SignalLevels den_levels;

  std::string pc0, pc1;          // precharge enables (PMOS gates, active low)
  SignalLevels pc0_levels, pc1_levels;

  std::string data_in;
  SignalLevels data_levels;

  std::string sa0_out, sa1_out;

  std::vector<std::string> q_nodes, qb_nodes; // per address
  std::vector<RailSpan> rails;                // nominal local span per address
  std::vector<int> preset_bits;               // datum each cell holds at t=0

  std::string supply_source; // instance name of the cell-array supply
  double supply_voltage = 0.0;
};

struct ColumnBuild {
  Netlist netlist;
  ColumnSignals signals;
};

// Appends one 6T cell (2 pull-ups, 2 pull-downs, 2 n-channel access devices,
// named M<first_index+1>..M<first_index+6>) between rail_hi and rail_lo.
// Empty bulk names default to the local rails.
void append_6t_cell(Netlist& nl, const CellConfig& cfg, const std::string& instance_prefix,
                    int first_index, const std::string& rail_hi, const std::string& rail_lo,
                    const std::string& bl, const std::string& blb, const std::string& wl,
                    const std::string& q, const std::string& qb,
                    const std::string& bulk_n = "", const std::string& bulk_p = "");

// Standalone single-cell fragment; internal nodes "<prefix>q"/"<prefix>qb".
Netlist build_6t_cell(const CellConfig& cfg, const std::string& instance_prefix,
                      const std::string& rail_hi, const std::string& rail_lo,
                      const std::string& bl, const std::string& blb, const std::string& wl);

struct StackedPairFragment {
  Netlist netlist;
  std::string rail_top;  // elevated rail node (no source in the fragment)
  std::string rail_mid;  // shared node between the two cells
  std::string q_upper, qb_upper, q_lower, qb_lower;
  std::string bl0, bl0b, bl1, bl1b, wl0, wl1;
};

// Two 6T cells in series: upper cell between the mid rail and the elevated
// rail (M1..M6), lower cell between ground and the mid rail (M7..M12). NMOS
// bulks sit on the common substrate (ground); PMOS bulks sit in per-cell
// n-wells tied to each cell's own high rail.
StackedPairFragment build_stacked_pair(const CellConfig& cfg, const std::string& prefix);

// n_cells 6T cells between vdd and ground sharing one precharged bit-line
// pair, with data switches and one sense amp. Word line for row k is wl<k>.
// `preset_bits` selects the datum each cell is forced to during the first
// nanosecond (default: all ones).
ColumnBuild build_conventional_column(const CellConfig& cfg, int n_cells,
                                      std::vector<int> preset_bits = {});

// n_pairs stacked pairs sharing two bit-line pairs: the BL0 pair (precharged
// to vddh) serves the upper cells, the BL1 pair (precharged to vdd) the lower
// cells. Even addresses map to upper cells, odd to lower.
ColumnBuild build_proposed_column(const CellConfig& cfg, int n_pairs,
                                  std::vector<int> preset_bits = {});

} // namespace stacksim
