// Compact MOS model (single-piece interpolation, continuous from subthreshold
// through strong inversion, with DIBL and channel-length modulation) plus the
// series-stack leakage solver built on it.
#pragma once

#include <string>
#include <vector>

namespace stacksim {

enum class Polarity { NChannel, PChannel };

struct MosParams {
  Polarity polarity = Polarity::NChannel;
  double vth0 = 0.4;        // zero-bias threshold [V], magnitude for p-channel
  double kp = 200e-6;       // transconductance parameter [A/V^2]
  double n_slope = 1.5;     // subthreshold slope factor
  double eta_dibl = 0.05;   // DIBL coefficient [V/V]
  double lambda_clm = 0.05; // channel-length modulation [1/V]
  double w_over_l = 1.0;    // width-to-length ratio
  double temp_vt = 0.02585; // thermal voltage [V] (300 K)

  bool operator==(const MosParams&) const = default;
};

MosParams default_nmos(double w_over_l = 1.0);
MosParams default_pmos(double w_over_l = 1.0);

// Checks the parameter-card invariants; fills *why with the first violation.
bool mos_params_valid(const MosParams& p, std::string* why = nullptr);

struct MosConductances {
  double g_m;  // d(i_d)/d(v_g)
  double g_ds; // d(i_d)/d(v_d)
  double g_ms; // d(i_d)/d(v_s)
};

struct MosEval {
  double i_d;
  double g_m, g_ds, g_ms;
};

// Drain current, positive when flowing drain->source inside the device.
// P-channel cards are evaluated by negating all terminal voltages and the
// result. Total over finite inputs; C1-continuous everywhere.
double mos_current(const MosParams& p, double v_g, double v_d, double v_s, double v_b);

// Analytic partials of mos_current with respect to gate, drain and source.
// The bulk partial is -(g_m + g_ds + g_ms) since only voltage differences
// enter the model.
MosConductances mos_conductances(const MosParams& p, double v_g, double v_d, double v_s,
                                 double v_b);

// Current and conductances in one evaluation (what the Newton loop stamps).
MosEval mos_eval(const MosParams& p, double v_g, double v_d, double v_s, double v_b);

struct StackResult {
  double leakage;                // common off-current through the stack [A]
  std::vector<double> mid_nodes; // interior node voltages, bottom to top [V]
};

// Off-current of n_series devices in series across v_total, all gates and
// bulks tied to the bottom source. Newton on the interior nodes until the
// device-to-device current mismatch is below 1e-15 A.
// Throws std::runtime_error after the iteration cap.
StackResult stack_leakage(const MosParams& p, int n_series, double v_total);

namespace detail {
// Overflow-safe ln(1+e^x) and 1/(1+e^-x); exp arguments are clamped to
// [-60, 0], which leaves the functions exact to double precision.
double softplus(double x);
double logistic(double x);
} // namespace detail

} // namespace stacksim
