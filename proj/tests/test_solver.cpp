#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "stacksim/solver.hpp"
#include "stacksim/waveform_io.hpp"

using namespace stacksim;

namespace {

Netlist load(const std::string& name) {
  const auto r = parse_netlist(read_text_file(std::string(TEST_DATA_DIR) + "/" + name));
  REQUIRE(r.ok());
  return *r.netlist;
}

Netlist from_text(const std::string& text) {
  const auto r = parse_netlist(text);
  if (!r.ok()) {
    for (const auto& d : r.diagnostics) MESSAGE(to_string(d));
  }
  REQUIRE(r.ok());
  return *r.netlist;
}

const std::string kInverter = R"(inverter bench
Vdd vdd 0 DC 1.2
Vin in 0 PULSE(0 1.2 2e-9 1e-10 1e-10 1e-8 4e-8)
M1 out in 0 0 nmos W=1 L=1
M2 out in vdd vdd pmos W=1 L=1
C1 out 0 10f
.model nmos nmos vth0=0.4 kp=200u n=1.5 eta=0.05 lambda=0.05 vt=25.85m
.model pmos pmos vth0=0.4 kp=80u n=1.5 eta=0.05 lambda=0.05 vt=25.85m
.end
)";

} // namespace

TEST_CASE("solve_linear: identity and diagonal systems") {
  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(3, 3);
  Eigen::VectorXd b(3);
  b << 1, -2, 7;
  CHECK((solve_linear(eye, b) - b).cwiseAbs().maxCoeff() == 0.0);

  Eigen::MatrixXd d(2, 2);
  d << 2, 0, 0, 4;
  Eigen::VectorXd rhs(2);
  rhs << 2, 8;
  const Eigen::VectorXd x = solve_linear(d, rhs);
  CHECK(x(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(x(1) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("solve_linear: residual bound on random well-conditioned systems") {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 20;
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = u(rng);
    a += 10.0 * Eigen::MatrixXd::Identity(n, n); // diagonally dominant
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) b(i) = u(rng);
    const Eigen::VectorXd x = solve_linear(a, b);
    const double resid = (a * x - b).cwiseAbs().maxCoeff();
    CHECK(resid <= 1e-9 * b.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("solve_linear: singular matrix reports the pivot column") {
  Eigen::MatrixXd a(2, 2);
  a << 1, 1, 1, 1;
  Eigen::VectorXd b(2);
  b << 1, 2;
  CHECK_THROWS_AS((void)solve_linear(a, b), SingularMatrixError);
  try {
    (void)solve_linear(a, b);
  } catch (const SingularMatrixError& e) {
    CHECK(e.index == 1);
  }
}

TEST_CASE("dc: resistive divider midpoint is exact") {
  const auto op = dc_operating_point(load("divider.cir"), {});
  CHECK(std::fabs(op.node_voltages.at("out") - 0.5) < 1e-9);
  CHECK(std::fabs(op.node_voltages.at("vdd") - 1.0) < 1e-12);
  // supply current: 1 V across 2k
  CHECK(op.source_currents.at("vin") == doctest::Approx(-0.5e-3).epsilon(1e-9));
}

TEST_CASE("dc: diode-connected mos matches the bisection oracle") {
  const auto op = dc_operating_point(load("diode_mos.cir"), {});
  // independent 1-D bisection on the circuit KCL
  const MosParams nmos = default_nmos();
  const double v_oracle = oracles::bisect(
      [&](double v) { return (1.2 - v) / 1e6 - mos_current(nmos, v, v, 0.0, 0.0); }, 0.0, 1.2);
  CHECK(std::fabs(op.node_voltages.at("nd") - v_oracle) < 1e-6);
  // frozen from the standalone high-precision evaluation
  CHECK(std::fabs(op.node_voltages.at("nd") - 0.45800541135001969) < 1e-6);
}

TEST_CASE("dc: KCL residual at the solution is tiny") {
  const auto op = dc_operating_point(load("diode_mos.cir"), {});
  const double v = op.node_voltages.at("nd");
  const double vin = op.node_voltages.at("vin");
  const MosParams nmos = default_nmos();
  const double kcl =
      (vin - v) / 1e6 - mos_current(nmos, v, v, 0.0, 0.0) - 1e-12 * v; // incl. gmin
  CHECK(std::fabs(kcl) < 10e-12);
}

TEST_CASE("dc: cross-coupled cell lands in the basin the seed selects") {
  const std::string cell = R"(bare latch
Vdd vdd 0 DC 1.2
M1 q qb 0 0 nmos W=2 L=1
M2 q qb vdd vdd pmos W=1 L=1
M3 qb q 0 0 nmos W=2 L=1
M4 qb q vdd vdd pmos W=1 L=1
.model nmos nmos vth0=0.4 kp=200u n=1.5 eta=0.05 lambda=0.05 vt=25.85m
.model pmos pmos vth0=0.4 kp=80u n=1.5 eta=0.05 lambda=0.05 vt=25.85m
.end
)";
  const Netlist n = from_text(cell);

  const std::map<std::string, double> seed_high{{"q", 1.2}, {"qb", 0.0}};
  const std::map<std::string, double> seed_low{{"q", 0.0}, {"qb", 1.2}};
  const auto hi = dc_operating_point(n, {}, &seed_high);
  const auto lo = dc_operating_point(n, {}, &seed_low);

  // independent two-unknown fixed-point iteration on the inverter pair
  const auto pt = oracles::latch_fixed_point(default_nmos(2.0), default_pmos(1.0), 1.2, true);
  CHECK(std::fabs(hi.node_voltages.at("q") - pt.q) < 1e-6);
  CHECK(std::fabs(hi.node_voltages.at("qb") - pt.qb) < 1e-6);

  CHECK(hi.node_voltages.at("q") > 1.2 - 1e-3);   // within 1 mV of the high rail
  CHECK(hi.node_voltages.at("qb") < 0.0 + 1e-3);  // within 1 mV of the low rail
  CHECK(lo.node_voltages.at("q") < 1e-3);
  CHECK(lo.node_voltages.at("qb") > 1.2 - 1e-3);
}

TEST_CASE("dc: conflicting ideal sources raise a named singular-matrix error") {
  const Netlist n = from_text("t\nV1 a 0 DC 1\nV2 a 0 DC 2\nR1 a 0 1k\n.end\n");
  CHECK_THROWS_AS((void)dc_operating_point(n, {}), SingularMatrixError);
  try {
    (void)dc_operating_point(n, {});
  } catch (const SingularMatrixError& e) {
    CHECK(!e.unknown.empty());
  }
}

TEST_CASE("dc: iteration cap produces a NonConvergence error with a trace") {
  SolverConfig cfg;
  cfg.max_newton_iters = 1; // convergence needs at least two passes
  cfg.gmin_steps = 0;
  const Netlist n = load("diode_mos.cir");
  CHECK_THROWS_AS((void)dc_operating_point(n, cfg), NonConvergenceError);
  try {
    (void)dc_operating_point(n, cfg);
  } catch (const NonConvergenceError& e) {
    CHECK(!e.residual_trace.empty());
  }
}

TEST_CASE("transient: RC benchmark against the closed form, trapezoidal order") {
  const Netlist n = load("rc.cir");
  const double rc = 1e-6, tramp = 1e-8;

  auto max_err = [&](double dt, Integrator integ) {
    SolverConfig cfg;
    cfg.dt = dt;
    cfg.tstop = 5e-6;
    cfg.integrator = integ;
    const Waveform w = transient(n, cfg);
    const int col = w.column("out");
    REQUIRE(col >= 0);
    double worst = 0.0;
    for (size_t k = 0; k < w.time.size(); ++k)
      worst = std::max(worst,
                       std::fabs(w.samples(k, col) - oracles::rc_ramp_response(w.time[k], rc, tramp)));
    return worst;
  };

  const double e_trap = max_err(rc / 100, Integrator::Trapezoidal);
  CHECK(e_trap < 0.005); // 0.5% of the 1 V step
  const double e_trap_half = max_err(rc / 200, Integrator::Trapezoidal);
  CHECK(e_trap / e_trap_half >= 3.5); // order-2 behavior

  const double e_be = max_err(rc / 100, Integrator::BackwardEuler);
  const double e_be_half = max_err(rc / 200, Integrator::BackwardEuler);
  CHECK(e_be / e_be_half >= 1.8); // order-1 behavior

  // spec point value: v(RC) close to the ideal-step 63.2% level
  SolverConfig cfg;
  cfg.dt = rc / 100;
  cfg.tstop = 5e-6;
  const Waveform w = transient(n, cfg);
  CHECK(std::fabs(w.value_near(rc, "out") - 0.632121) < 0.005);
}

TEST_CASE("transient: floating capacitor drifts less than a microvolt over a microsecond") {
  const Netlist n = from_text("t\nC1 a 0 1n\n.end\n"); // discharge path is gmin alone
  SolverConfig cfg;
  cfg.dt = 1e-8;
  cfg.tstop = 1e-6;
  const std::map<std::string, double> uic{{"a", 1.0}};
  const Waveform w = transient(n, cfg, nullptr, &uic);
  CHECK(w.value_near(0.0, "a") == 1.0);
  CHECK(std::fabs(w.value_near(1e-6, "a") - 1.0) < 1e-6);
}

TEST_CASE("transient: parallel-capacitor charge is conserved step to step") {
  const Netlist n = from_text("t\nC1 a 0 1n\nC2 a 0 2n\n.end\n");
  SolverConfig cfg;
  cfg.dt = 1e-8;
  cfg.tstop = 1e-7;
  const std::map<std::string, double> uic{{"a", 1.0}};
  const Waveform w = transient(n, cfg, nullptr, &uic);
  const int ca = w.column("a");
  double qprev = 3e-9 * w.samples(0, ca);
  for (size_t k = 1; k < w.time.size(); ++k) {
    const double q = 3e-9 * w.samples(k, ca);
    CHECK(std::fabs(q - qprev) < 1e-18);
    qprev = q;
  }
}

TEST_CASE("transient: inverter output crosses midrail after the input and settles to rails") {
  Netlist n = from_text(kInverter);
  SolverConfig cfg;
  cfg.dt = 1e-11;
  cfg.tstop = 8e-9;
  const Waveform w = transient(n, cfg);
  const int cin = w.column("in"), cout = w.column("out");

  CHECK(std::fabs(w.samples(0, cout) - 1.2) < 1e-3); // high rail before the pulse

  int in_cross = -1, out_cross = -1;
  for (size_t k = 0; k < w.time.size(); ++k) {
    if (in_cross < 0 && w.samples(k, cin) >= 0.6) in_cross = static_cast<int>(k);
    if (out_cross < 0 && w.samples(k, cout) <= 0.6) out_cross = static_cast<int>(k);
  }
  REQUIRE(in_cross >= 0);
  REQUIRE(out_cross >= 0);
  CHECK(out_cross > in_cross);
  CHECK(std::fabs(w.value_near(8e-9, "out") - 0.0) < 1e-3); // settled low
}

TEST_CASE("transient: identical runs are bit-identical") {
  const Netlist n = load("rc.cir");
  SolverConfig cfg;
  cfg.dt = 1e-8;
  cfg.tstop = 5e-6;
  const Waveform a = transient(n, cfg);
  const Waveform b = transient(n, cfg);
  REQUIRE(a.samples.size() == b.samples.size());
  CHECK(std::memcmp(a.samples.data(), b.samples.data(),
                    sizeof(double) * a.samples.size()) == 0);
}

TEST_CASE("transient: stimulus drives pull a node along a piecewise-linear path") {
  const Netlist n = from_text("t\nR1 x 0 1k\nR2 x y 1k\nC1 y 0 1p\n.end\n");
  StimulusSchedule s;
  s.events.push_back({0.0, "x", 0.0});
  s.events.push_back({5e-9, "x", 1.0});
  s.duration = 2e-8;
  SolverConfig cfg;
  cfg.dt = 1e-10;
  cfg.tstop = s.duration;
  const Waveform w = transient(n, cfg, &s);
  CHECK(w.value_near(0.0, "x") == doctest::Approx(0.0));
  CHECK(w.value_near(4e-9, "x") == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(w.value_near(1e-8, "x") == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(w.value_near(2e-8, "y") == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("waveform CSV round-trips") {
  const Netlist n = load("rc.cir");
  SolverConfig cfg;
  cfg.dt = 1e-7;
  cfg.tstop = 2e-6;
  const Waveform w = transient(n, cfg);
  const std::string csv = waveform_to_csv(w);
  CHECK(csv.rfind("time_s,in,out,i(vin)", 0) == 0);
  const Waveform back = waveform_from_csv(csv);
  REQUIRE(back.names == w.names);
  REQUIRE(back.time.size() == w.time.size());
  for (size_t k = 0; k < w.time.size(); ++k)
    CHECK(std::fabs(back.samples(k, 1) - w.samples(k, 1)) <=
          1e-8 * std::max(1.0, std::fabs(w.samples(k, 1))));
  CHECK(waveform_to_csv(w) == csv); // deterministic
}

TEST_CASE("svg rendering is deterministic and rejects unknown signals") {
  const Netlist n = load("rc.cir");
  SolverConfig cfg;
  cfg.dt = 1e-7;
  cfg.tstop = 2e-6;
  const Waveform w = transient(n, cfg);
  const std::string svg = render_waveform_svg(w, {"out"});
  CHECK(svg == render_waveform_svg(w, {"out"}));
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK_THROWS_WITH_AS((void)render_waveform_svg(w, {"nope"}),
                       doctest::Contains("unknown signal 'nope'"), std::invalid_argument);
}
