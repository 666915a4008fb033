#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "stacksim/device_models.hpp"

using namespace stacksim;

namespace {

double rel_err(double a, double b, double floor = 1e-25) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), floor});
}

} // namespace

TEST_CASE("zero drain-source voltage gives exactly zero current") {
  const MosParams n = default_nmos();
  const MosParams p = default_pmos();
  for (double vg : {-1.0, 0.0, 0.4, 1.2, 3.0})
    for (double v : {-0.7, 0.0, 0.9, 2.4}) {
      CHECK(mos_current(n, vg, v, v, 0.0) == 0.0);
      CHECK(mos_current(p, vg, v, v, 0.0) == 0.0);
    }
}

TEST_CASE("pinned subthreshold leakage of the default n-channel card") {
  // vg=vs=vb=0, vd=1.2; reference from a standalone high-precision
  // evaluation of the model's closed form
  const double i = mos_current(default_nmos(), 0.0, 1.2, 0.0, 0.0);
  CHECK(rel_err(i, 6.5292400915319002e-11) < 1e-13);
}

TEST_CASE("drain-source swap negates the current exactly") {
  const MosParams n = default_nmos();
  const MosParams p = default_pmos(0.7);
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> bias(-1.5, 3.0);
  for (int k = 0; k < 200; ++k) {
    const double vg = bias(rng), vd = bias(rng), vs = bias(rng), vb = bias(rng);
    const double fwd = mos_current(n, vg, vd, vs, vb);
    const double rev = mos_current(n, vg, vs, vd, vb);
    CHECK(rel_err(fwd, -rev, 1e-300) < 1e-12);
    CHECK(rel_err(mos_current(p, vg, vd, vs, vb), -mos_current(p, vg, vs, vd, vb), 1e-300) <
          1e-12);
  }
}

TEST_CASE("current is strictly increasing in gate voltage at fixed vd > vs") {
  const MosParams n = default_nmos();
  double prev = -1.0;
  for (int k = 0; k <= 60; ++k) {
    const double vg = -0.5 + 2.0 * k / 60.0;
    const double i = mos_current(n, vg, 1.2, 0.0, 0.0);
    if (k) CHECK(i > prev);
    prev = i;
  }
}

TEST_CASE("analytic conductances match central finite differences") {
  const MosParams cards[] = {default_nmos(), default_nmos(2.0), default_pmos(1.5)};
  std::mt19937 rng(987654);
  std::uniform_real_distribution<double> bias(-1.5, 3.0);
  int checked = 0;
  for (const auto& card : cards) {
    for (int k = 0; k < 120; ++k) {
      const double vg = bias(rng), vd = bias(rng), vs = bias(rng), vb = bias(rng);
      if (std::fabs(vd - vs) < 1e-4) continue; // keep the probe off the |vds| kink
      const auto a = mos_conductances(card, vg, vd, vs, vb);
      const auto f = oracles::fd_conductances(card, vg, vd, vs, vb);
      CHECK(rel_err(a.g_m, f.g_m) < 1e-4);
      CHECK(rel_err(a.g_ds, f.g_ds) < 1e-4);
      CHECK(rel_err(a.g_ms, f.g_ms) < 1e-4);
      ++checked;
    }
  }
  CHECK(checked >= 100);
}

TEST_CASE("g_ds is positive at vd = vs while the current is zero") {
  const auto g = mos_conductances(default_nmos(), 0.8, 0.3, 0.3, 0.0);
  CHECK(g.g_ds > 0.0);
  CHECK(mos_current(default_nmos(), 0.8, 0.3, 0.3, 0.0) == 0.0);
}

TEST_CASE("deep subthreshold log-slope equals 1/(n_slope*temp_vt)") {
  const MosParams n = default_nmos();
  const double expected = 1.0 / (n.n_slope * n.temp_vt); // 25.789813...
  // least-squares slope of ln(i_d) over a 100 mV sweep well below threshold
  const int pts = 21;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int k = 0; k < pts; ++k) {
    const double vg = -0.1 + 0.1 * k / (pts - 1);
    const double y = std::log(mos_current(n, vg, 1.2, 0.0, 0.0));
    sx += vg;
    sy += y;
    sxx += vg * vg;
    sxy += vg * y;
  }
  const double slope = (pts * sxy - sx * sy) / (pts * sxx - sx * sx);
  CHECK(std::fabs(slope - expected) / expected < 0.02);
}

TEST_CASE("stack of one device equals the bare off-current") {
  const MosParams n = default_nmos();
  const auto r = stack_leakage(n, 1, 1.2);
  CHECK(r.mid_nodes.empty());
  CHECK(r.leakage == mos_current(n, 0.0, 1.2, 0.0, 0.0));
}

TEST_CASE("two-device stack matches the bisection oracle and the frozen values") {
  const MosParams n = default_nmos();
  const auto r = stack_leakage(n, 2, 1.2);
  REQUIRE(r.mid_nodes.size() == 1);

  const double mid_oracle = oracles::stack_mid_bisect(n, 1.2);
  const double leak_oracle = mos_current(n, 0.0, mid_oracle, 0.0, 0.0);
  CHECK(rel_err(r.mid_nodes[0], mid_oracle) < 1e-9);
  CHECK(rel_err(r.leakage, leak_oracle) < 1e-9);

  // frozen from the standalone high-precision bisection
  CHECK(rel_err(r.mid_nodes[0], 0.043770329566273388) < 1e-8);
  CHECK(rel_err(r.leakage, 1.1408326840561591e-11) < 1e-10);
  CHECK(rel_err(r.leakage / stack_leakage(n, 1, 1.2).leakage, 0.17472671674851754) < 1e-10);

  // KCL mismatch between the two devices at the reported solution
  const double top = mos_current(n, 0.0, 1.2, r.mid_nodes[0], 0.0);
  const double bot = mos_current(n, 0.0, r.mid_nodes[0], 0.0, 0.0);
  CHECK(std::fabs(top - bot) < 1e-15);
}

TEST_CASE("stack leakage is monotonically non-increasing in depth") {
  const MosParams n = default_nmos();
  double prev = 1e9;
  for (int depth = 1; depth <= 4; ++depth) {
    const auto r = stack_leakage(n, depth, 1.2);
    CHECK(r.leakage <= prev);
    CHECK(r.leakage > 0.0);
    // independent nested-bisection oracle
    const double oracle = oracles::stack_current_bisect(n, depth, 0.0, 1.2);
    CHECK(rel_err(r.leakage, oracle, 1e-20) < 1e-6);
    prev = r.leakage;
  }
}

TEST_CASE("stacking halves-or-better across supply voltages") {
  const MosParams n = default_nmos();
  for (double v : {0.6, 1.2, 2.4})
    CHECK(stack_leakage(n, 2, v).leakage < stack_leakage(n, 1, v).leakage);
  const MosParams p = default_pmos();
  for (double v : {0.6, 1.2, 2.4})
    CHECK(stack_leakage(p, 2, v).leakage < stack_leakage(p, 1, v).leakage);
}

TEST_CASE("stack interior nodes sit strictly inside the span") {
  const auto r = stack_leakage(default_nmos(), 4, 1.2);
  REQUIRE(r.mid_nodes.size() == 3);
  double prev = 0.0;
  for (double v : r.mid_nodes) {
    CHECK(v > prev);
    CHECK(v < 1.2);
    prev = v;
  }
}

TEST_CASE("parameter-card invariants are enforced") {
  MosParams p = default_nmos();
  std::string why;
  CHECK(mos_params_valid(p, &why));
  p.kp = 0.0;
  CHECK_FALSE(mos_params_valid(p, &why));
  p = default_nmos();
  p.n_slope = 0.9;
  CHECK_FALSE(mos_params_valid(p));
  p = default_nmos();
  p.temp_vt = -1.0;
  CHECK_FALSE(mos_params_valid(p));
  p = default_nmos();
  p.vth0 = 0.0;
  CHECK_FALSE(mos_params_valid(p));
}
