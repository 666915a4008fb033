// Test-side oracles, independent of the library's solution paths: central
// finite differences, bisection stack solves, a two-unknown latch fixed
// point, and the closed-form RC response.
#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

#include "stacksim/device_models.hpp"

namespace oracles {

inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     int iters = 200) {
  double flo = f(lo);
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// off-current of an n-device stack by nested bisection on the KCL residual,
// gates and bulks at the stack bottom
inline double stack_current_bisect(const stacksim::MosParams& p, int n, double v_lo,
                                   double v_hi) {
  if (n == 1) return stacksim::mos_current(p, 0.0, v_hi, v_lo, 0.0);
  auto residual = [&](double vx) {
    return stacksim::mos_current(p, 0.0, vx, v_lo, 0.0) - stack_current_bisect(p, n - 1, vx, v_hi);
  };
  const double vx = bisect(residual, v_lo + 1e-12, v_hi, n > 2 ? 60 : 200);
  return stacksim::mos_current(p, 0.0, vx, v_lo, 0.0);
}

inline double stack_mid_bisect(const stacksim::MosParams& p, double v_total) {
  auto residual = [&](double vx) {
    return stacksim::mos_current(p, 0.0, vx, 0.0, 0.0) -
           stacksim::mos_current(p, 0.0, v_total, vx, 0.0);
  };
  return bisect(residual, 1e-12, v_total);
}

// central finite differences of mos_current
struct FdConductances {
  double g_m, g_ds, g_ms;
};

inline FdConductances fd_conductances(const stacksim::MosParams& p, double vg, double vd,
                                      double vs, double vb, double h = 1e-6) {
  auto i = [&](double g, double d, double s) { return stacksim::mos_current(p, g, d, s, vb); };
  FdConductances f;
  f.g_m = (i(vg + h, vd, vs) - i(vg - h, vd, vs)) / (2 * h);
  f.g_ds = (i(vg, vd + h, vs) - i(vg, vd - h, vs)) / (2 * h);
  f.g_ms = (i(vg, vd, vs + h) - i(vg, vd, vs - h)) / (2 * h);
  return f;
}

// static CMOS inverter output by bisection on the output-node KCL
inline double inverter_out(const stacksim::MosParams& pd, const stacksim::MosParams& pu,
                           double vin, double vdd) {
  auto kcl = [&](double vout) {
    return stacksim::mos_current(pd, vin, vout, 0.0, 0.0) +
           stacksim::mos_current(pu, vin, vout, vdd, vdd);
  };
  return bisect(kcl, 0.0, vdd);
}

// stable latch solution by alternating fixed-point iteration from a biased start
struct LatchPoint {
  double q, qb;
};

inline LatchPoint latch_fixed_point(const stacksim::MosParams& pd, const stacksim::MosParams& pu,
                                    double vdd, bool q_high) {
  double q = q_high ? vdd : 0.0;
  double qb = q_high ? 0.0 : vdd;
  for (int i = 0; i < 200; ++i) {
    const double q2 = inverter_out(pd, pu, qb, vdd);
    const double qb2 = inverter_out(pd, pu, q2, vdd);
    if (std::fabs(q2 - q) < 1e-12 && std::fabs(qb2 - qb) < 1e-12) {
      q = q2;
      qb = qb2;
      break;
    }
    q = q2;
    qb = qb2;
  }
  return {q, qb};
}

// exact response of an RC low-pass to a ramp(0 -> vstep over t_ramp) input
inline double rc_ramp_response(double t, double rc, double t_ramp, double vstep = 1.0) {
  if (t <= 0.0) return 0.0;
  if (t <= t_ramp)
    return vstep * (t / t_ramp - (rc / t_ramp) * (1.0 - std::exp(-t / rc)));
  return vstep * (1.0 - (rc / t_ramp) * (1.0 - std::exp(-t_ramp / rc)) *
                            std::exp(-(t - t_ramp) / rc));
}

} // namespace oracles
