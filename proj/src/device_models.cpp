#include "stacksim/device_models.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace stacksim {

namespace detail {

constexpr double kExpClamp = 60.0; // exp() argument clamp

// ln(1 + e^x), evaluated so exp never sees an argument outside [-60, 0].
double softplus(double x) {
  if (x > 0.0)
    return x + std::log1p(std::exp(std::max(-x, -kExpClamp)));
  return std::log1p(std::exp(std::max(x, -kExpClamp)));
}

// 1 / (1 + e^-x), same clamping scheme.
double logistic(double x) {
  if (x >= 0.0)
    return 1.0 / (1.0 + std::exp(std::max(-x, -kExpClamp)));
  const double e = std::exp(std::max(x, -kExpClamp));
  return e / (1.0 + e);
}

} // namespace detail

namespace {

using detail::logistic;
using detail::softplus;

double sign_of(double x) { return (x > 0.0) ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// n-channel evaluation; callers handle polarity.
MosEval eval_n(const MosParams& p, double v_g, double v_d, double v_s, double v_b) {
  const double vgb = v_g - v_b;
  const double vdb = v_d - v_b;
  const double vsb = v_s - v_b;
  const double vds = vdb - vsb;
  const double avds = std::fabs(vds);
  const double sg = sign_of(vds);

  // |vds| in the DIBL term keeps the model antisymmetric under d<->s swap;
  // the kink at vds=0 multiplies factors that vanish there, so i_d stays C1.
  const double vp = (vgb - p.vth0 + p.eta_dibl * avds) / p.n_slope;

  const double two_vt = 2.0 * p.temp_vt;
  const double uf = (vp - vsb) / two_vt;
  const double ur = (vp - vdb) / two_vt;

  const double lf = softplus(uf);
  const double lr = softplus(ur);
  const double i_f = lf * lf;
  const double i_r = lr * lr;

  const double flow = i_f - i_r;
  const double mod = 1.0 + p.lambda_clm * avds;
  const double scale = 2.0 * p.n_slope * p.kp * p.w_over_l * p.temp_vt * p.temp_vt;

  MosEval out;
  out.i_d = scale * flow * mod;

  // dI/du for the two charge terms
  const double pf = 2.0 * lf * logistic(uf);
  const double pr = 2.0 * lr * logistic(ur);

  const double es = p.eta_dibl * sg / p.n_slope;
  const double duf_dvg = 1.0 / (p.n_slope * two_vt);
  const double dur_dvg = duf_dvg;
  const double duf_dvd = es / two_vt;
  const double dur_dvd = (es - 1.0) / two_vt;
  const double duf_dvs = (-es - 1.0) / two_vt;
  const double dur_dvs = -es / two_vt;

  const double dflow_dvg = pf * duf_dvg - pr * dur_dvg;
  const double dflow_dvd = pf * duf_dvd - pr * dur_dvd;
  const double dflow_dvs = pf * duf_dvs - pr * dur_dvs;

  out.g_m = scale * mod * dflow_dvg;
  out.g_ds = scale * (mod * dflow_dvd + flow * p.lambda_clm * sg);
  out.g_ms = scale * (mod * dflow_dvs - flow * p.lambda_clm * sg);
  return out;
}

} // namespace

MosParams default_nmos(double w_over_l) {
  MosParams p;
  p.w_over_l = w_over_l;
  return p;
}

MosParams default_pmos(double w_over_l) {
  MosParams p;
  p.polarity = Polarity::PChannel;
  p.kp = 80e-6;
  p.w_over_l = w_over_l;
  return p;
}

bool mos_params_valid(const MosParams& p, std::string* why) {
  auto fail = [&](const char* msg) {
    if (why) *why = msg;
    return false;
  };
  if (!(p.kp > 0.0)) return fail("kp must be > 0");
  if (!(p.w_over_l > 0.0)) return fail("w_over_l must be > 0");
  if (!(p.n_slope >= 1.0)) return fail("n_slope must be >= 1");
  if (!(p.eta_dibl >= 0.0)) return fail("eta_dibl must be >= 0");
  if (!(p.lambda_clm >= 0.0)) return fail("lambda_clm must be >= 0");
  if (!(p.temp_vt > 0.0)) return fail("temp_vt must be > 0");
  if (!(p.vth0 > 0.0)) return fail("vth0 must be > 0 (magnitude card)");
  if (!std::isfinite(p.vth0) || !std::isfinite(p.kp) || !std::isfinite(p.n_slope) ||
      !std::isfinite(p.eta_dibl) || !std::isfinite(p.lambda_clm) ||
      !std::isfinite(p.w_over_l) || !std::isfinite(p.temp_vt))
    return fail("parameters must be finite");
  return true;
}

MosEval mos_eval(const MosParams& p, double v_g, double v_d, double v_s, double v_b) {
  if (p.polarity == Polarity::PChannel) {
    MosEval e = eval_n(p, -v_g, -v_d, -v_s, -v_b);
    // i_p(v) = -i_n(-v): current negates, partials keep their sign
    e.i_d = -e.i_d;
    return e;
  }
  return eval_n(p, v_g, v_d, v_s, v_b);
}

double mos_current(const MosParams& p, double v_g, double v_d, double v_s, double v_b) {
  return mos_eval(p, v_g, v_d, v_s, v_b).i_d;
}

MosConductances mos_conductances(const MosParams& p, double v_g, double v_d, double v_s,
                                 double v_b) {
  const MosEval e = mos_eval(p, v_g, v_d, v_s, v_b);
  return {e.g_m, e.g_ds, e.g_ms};
}

StackResult stack_leakage(const MosParams& p, int n_series, double v_total) {
  if (n_series < 1) throw std::invalid_argument("stack_leakage: n_series must be >= 1");

  if (n_series == 1)
    return {mos_current(p, 0.0, v_total, 0.0, 0.0), {}};

  const int m = n_series - 1; // interior unknowns
  Eigen::VectorXd v(m);
  for (int k = 0; k < m; ++k)
    v(k) = v_total * 0.05 * (k + 1) / n_series; // off stacks settle low

  auto node_v = [&](int k) -> double { // stack node k, 0..n_series
    if (k <= 0) return 0.0;
    if (k > m) return v_total;
    return v(k - 1);
  };

  const int max_iters = 200;
  for (int iter = 0; iter < max_iters; ++iter) {
    // device k sits between node k (source) and node k+1 (drain), gate/bulk at 0
    std::vector<MosEval> dev(n_series);
    for (int k = 0; k < n_series; ++k)
      dev[k] = mos_eval(p, 0.0, node_v(k + 1), node_v(k), 0.0);

    Eigen::VectorXd f(m);
    double worst = 0.0;
    for (int k = 0; k < m; ++k) {
      f(k) = dev[k].i_d - dev[k + 1].i_d; // KCL at interior node k+1
      worst = std::max(worst, std::fabs(f(k)));
    }
    if (worst < 1e-16) return {dev[0].i_d, {v.data(), v.data() + m}};

    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(m, m);
    for (int k = 0; k < m; ++k) {
      jac(k, k) = dev[k].g_ds - dev[k + 1].g_ms; // node k+1 is drain of k, source of k+1
      if (k > 0) jac(k, k - 1) = dev[k].g_ms;
      if (k + 1 < m) jac(k, k + 1) = -dev[k + 1].g_ds;
    }

    Eigen::VectorXd step = jac.partialPivLu().solve(-f);
    const double biggest = step.cwiseAbs().maxCoeff();
    if (biggest > 0.1) step *= 0.1 / biggest; // keep Newton inside the basin
    v += step;
  }
  throw std::runtime_error("stack_leakage: Newton did not converge");
}

} // namespace stacksim
