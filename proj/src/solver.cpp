#include "stacksim/solver.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

namespace stacksim {

namespace {

constexpr double kSenseAmpGout = 1e3;  // sense-amp output conductance [S]
constexpr double kSwitchWidth = 0.01;  // switch control transition width [V]
constexpr double kMaxNewtonStep = 1.0; // per-iteration voltage step cap [V]

double pulse_value(const PulseSpec& p, double t) {
  if (p.period > 0.0 && t > p.delay)
    t = p.delay + std::fmod(t - p.delay, p.period);
  if (t < p.delay) return p.v1;
  double tt = t - p.delay;
  if (tt < p.rise) return p.v1 + (p.v2 - p.v1) * tt / p.rise;
  tt -= p.rise;
  if (tt < p.width) return p.v2;
  tt -= p.width;
  if (tt < p.fall) return p.v2 + (p.v1 - p.v2) * tt / p.fall;
  return p.v1;
}

struct Pwl {
  std::vector<std::pair<double, double>> corners; // (t, v) sorted

  double at(double t) const {
    if (corners.empty()) return 0.0;
    if (t <= corners.front().first) return corners.front().second;
    if (t >= corners.back().first) return corners.back().second;
    for (size_t i = 1; i < corners.size(); ++i) {
      if (t <= corners[i].first) {
        const auto& [t0, v0] = corners[i - 1];
        const auto& [t1, v1] = corners[i];
        if (t1 <= t0) return v1;
        return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
      }
    }
    return corners.back().second;
  }
};

struct Compiled {
  std::vector<std::string> unknown_names;
  std::unordered_map<std::string, int> node_index; // ground not present
  int nn = 0; // node unknowns
  int nu = 0; // total unknowns

  struct MosDev { int d, g, s, b; MosParams p; };
  struct Lin { int p, n; double value; };
  struct Src { int p, n, branch; bool pulse; double dc; PulseSpec ps; std::string name; };
  struct Amp { int p, m, out; SenseAmpSpec sa; };
  struct Sw { int p, n, c; SwitchSpec sw; };
  struct Drv { int node, branch; Pwl pwl; };

  std::vector<MosDev> mos;
  std::vector<Lin> res;
  std::vector<Lin> caps;
  std::vector<Src> srcs;
  std::vector<Amp> amps;
  std::vector<Sw> sws;
  std::vector<Drv> drvs;
};

Compiled compile(const Netlist& nl, const StimulusSchedule* stim) {
  Compiled c;
  for (const auto& name : nl.node_order()) {
    c.node_index.emplace(name, c.nn++);
    c.unknown_names.push_back(name);
  }
  auto idx = [&](const std::string& name) -> int {
    if (name == "0") return -1;
    return c.node_index.at(name);
  };
  c.nu = c.nn;
  for (const auto& d : nl.devices) {
    switch (d.kind) {
      case DeviceKind::Mos: {
        MosParams p = nl.model_cards.at(d.model);
        p.w_over_l = d.w_over_l;
        c.mos.push_back({idx(d.nodes[0]), idx(d.nodes[1]), idx(d.nodes[2]), idx(d.nodes[3]), p});
        break;
      }
      case DeviceKind::Resistor:
        c.res.push_back({idx(d.nodes[0]), idx(d.nodes[1]), 1.0 / d.value});
        break;
      case DeviceKind::Capacitor:
        c.caps.push_back({idx(d.nodes[0]), idx(d.nodes[1]), d.value});
        break;
      case DeviceKind::DcSource:
      case DeviceKind::PulseSource: {
        int b = c.nu++;
        c.unknown_names.push_back("i(" + d.name + ")");
        c.srcs.push_back({idx(d.nodes[0]), idx(d.nodes[1]), b,
                          d.kind == DeviceKind::PulseSource, d.value, d.pulse, d.name});
        break;
      }
      case DeviceKind::SenseAmp:
        // plus, minus, out; the ref terminal is a bias marker with ideal
        // (infinite) input impedance, like the other two inputs
        c.amps.push_back({idx(d.nodes[0]), idx(d.nodes[1]), idx(d.nodes[2]), d.senseamp});
        break;
      case DeviceKind::Switch:
        c.sws.push_back({idx(d.nodes[0]), idx(d.nodes[1]), idx(d.nodes[2]), d.sw});
        break;
    }
  }
  if (stim) {
    // one PWL drive per signal, events folded in order
    std::vector<std::string> order;
    std::unordered_map<std::string, Pwl> pwls;
    std::unordered_map<std::string, double> level;
    for (const auto& ev : stim->events) {
      if (!pwls.count(ev.signal)) {
        order.push_back(ev.signal);
        pwls[ev.signal] = {};
        level[ev.signal] = 0.0;
      }
    }
    for (const auto& ev : stim->events) {
      Pwl& p = pwls[ev.signal];
      double& cur = level[ev.signal];
      if (ev.time <= 0.0) { // initial level, no edge
        p.corners.assign(1, {0.0, ev.level});
        cur = ev.level;
        continue;
      }
      if (ev.level == cur) continue;
      if (p.corners.empty()) p.corners.push_back({0.0, cur});
      double start = std::max(ev.time, p.corners.back().first);
      p.corners.push_back({start, cur});
      p.corners.push_back({start + stim->edge, ev.level});
      cur = ev.level;
    }
    for (const auto& name : order) {
      auto it = c.node_index.find(name);
      if (it == c.node_index.end())
        throw std::invalid_argument("stimulus signal '" + name + "' is not a netlist node");
      int b = c.nu++;
      c.unknown_names.push_back("i(stim:" + name + ")");
      c.drvs.push_back({it->second, b, std::move(pwls[name])});
    }
  }
  return c;
}

// companion-model context for one Newton solve
struct StepCtx {
  double time = 0.0;
  double gmin = 1e-12;
  double src_scale = 1.0;
  bool tran = false;
  double inv_h = 0.0;
  bool trapezoid = false;
  const Eigen::VectorXd* cap_v_prev = nullptr;
  const Eigen::VectorXd* cap_i_prev = nullptr;
};

struct Assembled {
  Eigen::MatrixXd jac;
  Eigen::VectorXd f;
  Eigen::VectorXd imax;  // largest branch-current magnitude per node row
  Eigen::VectorXd cap_i; // capacitor companion currents at this point
};

void assemble(const Compiled& c, const Eigen::VectorXd& x, const StepCtx& ctx, Assembled& out) {
  const int nu = c.nu;
  out.jac.setZero(nu, nu);
  out.f.setZero(nu);
  out.imax.setZero(nu);
  out.cap_i.setZero(static_cast<int>(c.caps.size()));

  auto v = [&](int i) -> double { return i < 0 ? 0.0 : x(i); };
  auto addf = [&](int i, double val) {
    if (i >= 0) out.f(i) += val;
  };
  auto addj = [&](int i, int j, double val) {
    if (i >= 0 && j >= 0) out.jac(i, j) += val;
  };
  auto track = [&](int i, double cur) {
    if (i >= 0) out.imax(i) = std::max(out.imax(i), std::fabs(cur));
  };

  for (int i = 0; i < c.nn; ++i) { // gmin loading
    out.f(i) += ctx.gmin * x(i);
    out.jac(i, i) += ctx.gmin;
  }

  for (const auto& r : c.res) {
    const double i = r.value * (v(r.p) - v(r.n));
    addf(r.p, i);
    addf(r.n, -i);
    addj(r.p, r.p, r.value);
    addj(r.p, r.n, -r.value);
    addj(r.n, r.n, r.value);
    addj(r.n, r.p, -r.value);
    track(r.p, i);
    track(r.n, i);
  }

  if (ctx.tran) {
    for (size_t k = 0; k < c.caps.size(); ++k) {
      const auto& cp = c.caps[k];
      const double vel = v(cp.p) - v(cp.n);
      const double geq = (ctx.trapezoid ? 2.0 : 1.0) * cp.value * ctx.inv_h;
      double i = geq * (vel - (*ctx.cap_v_prev)(static_cast<int>(k)));
      if (ctx.trapezoid) i -= (*ctx.cap_i_prev)(static_cast<int>(k));
      out.cap_i(static_cast<int>(k)) = i;
      addf(cp.p, i);
      addf(cp.n, -i);
      addj(cp.p, cp.p, geq);
      addj(cp.p, cp.n, -geq);
      addj(cp.n, cp.n, geq);
      addj(cp.n, cp.p, -geq);
      track(cp.p, i);
      track(cp.n, i);
    }
  }

  for (const auto& m : c.mos) {
    const MosEval e = mos_eval(m.p, v(m.g), v(m.d), v(m.s), v(m.b));
    const double g_mb = -(e.g_m + e.g_ds + e.g_ms);
    addf(m.d, e.i_d);
    addf(m.s, -e.i_d);
    addj(m.d, m.g, e.g_m);
    addj(m.d, m.d, e.g_ds);
    addj(m.d, m.s, e.g_ms);
    addj(m.d, m.b, g_mb);
    addj(m.s, m.g, -e.g_m);
    addj(m.s, m.d, -e.g_ds);
    addj(m.s, m.s, -e.g_ms);
    addj(m.s, m.b, -g_mb);
    track(m.d, e.i_d);
    track(m.s, e.i_d);
  }

  for (const auto& a : c.amps) {
    const double span = a.sa.vhi - a.sa.vlo;
    const double u = 4.0 * a.sa.gain * (v(a.p) - v(a.m)) / span;
    const double s = detail::logistic(u);
    const double target = a.sa.vlo + span * s;
    const double dtarget = 4.0 * a.sa.gain * s * (1.0 - s); // d(target)/d(diff)
    const double i = kSenseAmpGout * (v(a.out) - target);
    addf(a.out, i);
    addj(a.out, a.out, kSenseAmpGout);
    addj(a.out, a.p, -kSenseAmpGout * dtarget);
    addj(a.out, a.m, kSenseAmpGout * dtarget);
    track(a.out, i);
  }

  for (const auto& s : c.sws) {
    const double gon = 1.0 / s.sw.ron;
    const double goff = 1.0 / s.sw.roff;
    double u = (v(s.c) - s.sw.vt) / kSwitchWidth;
    if (s.sw.inverted) u = -u;
    const double sig = detail::logistic(u);
    const double g = goff + (gon - goff) * sig;
    double dg = (gon - goff) * sig * (1.0 - sig) / kSwitchWidth;
    if (s.sw.inverted) dg = -dg;
    const double vel = v(s.p) - v(s.n);
    const double i = g * vel;
    addf(s.p, i);
    addf(s.n, -i);
    addj(s.p, s.p, g);
    addj(s.p, s.n, -g);
    addj(s.n, s.n, g);
    addj(s.n, s.p, -g);
    addj(s.p, s.c, vel * dg);
    addj(s.n, s.c, -vel * dg);
    track(s.p, i);
    track(s.n, i);
  }

  auto stamp_branch = [&](int p, int n, int b, double target) {
    const double ib = x(b);
    addf(p, ib);
    addf(n, -ib);
    addj(p, b, 1.0);
    addj(n, b, -1.0);
    out.f(b) = v(p) - v(n) - target;
    addj(b, p, 1.0);
    addj(b, n, -1.0);
    track(p, ib);
    track(n, ib);
    out.imax(b) = std::fabs(target); // row tolerance scale for branch rows
  };

  for (const auto& s : c.srcs) {
    const double val = s.pulse ? pulse_value(s.ps, ctx.time) : s.dc;
    stamp_branch(s.p, s.n, s.branch, ctx.src_scale * val);
  }
  for (const auto& d : c.drvs)
    stamp_branch(d.node, -1, d.branch, ctx.src_scale * d.pwl.at(ctx.time));
}

struct NewtonOutcome {
  bool converged = false;
  std::vector<double> residual_trace;
};

NewtonOutcome newton_solve(const Compiled& c, const SolverConfig& cfg, const StepCtx& ctx,
                           Eigen::VectorXd& x, Eigen::VectorXd* cap_i_out = nullptr) {
  Assembled a;
  NewtonOutcome outcome;
  bool update_small = false;
  for (int iter = 0; iter < cfg.max_newton_iters; ++iter) {
    assemble(c, x, ctx, a);

    bool residual_ok = true;
    double worst = 0.0;
    for (int i = 0; i < c.nu; ++i) {
      const double tol = (i < c.nn ? cfg.abstol : cfg.vntol) + cfg.reltol * a.imax(i);
      worst = std::max(worst, std::fabs(a.f(i)));
      if (std::fabs(a.f(i)) > tol) residual_ok = false;
    }
    outcome.residual_trace.push_back(worst);
    if (residual_ok && update_small) {
      if (cap_i_out) *cap_i_out = a.cap_i;
      outcome.converged = true;
      return outcome;
    }

    // row equilibration keeps the pivot threshold meaningful across the
    // wildly mixed conductance scales of an MNA matrix
    Eigen::MatrixXd jac = a.jac;
    Eigen::VectorXd rhs = -a.f;
    for (int i = 0; i < c.nu; ++i) {
      const double m = jac.row(i).cwiseAbs().maxCoeff();
      if (m > 0.0) {
        jac.row(i) /= m;
        rhs(i) /= m;
      }
    }
    Eigen::VectorXd step;
    try {
      step = solve_linear(std::move(jac), std::move(rhs));
    } catch (SingularMatrixError& e) {
      throw SingularMatrixError("singular matrix at unknown '" + c.unknown_names[e.index] + "'",
                                e.index, c.unknown_names[e.index]);
    }

    double vstep = 0.0;
    for (int i = 0; i < c.nn; ++i) vstep = std::max(vstep, std::fabs(step(i)));
    if (vstep > kMaxNewtonStep) step *= kMaxNewtonStep / vstep;

    x += step;
    update_small = true;
    for (int i = 0; i < c.nu; ++i) {
      const double tol = (i < c.nn ? cfg.vntol : cfg.abstol) + cfg.reltol * std::fabs(x(i));
      if (std::fabs(step(i)) > tol) update_small = false;
    }
  }
  return outcome;
}

Eigen::VectorXd dc_solve(const Compiled& c, const SolverConfig& cfg, double time,
                         const Eigen::VectorXd& seed) {
  StepCtx ctx;
  ctx.time = time;
  ctx.gmin = cfg.gmin;

  Eigen::VectorXd x = seed;
  NewtonOutcome plain = newton_solve(c, cfg, ctx, x);
  if (plain.converged) return x;

  // gmin stepping: from 1e-3 S down to the configured gmin
  if (cfg.gmin_steps > 0) {
    Eigen::VectorXd xg = seed;
    const double hi = 1e-3;
    const double ratio = std::pow(cfg.gmin / hi, 1.0 / cfg.gmin_steps);
    bool ladder_ok = true;
    for (int k = 0; k <= cfg.gmin_steps; ++k) {
      StepCtx gctx = ctx;
      gctx.gmin = hi * std::pow(ratio, k);
      if (!newton_solve(c, cfg, gctx, xg).converged) {
        ladder_ok = false;
        break;
      }
    }
    if (ladder_ok) return xg;
  }

  // source stepping: ramp all sources 0 -> 100%
  Eigen::VectorXd xs = Eigen::VectorXd::Zero(c.nu);
  NewtonOutcome last;
  bool ramp_ok = true;
  for (int k = 1; k <= 10; ++k) {
    StepCtx sctx = ctx;
    sctx.src_scale = k / 10.0;
    last = newton_solve(c, cfg, sctx, xs);
    if (!last.converged) {
      ramp_ok = false;
      break;
    }
  }
  if (ramp_ok) return xs;

  throw NonConvergenceError("dc operating point did not converge", -1.0,
                            last.residual_trace.empty() ? plain.residual_trace
                                                        : last.residual_trace);
}

std::vector<char> breakpoint_steps(const Compiled& c, double dt, int n_steps) {
  std::vector<char> bp(n_steps, 0);
  if (n_steps > 0) bp[0] = 1;
  std::vector<double> corners;
  const double tstop = dt * n_steps;
  for (const auto& s : c.srcs) {
    if (!s.pulse) continue;
    const auto& p = s.ps;
    double base = p.delay;
    int guard = 0;
    while (base <= tstop && guard++ < 100000) {
      for (double t : {base, base + p.rise, base + p.rise + p.width,
                       base + p.rise + p.width + p.fall})
        corners.push_back(t);
      if (p.period <= 0.0) break;
      base += p.period;
    }
  }
  for (const auto& d : c.drvs)
    for (const auto& [t, v] : d.pwl.corners) corners.push_back(t);
  for (double t : corners) {
    const double k = t / dt;
    const long idx = std::lround(k);
    if (idx >= 0 && idx < n_steps && std::fabs(k - idx) < 1e-9) bp[idx] = 1;
  }
  return bp;
}

} // namespace

int Waveform::column(const std::string& name) const {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return -1;
}

int Waveform::row_near(double t) const {
  if (time.empty()) return -1;
  auto it = std::lower_bound(time.begin(), time.end(), t);
  if (it == time.end()) return static_cast<int>(time.size()) - 1;
  if (it == time.begin()) return 0;
  const auto prev = it - 1;
  return static_cast<int>((t - *prev <= *it - t) ? prev - time.begin() : it - time.begin());
}

double Waveform::value(int row, const std::string& name) const {
  const int col = column(name);
  if (col < 0) throw std::out_of_range("waveform has no signal '" + name + "'");
  return samples(row, col);
}

double Waveform::value_near(double t, const std::string& name) const {
  return value(row_near(t), name);
}

Eigen::VectorXd solve_linear(Eigen::MatrixXd a, Eigen::VectorXd b) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n || b.size() != n)
    throw std::invalid_argument("solve_linear: dimension mismatch");
  double row_max = 0.0;
  for (int i = 0; i < n; ++i) row_max = std::max(row_max, a.row(i).cwiseAbs().maxCoeff());
  const double pivot_floor = 1e-13 * row_max;

  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;

  for (int k = 0; k < n; ++k) {
    int pivot = k;
    double best = std::fabs(a(k, k));
    for (int i = k + 1; i < n; ++i) {
      const double cand = std::fabs(a(i, k));
      if (cand > best) {
        best = cand;
        pivot = i;
      }
    }
    if (!(best > pivot_floor))
      throw SingularMatrixError("singular matrix (pivot " + std::to_string(k) + ")", k);
    if (pivot != k) {
      a.row(pivot).swap(a.row(k));
      std::swap(b(pivot), b(k));
    }
    for (int i = k + 1; i < n; ++i) {
      const double m = a(i, k) / a(k, k);
      if (m == 0.0) continue;
      a(i, k) = 0.0;
      a.row(i).tail(n - k - 1) -= m * a.row(k).tail(n - k - 1);
      b(i) -= m * b(k);
    }
  }
  Eigen::VectorXd x(n);
  for (int i = n - 1; i >= 0; --i) {
    double acc = b(i);
    for (int j = i + 1; j < n; ++j) acc -= a(i, j) * x(j);
    x(i) = acc / a(i, i);
  }
  return x;
}

OperatingPoint dc_operating_point(const Netlist& n, const SolverConfig& cfg,
                                  const std::map<std::string, double>* initial) {
  Compiled c = compile(n, nullptr);
  Eigen::VectorXd seed = Eigen::VectorXd::Zero(c.nu);
  if (initial)
    for (const auto& [name, volt] : *initial) {
      auto it = c.node_index.find(name);
      if (it != c.node_index.end()) seed(it->second) = volt;
    }
  Eigen::VectorXd x = dc_solve(c, cfg, 0.0, seed);

  OperatingPoint op;
  for (const auto& [name, idx] : c.node_index) op.node_voltages[name] = x(idx);
  for (const auto& s : c.srcs) op.source_currents[s.name] = x(s.branch);
  return op;
}

Waveform transient(const Netlist& n, const SolverConfig& cfg, const StimulusSchedule* stimulus,
                   const std::map<std::string, double>* initial) {
  if (!(cfg.dt > 0.0) || !(cfg.tstop >= cfg.dt))
    throw std::invalid_argument("transient: need 0 < dt <= tstop");
  Compiled c = compile(n, stimulus);

  const long n_steps = std::lround(cfg.tstop / cfg.dt);
  if (std::fabs(n_steps * cfg.dt - cfg.tstop) > 1e-9 * cfg.tstop)
    throw std::invalid_argument("transient: dt must divide tstop");

  Eigen::VectorXd x = Eigen::VectorXd::Zero(c.nu);
  if (initial) {
    // UIC-style: take the given node voltages as the t=0 state
    for (const auto& [name, volt] : *initial) {
      auto it = c.node_index.find(name);
      if (it != c.node_index.end()) x(it->second) = volt;
    }
  } else {
    x = dc_solve(c, cfg, 0.0, x);
  }

  Waveform w;
  w.names = c.unknown_names;
  w.names.resize(c.nn); // node voltages...
  for (const auto& s : c.srcs) w.names.push_back("i(" + s.name + ")");
  w.time.resize(n_steps + 1);
  w.samples.resize(n_steps + 1, static_cast<int>(w.names.size()));

  auto record = [&](long row, double t) {
    w.time[row] = t;
    for (int i = 0; i < c.nn; ++i) w.samples(row, i) = x(i);
    for (size_t s = 0; s < c.srcs.size(); ++s)
      w.samples(row, c.nn + static_cast<int>(s)) = x(c.srcs[s].branch);
  };
  record(0, 0.0);

  Eigen::VectorXd cap_v(static_cast<int>(c.caps.size()));
  Eigen::VectorXd cap_i = Eigen::VectorXd::Zero(static_cast<int>(c.caps.size()));
  auto elem_v = [&](const Compiled::Lin& cp) {
    const double vp = cp.p < 0 ? 0.0 : x(cp.p);
    const double vn = cp.n < 0 ? 0.0 : x(cp.n);
    return vp - vn;
  };
  for (size_t k = 0; k < c.caps.size(); ++k) cap_v(static_cast<int>(k)) = elem_v(c.caps[k]);

  const std::vector<char> bp = breakpoint_steps(c, cfg.dt, static_cast<int>(n_steps));

  for (long k = 0; k < n_steps; ++k) {
    const double t1 = (k + 1) * cfg.dt;
    StepCtx ctx;
    ctx.time = t1;
    ctx.gmin = cfg.gmin;
    ctx.tran = true;
    ctx.inv_h = 1.0 / cfg.dt;
    ctx.trapezoid = cfg.integrator == Integrator::Trapezoidal && !bp[k];
    ctx.cap_v_prev = &cap_v;
    ctx.cap_i_prev = &cap_i;

    Eigen::VectorXd cap_i_now;
    NewtonOutcome res = newton_solve(c, cfg, ctx, x, &cap_i_now);
    if (!res.converged)
      throw NonConvergenceError("transient did not converge at t=" + format_double(t1), t1,
                                res.residual_trace);
    cap_i = cap_i_now;
    for (size_t q = 0; q < c.caps.size(); ++q) cap_v(static_cast<int>(q)) = elem_v(c.caps[q]);
    record(k + 1, t1);
  }
  return w;
}

} // namespace stacksim
