#pragma once

// Time integration of dv/dt = v^p (v_xx + v) to blow-up and of the rescaled
// equation du/dtau = u^p (u_xx + u - u^{1-p}). Explicit RK4 with the
// parabolic step dt = cfl * dx^2 / max(v^p); positivity is enforced by step
// rejection and halving, never by clipping.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "curveflow/core.hpp"
#include "curveflow/grid.hpp"

namespace curveflow {

enum class StopReason { cap_reached, dt_underflow, horizon };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::cap_reached: return "cap_reached";
    case StopReason::dt_underflow: return "dt_underflow";
    case StopReason::horizon: return "horizon";
  }
  return "unknown";
}

struct StepScalars {
  double t = 0.0;
  double dt = 0.0;
  double v_max = 0.0;
  double v_min = 0.0;
  double max_vx = 0.0;
  double closure_mod = 0.0;
  int zero_count = 0;
};

struct Snapshot {
  double t = 0.0;
  PeriodicProfile profile;
};

struct FlowTrajectory {
  FlowParams params;
  std::vector<StepScalars> steps;   // first record is the initial state
  std::vector<Snapshot> snapshots;  // t = 0, geometric v_max levels (x2), final state
  double t_end = 0.0;
  double t_max_estimate = std::numeric_limits<double>::quiet_NaN();
  StopReason stop_reason = StopReason::horizon;
};

struct RescaledScalars {
  double tau = 0.0;
  double dt = 0.0;
  double u_max = 0.0;
  double u_min = 0.0;
  double max_ux_over_u = 0.0;
};

struct RescaledTrajectory {
  FlowParams params;
  double t_max_used = 0.0;
  std::vector<RescaledScalars> steps;
  std::vector<Snapshot> snapshots;  // Snapshot::t holds tau
  double tau_end = 0.0;
  bool degenerate = false;  // u touched zero (expected in type-two runs)
  bool exploded = false;    // u_max left the bounded regime (t_max too large)
};

// Sign changes of v_x around the grid. Samples with |v_x| below
// rel_floor * v_max carry no sign; this keeps machine noise on flat data
// (constant profiles) from registering as oscillation.
inline int gradient_zero_count(const std::vector<double>& vx, double v_max,
                               double rel_floor = 1e-10) {
  const double floor = rel_floor * v_max;
  int last = 0, count = 0;
  // find the first definite sign
  std::size_t start = 0;
  for (; start < vx.size(); ++start) {
    if (std::fabs(vx[start]) > floor) {
      last = vx[start] > 0.0 ? 1 : -1;
      break;
    }
  }
  if (start == vx.size()) return 0;
  for (std::size_t k = 1; k <= vx.size(); ++k) {
    const double w = vx[(start + k) % vx.size()];
    if (std::fabs(w) <= floor) continue;
    const int s = w > 0.0 ? 1 : -1;
    if (s != last) ++count;
    last = s;
  }
  return count;
}

// Pointwise v^p (D^2 v + v). Public allocating form; the evolver uses the
// buffered variant below.
inline std::vector<double> flow_rhs(const PeriodicProfile& v, double p, int order = 4) {
  const PowP pw(p);
  std::vector<double> out;
  diff2_into(v.values, v.dx(), order, out);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = pw(v.values[i]) * (out[i] + v.values[i]);
  return out;
}

namespace detail {

struct FlowOde {
  double p;
  PowP pw_p;
  PowP pw_1mp;
  bool rescaled;  // include the -u^{1-p} sink of the rescaled equation
  double dx;
  int order;
  mutable std::vector<double> d2;

  FlowOde(double p_, double dx_, int order_, bool rescaled_)
      : p(p_), pw_p(p_), pw_1mp(1.0 - p_), rescaled(rescaled_), dx(dx_), order(order_) {}

  void rhs(const std::vector<double>& v, std::vector<double>& out) const {
    diff2_into(v, dx, order, d2);
    out.resize(v.size());
    if (rescaled) {
      for (std::size_t i = 0; i < v.size(); ++i)
        out[i] = pw_p(v[i]) * (d2[i] + v[i] - pw_1mp(v[i]));
    } else {
      for (std::size_t i = 0; i < v.size(); ++i) out[i] = pw_p(v[i]) * (d2[i] + v[i]);
    }
  }

  double max_pow_p(const std::vector<double>& v) const {
    // max of v^p is attained at v_max for p > 0 and at v_min for p < 0
    double lo = v[0], hi = v[0];
    for (double x : v) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    return std::max(pw_p(lo), pw_p(hi));
  }
};

inline bool all_positive(const std::vector<double>& v) {
  for (double x : v)
    if (!(x > 0.0) || !std::isfinite(x)) return false;
  return true;
}

// One RK4 step with stage-wise positivity checks. Returns false if any
// stage or the result leaves the positive cone.
inline bool try_rk4_step(const FlowOde& ode, const std::vector<double>& v, double dt,
                         std::vector<double>& k1, std::vector<double>& k2,
                         std::vector<double>& k3, std::vector<double>& k4,
                         std::vector<double>& stage, std::vector<double>& out) {
  const std::size_t n = v.size();
  ode.rhs(v, k1);
  stage.resize(n);
  for (std::size_t i = 0; i < n; ++i) stage[i] = v[i] + 0.5 * dt * k1[i];
  if (!all_positive(stage)) return false;
  ode.rhs(stage, k2);
  for (std::size_t i = 0; i < n; ++i) stage[i] = v[i] + 0.5 * dt * k2[i];
  if (!all_positive(stage)) return false;
  ode.rhs(stage, k3);
  for (std::size_t i = 0; i < n; ++i) stage[i] = v[i] + dt * k3[i];
  if (!all_positive(stage)) return false;
  ode.rhs(stage, k4);
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = v[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return all_positive(out);
}

}  // namespace detail

class dt_underflow_error : public std::runtime_error {
 public:
  explicit dt_underflow_error(const std::string& what) : std::runtime_error(what) {}
};

// Single RK4 step of the flow with a forced step size (test hook).
inline PeriodicProfile rk4_flow_step(const PeriodicProfile& v, double p, double dt,
                                     int order = 4) {
  if (dt == 0.0) return v;
  detail::FlowOde ode(p, v.dx(), order, false);
  std::vector<double> k1, k2, k3, k4, stage, out;
  if (!detail::try_rk4_step(ode, v.values, dt, k1, k2, k3, k4, stage, out))
    throw std::domain_error("rk4_flow_step: step left the positive cone");
  return PeriodicProfile(v.m, std::move(out));
}

// One CFL-limited step; halves dt on positivity failure (at most 40 times).
inline std::pair<PeriodicProfile, double> step_flow(const PeriodicProfile& v, double p,
                                                    double cfl, int order = 4) {
  detail::FlowOde ode(p, v.dx(), order, false);
  double dt = cfl * v.dx() * v.dx() / ode.max_pow_p(v.values);
  std::vector<double> k1, k2, k3, k4, stage, out;
  for (int halving = 0; halving <= 40; ++halving) {
    if (detail::try_rk4_step(ode, v.values, dt, k1, k2, k3, k4, stage, out))
      return {PeriodicProfile(v.m, std::move(out)), dt};
    dt *= 0.5;
  }
  throw dt_underflow_error("step_flow: dt underflow, singularity beyond resolution");
}

// Least-squares t-intercept of v_max^{-p} against t over the final decade of
// v_max. Exact for separable solutions, where v_max^{-p} is linear in t.
// The returned estimate never falls below t_end + v_max(t_end)^{-p}/p, the
// bound forced by the comparison principle.
inline double estimate_tmax(const FlowTrajectory& traj) {
  const double p = traj.params.p;
  if (!(p > 0.0)) throw std::invalid_argument("estimate_tmax: requires p > 0");
  if (traj.steps.empty()) throw std::invalid_argument("estimate_tmax: empty trajectory");
  const double v_end = traj.steps.back().v_max;
  const double t_end = traj.steps.back().t;
  const PowP pw(-p);

  // dt-weighted so the fit integrates uniformly in time; per-step samples
  // cluster at the end and would otherwise dominate. Extended precision:
  // the sums span a large dynamic range near blow-up.
  long double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  long count = 0;
  auto accumulate = [&](bool weighted) {
    sw = sx = sy = sxx = sxy = 0;
    count = 0;
    for (const auto& s : traj.steps) {
      if (s.v_max < v_end / 10.0) continue;
      const long double w = weighted ? (s.dt > 0.0 ? s.dt : 0.0) : 1.0;
      if (w == 0.0) continue;
      const long double x = s.t - t_end;  // centered for conditioning
      const long double y = pw(s.v_max);
      sw += w;
      sx += w * x;
      sy += w * y;
      sxx += w * x * x;
      sxy += w * x * y;
      ++count;
    }
  };
  accumulate(true);
  if (count < 10) accumulate(false);  // series without step sizes
  if (count < 10) throw std::runtime_error("estimate_tmax: fewer than 10 samples in the final decade");
  const long double det = sw * sxx - sx * sx;
  const long double slope = (sw * sxy - sx * sy) / det;
  const long double icpt = (sy - slope * sx) / sw;
  const double floor = t_end + pw(v_end) / p;
  if (!(slope < 0.0)) return floor;
  const double fit = static_cast<double>(t_end - icpt / slope);
  return std::max(fit, floor);
}

// March the flow until v_max reaches v_cap * v_max(0), dt underflows, or the
// horizon (t_horizon / max_steps) is hit. Scalar diagnostics are recorded at
// every accepted step; profiles are stored each time v_max doubles.
inline FlowTrajectory evolve_to_blowup(const PeriodicProfile& v0, const FlowParams& params) {
  params.validate();
  if (v0.m != params.m || v0.size() != params.n_grid)
    throw std::invalid_argument("evolve_to_blowup: initial profile does not match params grid");

  const double dx = params.dx();
  detail::FlowOde ode(params.p, dx, params.deriv_order, false);
  const HarmonicTable table(params.m, params.n_grid);

  FlowTrajectory traj;
  traj.params = params;

  std::vector<double> v = v0.values;
  std::vector<double> k1, k2, k3, k4, stage, out, vx;
  double t = 0.0;

  auto record = [&](double dt_used) {
    StepScalars s;
    s.t = t;
    s.dt = dt_used;
    double lo = v[0], hi = v[0];
    for (double x : v) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    s.v_max = hi;
    s.v_min = lo;
    diff1_into(v, dx, params.deriv_order, vx);
    double g = 0.0;
    for (double x : vx) g = std::max(g, std::fabs(x));
    s.max_vx = g;
    const PowP pw(1.0 - params.p);
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double f = pw(v[i]);
      re += f * table.cosx[i];
      im += f * table.sinx[i];
    }
    s.closure_mod = std::hypot(re * table.dx, im * table.dx);
    s.zero_count = gradient_zero_count(vx, hi);
    traj.steps.push_back(s);
    return s;
  };

  StepScalars s0 = record(0.0);
  const double v_max0 = s0.v_max;
  traj.snapshots.push_back({t, v0});
  double next_level = 2.0 * v_max0;
  const double target = params.v_cap * v_max0;

  traj.stop_reason = StopReason::horizon;
  for (long step = 0; step < params.max_steps; ++step) {
    if (t >= params.t_horizon) break;
    double dt = params.cfl * dx * dx / ode.max_pow_p(v);
    if (t + dt > params.t_horizon) dt = params.t_horizon - t;
    bool accepted = false;
    for (int halving = 0; halving <= 40; ++halving) {
      if (detail::try_rk4_step(ode, v, dt, k1, k2, k3, k4, stage, out)) {
        accepted = true;
        break;
      }
      dt *= 0.5;
    }
    if (!accepted) {
      traj.stop_reason = StopReason::dt_underflow;
      break;
    }
    v.swap(out);
    t += dt;
    StepScalars s = record(dt);
    if (s.v_max >= next_level) {
      traj.snapshots.push_back({t, PeriodicProfile(params.m, v)});
      while (next_level <= s.v_max) next_level *= 2.0;
    }
    if (s.v_max >= target) {
      traj.stop_reason = StopReason::cap_reached;
      break;
    }
  }

  traj.t_end = t;
  if (traj.snapshots.back().t != t) traj.snapshots.push_back({t, PeriodicProfile(params.m, v)});
  if (params.p > 0.0) {
    try {
      traj.t_max_estimate = estimate_tmax(traj);
    } catch (const std::exception&) {
      // not enough blow-up samples; leave NaN
    }
  }
  return traj;
}

// Integrate the rescaled equation directly in tau from
// u0 = p^{1/p} t_max^{1/p} v0 up to tau_max, or until u degenerates.
inline RescaledTrajectory evolve_rescaled(const PeriodicProfile& v0, const FlowParams& params,
                                          double t_max, double tau_max, double tau_snap = 0.5) {
  params.validate();
  if (!(t_max > 0.0)) throw std::invalid_argument("evolve_rescaled: t_max must be positive");
  if (!(params.p >= 2.0))
    throw std::invalid_argument("evolve_rescaled: rescaled equation is posed for p >= 2");

  const double dx = params.dx();
  detail::FlowOde ode(params.p, dx, params.deriv_order, true);

  RescaledTrajectory traj;
  traj.params = params;
  traj.t_max_used = t_max;

  const double scale = std::pow(params.p * t_max, 1.0 / params.p);
  std::vector<double> u(v0.values.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = scale * v0.values[i];

  std::vector<double> k1, k2, k3, k4, stage, out, ux;
  double tau = 0.0;
  double next_snap = 0.0;

  auto record = [&](double dt_used) {
    RescaledScalars s;
    s.tau = tau;
    s.dt = dt_used;
    double lo = u[0], hi = u[0];
    for (double x : u) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    s.u_max = hi;
    s.u_min = lo;
    diff1_into(u, dx, params.deriv_order, ux);
    double g = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) g = std::max(g, std::fabs(ux[i]) / u[i]);
    s.max_ux_over_u = g;
    traj.steps.push_back(s);
  };

  record(0.0);
  traj.snapshots.push_back({tau, PeriodicProfile(params.m, u)});
  next_snap = tau_snap;
  const double u_max_cap = 1e3 * traj.steps.front().u_max;

  for (long step = 0; step < params.max_steps && tau < tau_max; ++step) {
    double dt = params.cfl * dx * dx / ode.max_pow_p(u);
    if (tau + dt > tau_max) dt = tau_max - tau;
    bool accepted = false;
    for (int halving = 0; halving <= 40; ++halving) {
      if (detail::try_rk4_step(ode, u, dt, k1, k2, k3, k4, stage, out)) {
        accepted = true;
        break;
      }
      dt *= 0.5;
    }
    double lo = std::numeric_limits<double>::infinity();
    if (accepted)
      for (double x : out) lo = std::min(lo, x);
    if (!accepted || lo < 1e-12) {
      traj.degenerate = true;  // degenerate rescaled limit
      break;
    }
    u.swap(out);
    tau += dt;
    record(dt);
    if (tau >= next_snap) {
      traj.snapshots.push_back({tau, PeriodicProfile(params.m, u)});
      while (next_snap <= tau) next_snap += tau_snap;
    }
    if (traj.steps.back().u_max > u_max_cap) {
      traj.exploded = true;
      break;
    }
  }

  traj.tau_end = tau;
  if (traj.snapshots.back().t != tau) traj.snapshots.push_back({tau, PeriodicProfile(params.m, u)});
  return traj;
}

}  // namespace curveflow
