#pragma once

// Travelling-wave analysis in the (H, G) = (U^p, (U^p)') phase plane:
// equilibria and eigenvalues of the vector field X_c, the unstable
// trajectory of the origin found by shooting along the inbound ray
// G = (p/c) H, and the monotone map c -> U_c(0).

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "curveflow/ode.hpp"

namespace curveflow {

struct WaveParams {
  double p = 3.0;
  double c = 0.5;
  double eps0 = 1e-6;     // shooting seed magnitude in H
  double xi_span = 200.0; // integration horizon

  void validate() const {
    if (!(p > 2.0)) throw std::invalid_argument("WaveParams: requires p > 2");
    if (!(c > 0.0)) throw std::invalid_argument("WaveParams: requires c > 0");
    if (!(c * c - 4.0 * p < 0.0))
      throw std::invalid_argument("WaveParams: c^2 - 4p must be negative (spiral sink regime)");
    if (!(eps0 > 0.0 && eps0 <= 1e-6))
      throw std::invalid_argument("WaveParams: eps0 must lie in (0, 1e-6]");
    if (!(xi_span > 0.0)) throw std::invalid_argument("WaveParams: xi_span must be positive");
  }
};

// The field after dividing out the factor H ("up to a reparametrization"):
// dH/dxi = G, dG/dxi = (-pH^2 + pH - cG + ((p-1)/p) G^2) / H.
inline std::array<double, 2> wave_field(double H, double G, double p, double c) {
  if (!(H > 0.0)) throw std::domain_error("wave_field: requires H > 0");
  const double q = -p * H * H + p * H - c * G + ((p - 1.0) / p) * G * G;
  return {G, q / H};
}

struct Equilibrium {
  double H = 0.0, G = 0.0;
  std::complex<double> lambda1, lambda2;
};

// The three zeros of X_c in {H >= 0} with their linearization eigenvalues:
// (0,0): {0, -c};  (1,0): (-c +- sqrt(c^2-4p))/2;  (0, pc/(p-1)): {pc/(p-1), c}.
inline std::array<Equilibrium, 3> equilibria_and_eigenvalues(double p, double c) {
  if (!(p > 2.0 && c > 0.0))
    throw std::invalid_argument("equilibria_and_eigenvalues: requires p > 2, c > 0");
  std::array<Equilibrium, 3> eq;
  eq[0] = {0.0, 0.0, {0.0, 0.0}, {-c, 0.0}};
  const std::complex<double> disc = std::sqrt(std::complex<double>(c * c - 4.0 * p, 0.0));
  eq[1] = {1.0, 0.0, (-c + disc) / 2.0, (-c - disc) / 2.0};
  eq[2] = {0.0, p * c / (p - 1.0), {p * c / (p - 1.0), 0.0}, {c, 0.0}};
  return eq;
}

// Lyapunov quantity E = (U')^2 + U^2 - (2/(2-p)) U^{2-p} expressed in (H,G);
// strictly decreasing along orbits for c > 0, constant for c = 0.
inline double wave_energy(double H, double G, double p) {
  return G * G / (p * p) * std::pow(H, 2.0 / p - 2.0) + std::pow(H, 2.0 / p) -
         (2.0 / (2.0 - p)) * std::pow(H, 2.0 / p - 1.0);
}

struct WaveTrajectory {
  WaveParams params;
  std::vector<double> xi, H, G;
  double xi_cross = 0.0;  // first G = 0 crossing
  double h_c = 0.0;       // H at the crossing
  double U0 = 0.0;        // h_c^{1/p} = U_c(0)
  double lambda_c = 0.0;  // sup G/(pH) over the stored arc
};

namespace detail {
template <typename F>
double bisect_crossing(const F& field, State<2> y, double xi0, double dt_bracket) {
  // G changes sign inside (xi0, xi0 + dt_bracket); locate it on the RK4 map
  double lo = 0.0, hi = dt_bracket;
  for (int it = 0; it < 200 && (hi - lo) > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    const State<2> ym = rk4_step(field, xi0, y, mid);
    (ym[1] > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}
}  // namespace detail

// Shoot the unique unstable-manifold orbit of the origin forward from
// (eps0, (p/c) eps0) until it first meets the H-axis. Nearby seeds funnel
// onto the manifold, so the landing value h_c is insensitive to eps0.
inline WaveTrajectory shoot_unstable(const WaveParams& params) {
  params.validate();
  const double p = params.p, c = params.c;
  auto field = [p, c](double, const State<2>& y) -> State<2> {
    const auto f = wave_field(y[0], y[1], p, c);
    return {f[0], f[1]};
  };

  WaveTrajectory traj;
  traj.params = params;

  AdaptiveOptions opt;
  opt.rel_tol = 1e-12;
  opt.abs_tol = 1e-16;
  opt.h_init = params.eps0;
  opt.h_max = 0.05;

  double xi = 0.0;
  double h = opt.h_init;
  State<2> y{params.eps0, (p / c) * params.eps0};
  traj.xi.push_back(xi);
  traj.H.push_back(y[0]);
  traj.G.push_back(y[1]);

  double E_prev = wave_energy(y[0], y[1], p);
  while (xi < params.xi_span) {
    const double xi_prev = xi;
    const State<2> y_prev = y;
    y = dopri_step(field, xi, y, h, opt);
    if (!(y[0] > 0.0)) throw std::runtime_error("shoot_unstable: H left the positive cone (seed too large)");
    if (y[1] <= 0.0) {
      const double theta = detail::bisect_crossing(field, y_prev, xi_prev, xi - xi_prev);
      const State<2> yc = rk4_step(field, xi_prev, y_prev, theta);
      traj.xi_cross = xi_prev + theta;
      traj.h_c = yc[0];
      traj.U0 = std::pow(yc[0], 1.0 / p);
      traj.xi.push_back(traj.xi_cross);
      traj.H.push_back(yc[0]);
      traj.G.push_back(0.0);
      double lam = 0.0;
      for (std::size_t i = 0; i < traj.H.size(); ++i)
        lam = std::max(lam, traj.G[i] / (p * traj.H[i]));
      traj.lambda_c = lam;
      return traj;
    }
    const double E = wave_energy(y[0], y[1], p);
    if (E > E_prev + 1e-10 * (1.0 + std::fabs(E_prev)))
      throw std::runtime_error("shoot_unstable: Lyapunov energy increased along the arc");
    E_prev = E;
    traj.xi.push_back(xi);
    traj.H.push_back(y[0]);
    traj.G.push_back(y[1]);
  }
  throw std::runtime_error("shoot_unstable: horizon exhausted before the G = 0 crossing");
}

struct WaveProfileTable {
  std::vector<double> xi;  // shifted so the crossing sits at xi = 0
  std::vector<double> U;
  std::vector<double> Uprime;
  double lambda_c = 0.0;  // sup U'/U over the arc
};

// The wave profile U_c = H^{1/p} with its derivative, crossing at xi = 0.
inline WaveProfileTable uc_profile(const WaveTrajectory& traj, double p) {
  if (traj.h_c <= 0.0) throw std::invalid_argument("uc_profile: trajectory has no crossing");
  WaveProfileTable table;
  table.xi.resize(traj.xi.size());
  table.U.resize(traj.xi.size());
  table.Uprime.resize(traj.xi.size());
  double lam = 0.0;
  for (std::size_t i = 0; i < traj.xi.size(); ++i) {
    const double H = traj.H[i], G = traj.G[i];
    table.xi[i] = traj.xi[i] - traj.xi_cross;
    table.U[i] = std::pow(H, 1.0 / p);
    table.Uprime[i] = G * std::pow(H, 1.0 / p - 1.0) / p;
    lam = std::max(lam, G / (p * H));
  }
  table.lambda_c = lam;
  return table;
}

// Integrate the c = 0 field from (b^p, 0) around one closed orbit; returns
// H and the energy after the full revolution (both should match the start).
struct OrbitReturn {
  double H_return = 0.0;
  double energy_drift = 0.0;  // |E_return - E_start| / |E_start|
  double period = 0.0;
};

inline OrbitReturn closed_orbit_return(double p, double b) {
  if (!(p > 2.0 && b > 1.0)) throw std::invalid_argument("closed_orbit_return: requires p > 2, b > 1");
  auto field = [p](double, const State<2>& y) -> State<2> {
    const double q = -p * y[0] * y[0] + p * y[0] + ((p - 1.0) / p) * y[1] * y[1];
    return {y[1], q / y[0]};
  };
  AdaptiveOptions opt;
  opt.rel_tol = 1e-12;
  opt.abs_tol = 1e-16;
  opt.h_init = 1e-4;
  opt.h_max = 0.02;

  const double H0 = std::pow(b, p);
  const double E0 = wave_energy(H0, 0.0, p);
  double xi = 0.0, h = opt.h_init;
  State<2> y{H0, 0.0};
  int crossings = 0;
  double G_prev = 0.0;
  bool moved = false;
  while (xi < 1e4) {
    const double xi_prev = xi;
    const State<2> y_prev = y;
    y = dopri_step(field, xi, y, h, opt);
    if (moved && G_prev != 0.0 && y[1] * G_prev < 0.0) {
      ++crossings;
      if (crossings == 2) {
        auto flipped = [&](double theta) {
          return rk4_step(field, xi_prev, y_prev, theta)[1];
        };
        double lo = 0.0, hi = xi - xi_prev;
        for (int it = 0; it < 200 && (hi - lo) > 1e-13; ++it) {
          const double mid = 0.5 * (lo + hi);
          (flipped(mid) * G_prev > 0.0 ? lo : hi) = mid;
        }
        const State<2> yc = rk4_step(field, xi_prev, y_prev, 0.5 * (lo + hi));
        OrbitReturn r;
        r.H_return = yc[0];
        r.energy_drift = std::fabs(wave_energy(yc[0], yc[1], p) - E0) / std::fabs(E0);
        r.period = xi_prev + 0.5 * (lo + hi);
        return r;
      }
    }
    if (y[1] != 0.0) {
      G_prev = y[1];
      moved = true;
    }
  }
  throw std::runtime_error("closed_orbit_return: orbit failed to close within the horizon");
}

// Smallest wave speed (by bisection from c_hi) whose profile clears the
// level A: U_c(0) > A and U_c' > A wherever U_c lies in [1/A, A].
inline double c_for_level(double p, double A, double c_hi = 1.0, double eps0 = 1e-6,
                          double xi_span = 400.0) {
  if (!(A > 1.0)) throw std::invalid_argument("c_for_level: requires A > 1");
  auto shoot = [&](double c) {
    WaveParams wp{p, c, eps0, xi_span};
    return shoot_unstable(wp);
  };
  auto u0_of = [&](double c) { return shoot(c).U0; };

  double c_good;  // has U0 > A
  if (u0_of(c_hi) > A) {
    c_good = c_hi;  // trivial bracket: the endpoint already clears the level
  } else {
    double lo = c_hi;
    int halvings = 0;
    while (u0_of(lo) <= A) {
      lo *= 0.5;
      if (++halvings > 40) throw std::runtime_error("c_for_level: bisection bracket failure");
    }
    double hi = 2.0 * lo;  // u0(hi) <= A by monotonicity
    for (int it = 0; it < 40 && (hi - lo) > 1e-3 * lo; ++it) {
      const double mid = 0.5 * (lo + hi);
      (u0_of(mid) > A ? lo : hi) = mid;
    }
    c_good = lo;
  }

  // derivative clearance over the window U in [1/A, A]; shrink c until met
  for (int it = 0; it < 40; ++it) {
    const WaveTrajectory traj = shoot(c_good);
    const WaveProfileTable table = uc_profile(traj, p);
    double min_slope = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < table.U.size(); ++i)
      if (table.U[i] >= 1.0 / A && table.U[i] <= A)
        min_slope = std::min(min_slope, table.Uprime[i]);
    if (traj.U0 > A && min_slope > A) return c_good;
    c_good *= 0.5;
  }
  throw std::runtime_error("c_for_level: could not satisfy the derivative clearance");
}

}  // namespace curveflow
