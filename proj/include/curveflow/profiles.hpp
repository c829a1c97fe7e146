#pragma once

// Homothetic self-similar profiles: the steady ODE w'' + w - w^{1-p} = 0,
// its first integral F, half-periods R(a) via singularity-free quadrature,
// the p = 4 ellipse family in closed form, and the members that fit on S_m^1.

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "curveflow/core.hpp"
#include "curveflow/grid.hpp"
#include "curveflow/ode.hpp"

namespace curveflow {

// F(s) = s^2 - (2/(2-p)) s^{2-p} for p != 2, s^2 - 2 log s for p = 2.
// Orbits of the steady ODE are level sets F = const.
inline double energy_F(double s, double p) {
  if (!(s > 0.0)) throw std::domain_error("energy_F: s must be positive");
  if (p == 2.0) return s * s - 2.0 * std::log(s);
  return s * s - (2.0 / (2.0 - p)) * std::pow(s, 2.0 - p);
}

struct EnergyLandscape {
  double p = 2.0;
  double operator()(double s) const { return energy_F(s, p); }
  double derivative(double s) const {
    if (!(s > 0.0)) throw std::domain_error("EnergyLandscape: s must be positive");
    return 2.0 * s - 2.0 * std::pow(s, 1.0 - p);
  }
};

// Unique b >= 1 with F(b) = F(a), by bisection. For p >= 2, F decreases on
// (0,1) and increases on (1,inf), so the bracket [1, sqrt(F(a)) + 1] works:
// F(b) >= b^2 when p > 2, and b^2 - 2 log b >= b^2 - 2b for p = 2.
inline double companion_max(double a, double p) {
  if (!(p >= 2.0)) throw std::invalid_argument("companion_max: requires p >= 2");
  if (!(a > 0.0 && a <= 1.0)) throw std::invalid_argument("companion_max: requires a in (0,1]");
  if (a >= 1.0 - 1e-14) return 1.0;  // degenerate constant solution
  const double target = energy_F(a, p);
  double lo = 1.0;
  double hi = std::sqrt(target) + 2.0;
  while (energy_F(hi, p) < target) hi *= 2.0;
  for (int it = 0; it < 200 && (hi - lo) > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (energy_F(mid, p) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
struct GaussLegendre {
  std::vector<double> nodes, weights;

  explicit GaussLegendre(int n) {
    nodes.resize(static_cast<std::size_t>(n));
    weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
      double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
      double pp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        pp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / pp;
        x -= dx;
        if (std::fabs(dx) < 1e-15) break;
      }
      nodes[static_cast<std::size_t>(i)] = -x;
      nodes[static_cast<std::size_t>(n - 1 - i)] = x;
      const double w = 2.0 / ((1.0 - x * x) * pp * pp);
      weights[static_cast<std::size_t>(i)] = w;
      weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
  }

  template <typename F>
  double integrate(const F& f, double lo, double hi) const {
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(mid + half * nodes[i]);
    return s * half;
  }
};

inline const GaussLegendre& gauss_legendre_256() {
  static const GaussLegendre table(256);
  return table;
}

// Half-period R(a) = int_a^b ds / sqrt(F(a) - F(s)). The substitution
// s = a + (b-a) sin^2(theta) removes the square-root singularities at both
// endpoints; the transformed integrand is smooth and 256-node Gauss-Legendre
// resolves it far below the acceptance tolerances. At a = 1 the orbit
// degenerates to the equilibrium and R is the linearization value pi/sqrt(p).
inline double half_period(double a, double p) {
  if (!(p > 2.0)) throw std::invalid_argument("half_period: formula regime requires p > 2");
  if (!(a > 0.0 && a <= 1.0)) throw std::invalid_argument("half_period: requires a in (0,1]");
  // F(a) - F(s) is O((1-a)^2) and drowns in roundoff for a this close to 1;
  // the linearization period is accurate to the same order there.
  if (a >= 1.0 - 1e-6) return kPi / std::sqrt(p);
  const double b = companion_max(a, p);
  const double Fa = energy_F(a, p);
  const auto& gl = gauss_legendre_256();
  auto integrand = [&](double theta) {
    const double st = std::sin(theta), ct = std::cos(theta);
    const double s = a + (b - a) * st * st;
    const double den = Fa - energy_F(s, p);
    if (den <= 0.0) {
      // roundoff at the very endpoints: use the limiting value of the ratio
      const double dF = std::fabs(2.0 * s - 2.0 * std::pow(s, 1.0 - p));
      return 2.0 * std::sqrt((b - a) / dF) * (st < ct ? ct : st);
    }
    return 2.0 * (b - a) * st * ct / std::sqrt(den);
  };
  return gl.integrate(integrand, 0.0, 0.5 * kPi);
}

// A steady profile over one full period. Dense arrays (with derivatives)
// support evaluation at arbitrary phase; `samples` is the uniform
// resampling requested by the caller, starting at the stored origin.
struct SteadyProfile {
  double p = 0.0;
  double a = 1.0;          // minimum value
  double b = 1.0;          // maximum value
  double half_period = 0.0;
  double min_phase = 0.0;  // x of the minimum in stored coordinates
  std::vector<double> xs, w, wp;  // dense, one period [0, 2R]
  std::vector<double> samples;    // n uniform samples over [0, 2R)

  double period() const { return 2.0 * half_period; }

  // cubic Hermite interpolation of the periodic extension
  double value_at(double x) const { return interp(x, false); }
  double derivative_at(double x) const { return interp(x, true); }

 private:
  double interp(double x, bool deriv) const {
    const double T = period();
    double y = std::fmod(x, T);
    if (y < 0.0) y += T;
    const double h = xs[1] - xs[0];
    std::size_t i = std::min(static_cast<std::size_t>(y / h), xs.size() - 2);
    const double t = (y - xs[i]) / h;
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    if (!deriv)
      return h00 * w[i] + h10 * h * wp[i] + h01 * w[i + 1] + h11 * h * wp[i + 1];
    const double d00 = 6 * t * (t - 1) / h, d10 = (1 - 4 * t + 3 * t * t);
    const double d01 = -6 * t * (t - 1) / h, d11 = (3 * t * t - 2 * t);
    return d00 * w[i] + d10 * wp[i] + d01 * w[i + 1] + d11 * wp[i + 1];
  }
};

// Integrate w'' = -w + w^{1-p} from w(0) = a, w'(0) = 0 over one period.
// Fixed-step RK4 with an energy-drift check against F(a); the step is
// refined until the drift passes 1e-6 (typically ~1e-12 already at the
// default resolution of >= 10000 steps per period).
inline SteadyProfile solve_profile(double a, double p, int n) {
  if (!(p > 2.0)) throw std::invalid_argument("solve_profile: requires p > 2");
  if (!(a > 0.0 && a <= 1.0)) throw std::invalid_argument("solve_profile: requires a in (0,1]");
  if (n < 16 || n % 2 != 0) throw std::invalid_argument("solve_profile: n must be even and >= 16");

  SteadyProfile prof;
  prof.p = p;
  prof.a = a;
  prof.min_phase = 0.0;

  if (a >= 1.0 - 1e-12) {
    prof.b = 1.0;
    prof.half_period = kPi / std::sqrt(p);
    const int N = 10000;
    prof.xs.resize(N + 1);
    prof.w.assign(N + 1, 1.0);
    prof.wp.assign(N + 1, 0.0);
    for (int i = 0; i <= N; ++i) prof.xs[static_cast<std::size_t>(i)] = prof.period() * i / N;
    prof.samples.assign(static_cast<std::size_t>(n), 1.0);
    return prof;
  }

  prof.b = companion_max(a, p);
  prof.half_period = half_period(a, p);
  const double T = prof.period();
  const double Fa = energy_F(a, p);
  const PowP pw(1.0 - p);
  auto field = [&](double, const State<2>& y) -> State<2> {
    return {y[1], -y[0] + pw(y[0])};
  };

  int per_sample = std::max(1, (10000 + n - 1) / n);
  for (int attempt = 0; attempt < 8; ++attempt) {
    const int N = n * per_sample;
    const double dt = T / N;
    prof.xs.assign(static_cast<std::size_t>(N + 1), 0.0);
    prof.w.assign(static_cast<std::size_t>(N + 1), 0.0);
    prof.wp.assign(static_cast<std::size_t>(N + 1), 0.0);
    State<2> y{a, 0.0};
    double drift = 0.0;
    for (int i = 0; i <= N; ++i) {
      prof.xs[static_cast<std::size_t>(i)] = i * dt;
      prof.w[static_cast<std::size_t>(i)] = y[0];
      prof.wp[static_cast<std::size_t>(i)] = y[1];
      const double E = y[1] * y[1] + energy_F(y[0], p);
      drift = std::max(drift, std::fabs(E - Fa));
      if (i < N) y = rk4_step(field, i * dt, y, dt);
    }
    if (drift <= 1e-6 * std::max(1.0, std::fabs(Fa))) break;
    if (attempt == 7)
      throw std::runtime_error("solve_profile: energy drift persists after refinement");
    per_sample *= 2;
  }

  const int N = static_cast<int>(prof.xs.size()) - 1;
  prof.samples.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j)
    prof.samples[static_cast<std::size_t>(j)] = prof.w[static_cast<std::size_t>(j * (N / n))];
  return prof;
}

// Closed-form p = 4 family (curvature presentation of shrinking ellipses):
// w(x) = (1 + b^2)^{-1/4} sqrt(1 + b^2 cos^2 x), maximum (1+b^2)^{1/4} at
// x = 0. All members are pi-periodic.
inline SteadyProfile ellipse_profile(double b_param, int n) {
  if (!(b_param >= 0.0)) throw std::invalid_argument("ellipse_profile: b_param must be >= 0");
  if (n < 16 || n % 2 != 0) throw std::invalid_argument("ellipse_profile: n must be even and >= 16");
  SteadyProfile prof;
  prof.p = 4.0;
  const double b2 = b_param * b_param;
  const double scale = std::pow(1.0 + b2, -0.25);
  prof.a = scale;                       // minimum, attained at x = pi/2
  prof.b = std::pow(1.0 + b2, 0.25);    // maximum, attained at x = 0
  prof.half_period = 0.5 * kPi;
  prof.min_phase = 0.5 * kPi;
  const int N = std::max(4096, 4 * n);
  prof.xs.resize(static_cast<std::size_t>(N + 1));
  prof.w.resize(static_cast<std::size_t>(N + 1));
  prof.wp.resize(static_cast<std::size_t>(N + 1));
  auto value = [&](double x) { return scale * std::sqrt(1.0 + b2 * std::cos(x) * std::cos(x)); };
  auto slope = [&](double x) {
    const double c = std::cos(x), s = std::sin(x);
    return -scale * b2 * c * s / std::sqrt(1.0 + b2 * c * c);
  };
  for (int i = 0; i <= N; ++i) {
    const double x = kPi * i / N;
    prof.xs[static_cast<std::size_t>(i)] = x;
    prof.w[static_cast<std::size_t>(i)] = value(x);
    prof.wp[static_cast<std::size_t>(i)] = slope(x);
  }
  prof.samples.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) prof.samples[static_cast<std::size_t>(j)] = value(kPi * j / n);
  return prof;
}

// Discrete residual of (K^alpha)'' + K^alpha - 1/K (equivalently of the
// steady ODE for w = K^alpha with p = 1 + 1/alpha). A 6th-order stencil
// keeps the discretization floor well below the tolerances it is checked
// against.
inline double curvature_ode_residual(const PeriodicProfile& K, double alpha, int order = 6) {
  const double p = 1.0 + 1.0 / alpha;
  PeriodicProfile w = K.map([&](double k) { return std::pow(k, alpha); });
  std::vector<double> d2;
  diff2_into(w.values, w.dx(), order, d2);
  const PowP pw(1.0 - p);
  double r = 0.0;
  for (std::size_t i = 0; i < d2.size(); ++i)
    r = std::max(r, std::fabs(d2[i] + w.values[i] - pw(w.values[i])));
  return r;
}

struct ProfileFamily {
  bool continuum = false;  // p = 4: every a fits with j = 2m
  std::vector<std::pair<double, int>> members;  // (a, j) with j * 2R(a) = 2m*pi
};

// Members of the steady family that close up on S_m^1: j half-period pairs
// with R(a) = m*pi/j. Monotonicity of R in a (increasing for p in (2,4),
// decreasing for p > 4) makes bisection valid; p = 4 is the continuum case.
inline ProfileFamily find_periodic_profiles(double p, int m) {
  if (!(p > 2.0)) throw std::invalid_argument("find_periodic_profiles: requires p > 2");
  if (m < 1) throw std::invalid_argument("find_periodic_profiles: m must be >= 1");
  ProfileFamily fam;
  if (std::fabs(p - 4.0) < 1e-12) {
    fam.continuum = true;
    return fam;
  }
  const double a_lo = 1e-6, a_hi = 1.0 - 1e-6;
  const double R_lo_end = half_period(a_lo, p);
  const double R_hi_end = half_period(a_hi, p);
  const double R_min = std::min(R_lo_end, R_hi_end);
  const double R_max = std::max(R_lo_end, R_hi_end);

  const int j_min = std::max(1, static_cast<int>(std::ceil(m * kPi / R_max)));
  const int j_max = static_cast<int>(std::floor(m * kPi / R_min));
  for (int j = j_min; j <= j_max; ++j) {
    const double target = m * kPi / j;
    if (!(target > R_min && target < R_max)) continue;
    double lo = a_lo, hi = a_hi;
    const bool increasing = R_hi_end > R_lo_end;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double r = half_period(mid, p);
      if ((r < target) == increasing)
        lo = mid;
      else
        hi = mid;
    }
    fam.members.emplace_back(0.5 * (lo + hi), j);
  }
  return fam;
}

}  // namespace curveflow
