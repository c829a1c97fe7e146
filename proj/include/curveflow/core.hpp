#pragma once

// Core value types: flow parameters, positive periodic profiles on S_m^1,
// the Fourier mode-1 closure functional and its projection.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "curveflow/grid.hpp"

namespace curveflow {

struct FlowParams {
  double p = 2.0;           // exponent in dv/dt = v^p (v_xx + v)
  double alpha = 1.0;       // 1/(p-1); geometric speed exponent when p >= 2
  int m = 1;                // rotation index
  int n_grid = 256;         // grid points, even, >= 16
  double cfl = 0.4;         // parabolic CFL fraction
  double v_cap = 1000.0;    // stop when v_max >= v_cap * v_max(0)
  double closure_tol = 1e-7;
  int deriv_order = 4;      // spatial stencil order (2 or 4)
  double t_horizon = std::numeric_limits<double>::infinity();
  long max_steps = 200'000'000;

  FlowParams() = default;
  FlowParams(double p_, int m_, int n) : p(p_), m(m_), n_grid(n) {
    alpha = (p_ != 1.0) ? 1.0 / (p_ - 1.0) : std::numeric_limits<double>::quiet_NaN();
  }

  void validate() const {
    if (m < 1) throw std::invalid_argument("FlowParams: m must be >= 1");
    if (n_grid < 16 || n_grid % 2 != 0)
      throw std::invalid_argument("FlowParams: n_grid must be even and >= 16");
    if (!(cfl > 0.0 && cfl < 1.0)) throw std::invalid_argument("FlowParams: cfl must lie in (0,1)");
    if (!(v_cap > 1.0)) throw std::invalid_argument("FlowParams: v_cap must exceed 1");
    if (!(closure_tol > 0.0)) throw std::invalid_argument("FlowParams: closure_tol must be positive");
    if (deriv_order != 2 && deriv_order != 4)
      throw std::invalid_argument("FlowParams: deriv_order must be 2 or 4");
    if (p != 1.0 && std::isfinite(alpha)) {
      const double q = 1.0 + 1.0 / alpha;
      if (std::fabs(q - p) > 1e-12 * std::max(1.0, std::fabs(p)))
        throw std::invalid_argument("FlowParams: alpha inconsistent with p = 1 + 1/alpha");
    }
  }

  double dx() const { return grid_spacing(m, n_grid); }
};

// Samples of a strictly positive 2m*pi-periodic function at
// x_i = -m*pi + i * 2m*pi/n. Index arithmetic is modulo n.
struct PeriodicProfile {
  int m = 1;
  std::vector<double> values;

  PeriodicProfile() = default;
  PeriodicProfile(int m_, std::vector<double> vals) : m(m_), values(std::move(vals)) {
    if (m < 1) throw std::invalid_argument("PeriodicProfile: m must be >= 1");
    const int n = static_cast<int>(values.size());
    if (n < 16 || n % 2 != 0)
      throw std::invalid_argument("PeriodicProfile: need an even number >= 16 of samples");
    for (double v : values)
      if (!(v > 0.0) || !std::isfinite(v))
        throw std::domain_error("PeriodicProfile: samples must be strictly positive and finite");
  }

  int size() const { return static_cast<int>(values.size()); }
  double dx() const { return grid_spacing(m, size()); }
  double x(int i) const { return -m * kPi + i * dx(); }
  std::vector<double> grid() const { return make_grid(m, size()); }
  double operator[](int i) const { return values[detail::wrap(i, size())]; }

  double max() const { return *std::max_element(values.begin(), values.end()); }
  double min() const { return *std::min_element(values.begin(), values.end()); }

  template <typename F>
  PeriodicProfile map(F&& f) const {
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = f(values[i]);
    return PeriodicProfile(m, std::move(out));
  }
};

struct ComplexMoment {
  double re = 0.0;
  double im = 0.0;
  double modulus() const { return std::hypot(re, im); }
};

// Precomputed cos/sin tables for a grid; the closure functional is evaluated
// every accepted step, so this is kept out of the inner loop.
struct HarmonicTable {
  std::vector<double> cosx, sinx;
  double dx = 0.0;

  HarmonicTable() = default;
  HarmonicTable(int m, int n) : dx(grid_spacing(m, n)) {
    cosx.resize(static_cast<std::size_t>(n));
    sinx.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const double xi = -m * kPi + i * dx;
      cosx[static_cast<std::size_t>(i)] = std::cos(xi);
      sinx[static_cast<std::size_t>(i)] = std::sin(xi);
    }
  }
};

// Trapezoidal approximation of int v^{1-p} e^{ix} dx over [-m*pi, m*pi].
// Vanishes exactly when the curvature data comes from a closed curve.
inline ComplexMoment closure_moment(const PeriodicProfile& v, double p,
                                    const HarmonicTable& table) {
  const PowP pw(1.0 - p);
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < v.values.size(); ++i) {
    const double vi = v.values[i];
    if (!(vi > 0.0)) throw std::domain_error("closure_moment: non-positive sample");
    const double f = pw(vi);
    re += f * table.cosx[i];
    im += f * table.sinx[i];
  }
  return {re * table.dx, im * table.dx};
}

inline ComplexMoment closure_moment(const PeriodicProfile& v, double p) {
  return closure_moment(v, p, HarmonicTable(v.m, v.size()));
}

inline double sup_norm_distance(const PeriodicProfile& a, const PeriodicProfile& b) {
  if (a.m != b.m || a.size() != b.size())
    throw std::invalid_argument("sup_norm_distance: profiles live on different grids");
  double d = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    d = std::max(d, std::fabs(a.values[i] - b.values[i]));
  return d;
}

// Even about node 0 and strictly decreasing on (0, m*pi): the symmetric
// class in which the type-two run converges to the cosine profile.
inline bool is_even_profile(const PeriodicProfile& v, double rel_tol = 1e-10) {
  const int n = v.size();
  const double scale = v.max();
  for (int i = 1; i < n / 2; ++i)
    if (std::fabs(v[n / 2 + i] - v[n / 2 - i]) > rel_tol * scale) return false;
  return true;
}

inline bool is_symmetric_decreasing(const PeriodicProfile& v, double rel_tol = 1e-10) {
  if (!is_even_profile(v, rel_tol)) return false;
  const int n = v.size();
  // nodes n/2 .. n-1 cover x in [0, m*pi)
  for (int i = n / 2; i + 1 < n; ++i)
    if (v.values[static_cast<std::size_t>(i + 1)] >= v.values[static_cast<std::size_t>(i)])
      return false;
  return true;
}

struct ProjectionResult {
  PeriodicProfile profile;
  ComplexMoment residual;        // moment after projection
  bool symmetry_warning = false; // input was in the symmetric class, output is not
};

// Enforce the closure condition by an L^2 projection of the density
// f = v^{1-p} onto the complement of span{cos x, sin x}. The condition is
// linear in f, so one subtraction makes the discrete moment vanish exactly.
inline ProjectionResult project_closure(const PeriodicProfile& v0, double p,
                                        double closure_tol = 1e-7) {
  const int n = v0.size();
  const HarmonicTable table(v0.m, n);
  const PowP fwd(1.0 - p);

  std::vector<double> f(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) f[static_cast<std::size_t>(i)] = fwd(v0.values[static_cast<std::size_t>(i)]);

  // Discrete inner products; on this grid sum cos^2 = sum sin^2 = n/2.
  double fc = 0.0, fs = 0.0, cc = 0.0, ss = 0.0;
  for (int i = 0; i < n; ++i) {
    fc += f[static_cast<std::size_t>(i)] * table.cosx[static_cast<std::size_t>(i)];
    fs += f[static_cast<std::size_t>(i)] * table.sinx[static_cast<std::size_t>(i)];
    cc += table.cosx[static_cast<std::size_t>(i)] * table.cosx[static_cast<std::size_t>(i)];
    ss += table.sinx[static_cast<std::size_t>(i)] * table.sinx[static_cast<std::size_t>(i)];
  }
  const double a1 = fc / cc, b1 = fs / ss;

  std::vector<double> w(static_cast<std::size_t>(n));
  const double q = 1.0 / (1.0 - p);
  for (int i = 0; i < n; ++i) {
    const double fi = f[static_cast<std::size_t>(i)] - a1 * table.cosx[static_cast<std::size_t>(i)] -
                      b1 * table.sinx[static_cast<std::size_t>(i)];
    if (!(fi > 0.0))
      throw std::domain_error("project_closure: projection leaves non-positive density");
    w[static_cast<std::size_t>(i)] = std::pow(fi, q);
  }

  ProjectionResult result{PeriodicProfile(v0.m, std::move(w)), {}, false};
  result.residual = closure_moment(result.profile, p, table);
  if (result.residual.modulus() >= closure_tol)
    throw std::runtime_error("project_closure: residual moment exceeds closure_tol");
  if (is_symmetric_decreasing(v0) && !is_symmetric_decreasing(result.profile))
    result.symmetry_warning = true;
  return result;
}

}  // namespace curveflow
