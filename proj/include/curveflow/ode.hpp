#pragma once

// Small fixed-dimension ODE steppers: classical RK4 and an adaptive
// Dormand-Prince 4(5) pair with PI-free step control. Used by the profile
// and travelling-wave modules; the PDE module has its own vectorized loop.

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace curveflow {

template <std::size_t N>
using State = std::array<double, N>;

template <std::size_t N, typename F>
State<N> rk4_step(const F& f, double t, const State<N>& y, double h) {
  State<N> k1 = f(t, y), y2{};
  for (std::size_t i = 0; i < N; ++i) y2[i] = y[i] + 0.5 * h * k1[i];
  State<N> k2 = f(t + 0.5 * h, y2);
  for (std::size_t i = 0; i < N; ++i) y2[i] = y[i] + 0.5 * h * k2[i];
  State<N> k3 = f(t + 0.5 * h, y2);
  for (std::size_t i = 0; i < N; ++i) y2[i] = y[i] + h * k3[i];
  State<N> k4 = f(t + h, y2);
  State<N> out{};
  for (std::size_t i = 0; i < N; ++i)
    out[i] = y[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

struct AdaptiveOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
  double h_init = 1e-3;
  double h_min = 1e-15;
  double h_max = 1.0;
};

// One adaptive Dormand-Prince step. Returns the accepted state, advances t
// and proposes the next step size. Throws if the step size underflows.
template <std::size_t N, typename F>
State<N> dopri_step(const F& f, double& t, const State<N>& y, double& h,
                    const AdaptiveOptions& opt) {
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  while (true) {
    if (h < opt.h_min) throw std::runtime_error("dopri_step: step size underflow");
    State<N> k1 = f(t, y), s{};
    for (std::size_t i = 0; i < N; ++i) s[i] = y[i] + h * a21 * k1[i];
    State<N> k2 = f(t + h / 5, s);
    for (std::size_t i = 0; i < N; ++i) s[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    State<N> k3 = f(t + 3 * h / 10, s);
    for (std::size_t i = 0; i < N; ++i)
      s[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    State<N> k4 = f(t + 4 * h / 5, s);
    for (std::size_t i = 0; i < N; ++i)
      s[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    State<N> k5 = f(t + 8 * h / 9, s);
    for (std::size_t i = 0; i < N; ++i)
      s[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    State<N> k6 = f(t + h, s);
    State<N> y5{};
    for (std::size_t i = 0; i < N; ++i)
      y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    State<N> k7 = f(t + h, y5);

    double err = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                             e6 * k6[i] + e7 * k7[i]);
      const double sc = opt.abs_tol + opt.rel_tol * std::max(std::fabs(y[i]), std::fabs(y5[i]));
      err = std::max(err, std::fabs(ei) / sc);
    }
    if (err <= 1.0) {
      t += h;
      const double grow = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
      h = std::min(opt.h_max, h * std::min(5.0, std::max(0.2, grow)));
      return y5;
    }
    h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
  }
}

}  // namespace curveflow
