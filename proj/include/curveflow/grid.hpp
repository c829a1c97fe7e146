#pragma once

// Uniform periodic grids on S_m^1 = R/2m*pi*Z and the finite-difference
// kernels shared by the PDE and profile modules. Stencil sums are grouped
// symmetrically so that even input data produces bit-even output.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace curveflow {

inline constexpr double kPi = std::numbers::pi;

// Abscissae x_i = -m*pi + i * (2*m*pi/n), i = 0..n-1. First node -m*pi,
// node n/2 sits exactly at x = 0 so reflection maps nodes to nodes.
inline std::vector<double> make_grid(int m, int n) {
  if (m < 1) throw std::invalid_argument("make_grid: rotation index m must be >= 1");
  if (n < 4 || n % 2 != 0)
    throw std::invalid_argument("make_grid: grid size must be even and >= 4");
  std::vector<double> x(static_cast<std::size_t>(n));
  const double dx = 2.0 * m * kPi / n;
  for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = -m * kPi + i * dx;
  return x;
}

inline double grid_spacing(int m, int n) { return 2.0 * m * kPi / n; }

// v^p with a fast path for small integer exponents (the hot loop of the
// flow solver; std::pow dominates the step cost otherwise).
struct PowP {
  double p = 2.0;
  bool is_int = true;
  int ip = 2;

  explicit PowP(double exponent) : p(exponent) {
    const double r = std::nearbyint(exponent);
    is_int = (r == exponent && std::fabs(exponent) <= 16.0);
    ip = is_int ? static_cast<int>(r) : 0;
  }

  double operator()(double v) const {
    if (!is_int) return std::pow(v, p);
    int e = ip < 0 ? -ip : ip;
    double acc = 1.0, base = v;
    while (e > 0) {
      if (e & 1) acc *= base;
      base *= base;
      e >>= 1;
    }
    return ip < 0 ? 1.0 / acc : acc;
  }
};

namespace detail {
inline std::size_t wrap(std::ptrdiff_t i, std::ptrdiff_t n) {
  i %= n;
  if (i < 0) i += n;
  return static_cast<std::size_t>(i);
}
}  // namespace detail

namespace detail {
// Apply a symmetric/antisymmetric (2r+1)-point periodic stencil with a plain
// interior loop; only the first and last r nodes pay for index wrapping.
template <int R, bool Antisym, typename Coef>
void periodic_stencil(const std::vector<double>& v, double scale, const Coef& c,
                      double center, std::vector<double>& out) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(v.size());
  out.resize(v.size());
  auto combine = [&](std::ptrdiff_t i, auto&& at) {
    double s = center * at(i);
    for (int k = 1; k <= R; ++k)
      s += c[k - 1] * (Antisym ? (at(i + k) - at(i - k)) : (at(i + k) + at(i - k)));
    return s * scale;
  };
  auto wrapped = [&](std::ptrdiff_t i) { return v[wrap(i, n)]; };
  auto direct = [&](std::ptrdiff_t i) { return v[static_cast<std::size_t>(i)]; };
  const std::ptrdiff_t lo = std::min<std::ptrdiff_t>(R, n);
  const std::ptrdiff_t hi = std::max<std::ptrdiff_t>(n - R, lo);
  for (std::ptrdiff_t i = 0; i < lo; ++i) out[static_cast<std::size_t>(i)] = combine(i, wrapped);
  for (std::ptrdiff_t i = lo; i < hi; ++i) out[static_cast<std::size_t>(i)] = combine(i, direct);
  for (std::ptrdiff_t i = hi; i < n; ++i) out[static_cast<std::size_t>(i)] = combine(i, wrapped);
}
}  // namespace detail

// Periodic central first derivative, order 2, 4 or 6.
inline void diff1_into(const std::vector<double>& v, double dx, int order,
                       std::vector<double>& out) {
  switch (order) {
    case 2: {
      const double c[] = {1.0};
      detail::periodic_stencil<1, true>(v, 1.0 / (2.0 * dx), c, 0.0, out);
      break;
    }
    case 4: {
      const double c[] = {8.0, -1.0};
      detail::periodic_stencil<2, true>(v, 1.0 / (12.0 * dx), c, 0.0, out);
      break;
    }
    case 6: {
      const double c[] = {45.0, -9.0, 1.0};
      detail::periodic_stencil<3, true>(v, 1.0 / (60.0 * dx), c, 0.0, out);
      break;
    }
    default:
      throw std::invalid_argument("diff1: order must be 2, 4 or 6");
  }
}

// Periodic central second derivative, order 2, 4 or 6.
inline void diff2_into(const std::vector<double>& v, double dx, int order,
                       std::vector<double>& out) {
  const double dx2 = dx * dx;
  switch (order) {
    case 2: {
      const double c[] = {1.0};
      detail::periodic_stencil<1, false>(v, 1.0 / dx2, c, -2.0, out);
      break;
    }
    case 4: {
      const double c[] = {16.0, -1.0};
      detail::periodic_stencil<2, false>(v, 1.0 / (12.0 * dx2), c, -30.0, out);
      break;
    }
    case 6: {
      const double c[] = {270.0, -27.0, 2.0};
      detail::periodic_stencil<3, false>(v, 1.0 / (180.0 * dx2), c, -490.0, out);
      break;
    }
    default:
      throw std::invalid_argument("diff2: order must be 2, 4 or 6");
  }
}

inline std::vector<double> diff1(const std::vector<double>& v, double dx, int order = 4) {
  std::vector<double> out;
  diff1_into(v, dx, order, out);
  return out;
}

inline std::vector<double> diff2(const std::vector<double>& v, double dx, int order = 4) {
  std::vector<double> out;
  diff2_into(v, dx, order, out);
  return out;
}

// Trapezoid rule over the full period; on periodic data this equals
// dx * sum and is spectrally accurate for smooth integrands.
inline double periodic_trapezoid(const std::vector<double>& f, double dx) {
  double s = 0.0;
  for (double fi : f) s += fi;
  return s * dx;
}

}  // namespace curveflow
