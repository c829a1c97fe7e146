#pragma once

// Back and forth between curvature data and plane curves in the
// tangent-angle gauge, where ds = dx / k is exact, plus the translational
// soliton Gamma_0 (the Grim Reaper when alpha = 1).

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "curveflow/core.hpp"
#include "curveflow/profiles.hpp"

namespace curveflow {

struct PlaneCurve {
  std::vector<std::array<double, 2>> points;
  std::vector<double> tangent_angles;
  std::vector<double> curvatures;
  double closed_gap = std::numeric_limits<double>::quiet_NaN();
  int rotation_index = 0;  // m for closed reconstructions, 0 for open curves
};

// Position by cumulative trapezoid of (cos x, sin x)/k over [-m*pi, m*pi];
// the gap between the endpoints equals the modulus of the closure moment.
inline PlaneCurve reconstruct_curve(const PeriodicProfile& k) {
  const int n = k.size();
  const double dx = k.dx();
  PlaneCurve curve;
  curve.rotation_index = k.m;
  curve.points.resize(static_cast<std::size_t>(n + 1));
  curve.tangent_angles.resize(static_cast<std::size_t>(n + 1));
  curve.curvatures.resize(static_cast<std::size_t>(n + 1));
  double px = 0.0, py = 0.0;
  double fx_prev = 0.0, fy_prev = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = -k.m * kPi + i * dx;
    const double ki = k[i];  // wraps at i = n
    const double fx = std::cos(x) / ki, fy = std::sin(x) / ki;
    if (i > 0) {
      px += 0.5 * dx * (fx_prev + fx);
      py += 0.5 * dx * (fy_prev + fy);
    }
    curve.points[static_cast<std::size_t>(i)] = {px, py};
    curve.tangent_angles[static_cast<std::size_t>(i)] = x;
    curve.curvatures[static_cast<std::size_t>(i)] = ki;
    fx_prev = fx;
    fy_prev = fy;
  }
  const auto& first = curve.points.front();
  const auto& last = curve.points.back();
  curve.closed_gap = std::hypot(last[0] - first[0], last[1] - first[1]);
  return curve;
}

inline PeriodicProfile curvature_from_v(const PeriodicProfile& v, double alpha) {
  return v.map([&](double s) { return std::pow(s, 1.0 / alpha); });
}

// Exact point of the soliton at tangent angle x: the ordinate is in closed
// form, the abscissa is int_0^x (cos t)^{1 - 1/alpha} dt (equal to x when
// alpha = 1, by quadrature otherwise).
inline std::array<double, 2> soliton_point(double alpha, double x) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("soliton_point: alpha in (0,1]");
  if (!(std::fabs(x) < 0.5 * kPi)) throw std::domain_error("soliton_point: |x| must be < pi/2");
  double ordinate;
  if (alpha == 1.0)
    ordinate = -std::log(std::cos(x));
  else
    ordinate = alpha / (alpha - 1.0) * (1.0 - std::pow(std::cos(x), 1.0 - 1.0 / alpha));
  double abscissa;
  if (alpha == 1.0) {
    abscissa = x;
  } else {
    const auto& gl = gauss_legendre_256();
    abscissa = gl.integrate(
        [&](double t) { return std::pow(std::cos(t), 1.0 - 1.0 / alpha); }, 0.0, x);
  }
  return {abscissa, ordinate};
}

// The translational soliton Gamma_0 sampled at n+1 tangent angles in
// [-(pi/2 - eps), pi/2 - eps]. It runs off to infinity as x -> +-pi/2;
// the truncation parameter keeps the table finite.
inline PlaneCurve soliton_curve(double alpha, double eps = 1e-3, int n = 2048) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("soliton_curve: alpha in (0,1]");
  if (!(eps > 0.0 && eps < 0.5 * kPi)) throw std::invalid_argument("soliton_curve: bad truncation");
  if (n < 16 || n % 2 != 0) throw std::invalid_argument("soliton_curve: n must be even and >= 16");
  const double X = 0.5 * kPi - eps;
  PlaneCurve curve;
  curve.rotation_index = 0;
  curve.points.resize(static_cast<std::size_t>(n + 1));
  curve.tangent_angles.resize(static_cast<std::size_t>(n + 1));
  curve.curvatures.resize(static_cast<std::size_t>(n + 1));

  const auto& gl = gauss_legendre_256();
  const double h = 2.0 * X / n;
  // abscissae accumulated outward from 0 so the vertex lands exactly at the origin
  std::vector<double> xs(static_cast<std::size_t>(n + 1), 0.0);
  if (alpha == 1.0) {
    for (int j = 0; j <= n; ++j) xs[static_cast<std::size_t>(j)] = -X + j * h;
  } else {
    auto speed = [&](double t) { return std::pow(std::cos(t), 1.0 - 1.0 / alpha); };
    for (int j = n / 2 + 1; j <= n; ++j)
      xs[static_cast<std::size_t>(j)] =
          xs[static_cast<std::size_t>(j - 1)] +
          gl.integrate(speed, -X + (j - 1) * h, -X + j * h);
    for (int j = n / 2 - 1; j >= 0; --j)
      xs[static_cast<std::size_t>(j)] =
          xs[static_cast<std::size_t>(j + 1)] -
          gl.integrate(speed, -X + j * h, -X + (j + 1) * h);
  }
  for (int j = 0; j <= n; ++j) {
    const double x = -X + j * h;
    double y;
    if (alpha == 1.0)
      y = -std::log(std::cos(x));
    else
      y = alpha / (alpha - 1.0) * (1.0 - std::pow(std::cos(x), 1.0 - 1.0 / alpha));
    curve.points[static_cast<std::size_t>(j)] = {xs[static_cast<std::size_t>(j)], y};
    curve.tangent_angles[static_cast<std::size_t>(j)] = x;
    curve.curvatures[static_cast<std::size_t>(j)] = std::pow(std::cos(x), 1.0 / alpha);
  }
  return curve;
}

struct NormalizeResult {
  PlaneCurve curve;
  bool unique_max = true;  // false when the maximal-curvature sample was ambiguous
};

// Translate the maximal-curvature point to the origin, rotate its tangent
// to (1,0) and dilate so the maximal curvature becomes 1.
inline NormalizeResult normalize_curve(const PlaneCurve& c, double tie_tol = 1e-12) {
  if (c.points.empty() || c.points.size() != c.curvatures.size() ||
      c.points.size() != c.tangent_angles.size())
    throw std::invalid_argument("normalize_curve: malformed curve");
  std::size_t imax = 0;
  double kmax = c.curvatures[0];
  for (std::size_t i = 1; i < c.curvatures.size(); ++i)
    if (c.curvatures[i] > kmax) {
      kmax = c.curvatures[i];
      imax = i;
    }
  NormalizeResult result;
  int ties = 0;
  for (std::size_t i = 0; i < c.curvatures.size(); ++i)
    if (i != imax && c.curvatures[i] >= kmax * (1.0 - tie_tol)) ++ties;
  // the closing duplicate of a closed curve repeats the first sample
  if (ties > (c.rotation_index > 0 ? 1 : 0)) result.unique_max = false;

  const double theta = c.tangent_angles[imax];
  const double ct = std::cos(theta), st = std::sin(theta);
  const auto origin = c.points[imax];
  PlaneCurve out;
  out.rotation_index = c.rotation_index;
  out.points.resize(c.points.size());
  out.tangent_angles.resize(c.points.size());
  out.curvatures.resize(c.points.size());
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    const double dx = c.points[i][0] - origin[0];
    const double dy = c.points[i][1] - origin[1];
    out.points[i] = {kmax * (ct * dx + st * dy), kmax * (-st * dx + ct * dy)};
    out.tangent_angles[i] = c.tangent_angles[i] - theta;
    out.curvatures[i] = c.curvatures[i] / kmax;
  }
  out.closed_gap = c.closed_gap * kmax;
  result.curve = out;
  return result;
}

}  // namespace curveflow
