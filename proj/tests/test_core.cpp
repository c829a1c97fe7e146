#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "curveflow/core.hpp"

using namespace curveflow;

namespace {

PeriodicProfile from_density(int m, int n, double p, double (*density)(double)) {
  // build v with v^{1-p} = density
  std::vector<double> v(static_cast<std::size_t>(n));
  const double dx = grid_spacing(m, n);
  for (int i = 0; i < n; ++i)
    v[static_cast<std::size_t>(i)] = std::pow(density(-m * kPi + i * dx), 1.0 / (1.0 - p));
  return PeriodicProfile(m, std::move(v));
}

PeriodicProfile random_profile(int m, int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> coef(-0.4, 0.4);
  const double a1 = coef(rng), b1 = coef(rng), a2 = coef(rng), a3 = coef(rng);
  std::vector<double> v(static_cast<std::size_t>(n));
  const double dx = grid_spacing(m, n);
  for (int i = 0; i < n; ++i) {
    const double x = -m * kPi + i * dx;
    v[static_cast<std::size_t>(i)] =
        std::exp(a1 * std::cos(x) + b1 * std::sin(x) + a2 * std::cos(2 * x) +
                 a3 * std::sin(3 * x / m));
  }
  return PeriodicProfile(m, std::move(v));
}

}  // namespace

TEST_CASE("make_grid produces the uniform partition of [-m*pi, m*pi)") {
  const auto g1 = make_grid(1, 4);
  REQUIRE(g1.size() == 4);
  CHECK(g1[0] == Catch::Approx(-kPi));
  CHECK(g1[1] == Catch::Approx(-kPi / 2));
  CHECK(g1[2] == Catch::Approx(0.0).margin(1e-15));
  CHECK(g1[3] == Catch::Approx(kPi / 2));

  const auto g2 = make_grid(2, 8);
  CHECK(g2[0] == Catch::Approx(-2 * kPi));
  CHECK(g2[1] - g2[0] == Catch::Approx(kPi / 2));

  const auto g3 = make_grid(3, 16);
  CHECK(g3[1] - g3[0] == Catch::Approx(3 * kPi / 8));

  CHECK_THROWS_AS(make_grid(1, 5), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(1, 2), std::invalid_argument);
}

TEST_CASE("closure moment of constants vanishes to quadrature accuracy") {
  for (int m : {1, 2, 3}) {
    const PeriodicProfile v(m, std::vector<double>(256, 1.7));
    const auto mom = closure_moment(v, 2.5);
    CHECK(std::fabs(mom.re) < 1e-12);
    CHECK(std::fabs(mom.im) < 1e-12);
  }
}

TEST_CASE("closure moment picks out the cos-x component of the density") {
  // v^{1-p} = 2 + cos x on S_2^1, p = 2: moment = (2*pi, 0)
  const auto v1 = from_density(2, 256, 2.0, [](double x) { return 2.0 + std::cos(x); });
  const auto m1 = closure_moment(v1, 2.0);
  CHECK(m1.re == Catch::Approx(2 * kPi).epsilon(1e-12));
  CHECK(std::fabs(m1.im) < 1e-12);

  // v^{1-p} = 1 + cos(x)/2 on S_1^1, p = 3: moment = (pi/2, 0)
  const auto v2 = from_density(1, 256, 3.0, [](double x) { return 1.0 + 0.5 * std::cos(x); });
  const auto m2 = closure_moment(v2, 3.0);
  CHECK(m2.re == Catch::Approx(kPi / 2).epsilon(1e-12));
  CHECK(std::fabs(m2.im) < 1e-12);
}

TEST_CASE("closure moment rejects non-positive samples") {
  PeriodicProfile v(1, std::vector<double>(32, 1.0));
  v.values[3] = -1.0;  // corrupt after construction
  CHECK_THROWS_AS(closure_moment(v, 2.0), std::domain_error);
}

TEST_CASE("project_closure fixes constants and removes the sole harmonic") {
  const PeriodicProfile ones(1, std::vector<double>(64, 1.0));
  const auto r0 = project_closure(ones, 2.0);
  CHECK(sup_norm_distance(r0.profile, ones) < 1e-14);

  // density 2 + cos x -> 2, so v = 1/2 everywhere (p = 2)
  const auto v1 = from_density(1, 128, 2.0, [](double x) { return 2.0 + std::cos(x); });
  const auto r1 = project_closure(v1, 2.0);
  for (double w : r1.profile.values) CHECK(w == Catch::Approx(0.5).epsilon(1e-12));

  // density 1 + 0.9 cos x -> 1, so v = 1 (projection of the sole harmonic)
  const auto v2 = from_density(1, 128, 2.0, [](double x) { return 1.0 + 0.9 * std::cos(x); });
  const auto r2 = project_closure(v2, 2.0);
  for (double w : r2.profile.values) CHECK(w == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("project_closure fails when the projected density loses positivity") {
  // density concentrated near x = 0; removing its cos component drives the
  // flank negative
  const auto v = from_density(1, 256, 2.0,
                              [](double x) { return 0.01 + std::exp(-20.0 * std::sin(0.5 * x) * std::sin(0.5 * x)); });
  CHECK_THROWS_WITH(project_closure(v, 2.0),
                    Catch::Matchers::ContainsSubstring("non-positive density"));
}

TEST_CASE("project_closure is idempotent and lands under the tolerance") {
  for (unsigned seed : {11u, 12u, 13u, 14u, 15u}) {
    const int m = 1 + static_cast<int>(seed % 3);
    const auto v = random_profile(m, 256, seed);
    const auto once = project_closure(v, 2.5);
    CHECK(once.residual.modulus() < 1e-7);
    const auto twice = project_closure(once.profile, 2.5);
    CHECK(sup_norm_distance(once.profile, twice.profile) < 1e-12);
  }
}

TEST_CASE("projection warns when it breaks the symmetric class") {
  // even, decreasing data whose projected density stays positive but whose
  // monotonicity on (0, m*pi) may be disturbed
  const int n = 256, m = 2;
  std::vector<double> vals(static_cast<std::size_t>(n));
  const double dx = grid_spacing(m, n);
  for (int i = 0; i < n; ++i) {
    const double x = -m * kPi + i * dx;
    vals[static_cast<std::size_t>(i)] = 1.5 + std::cos(x / m);
  }
  const PeriodicProfile bell(m, std::move(vals));
  REQUIRE(is_symmetric_decreasing(bell));
  const auto r = project_closure(bell, 2.0);
  // whether or not the class survives, the flag must agree with the data
  CHECK(r.symmetry_warning == !is_symmetric_decreasing(r.profile));
}

TEST_CASE("sup_norm_distance") {
  const auto v = random_profile(1, 64, 7u);
  CHECK(sup_norm_distance(v, v) == 0.0);

  PeriodicProfile a(1, std::vector<double>(64, 1.0));
  PeriodicProfile b = a;
  b.values[10] += 1e-3;
  CHECK(sup_norm_distance(a, b) == Catch::Approx(1e-3));

  // shifted cosine: max |cos x - cos(x - s)| = 2 sin(s/2) max |sin(x - s/2)|
  const int n = 64;
  const double s = 0.3;
  std::vector<double> c1(n), c2(n);
  double expect = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = -kPi + i * 2 * kPi / n;
    c1[static_cast<std::size_t>(i)] = 2.0 + std::cos(x);
    c2[static_cast<std::size_t>(i)] = 2.0 + std::cos(x - s);
    expect = std::max(expect, 2.0 * std::sin(s / 2) * std::fabs(std::sin(x - s / 2)));
  }
  CHECK(sup_norm_distance(PeriodicProfile(1, c1), PeriodicProfile(1, c2)) ==
        Catch::Approx(expect).epsilon(1e-12));

  const PeriodicProfile other(2, std::vector<double>(64, 1.0));
  CHECK_THROWS_AS(sup_norm_distance(a, other), std::invalid_argument);
}

TEST_CASE("FlowParams validation") {
  FlowParams params(3.0, 2, 256);
  CHECK(params.alpha == Catch::Approx(0.5));
  CHECK_NOTHROW(params.validate());

  FlowParams bad = params;
  bad.n_grid = 15;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = params;
  bad.cfl = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = params;
  bad.v_cap = 0.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = params;
  bad.alpha = 0.7;  // inconsistent with p = 3
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("PeriodicProfile rejects non-positive data") {
  std::vector<double> vals(32, 1.0);
  vals[5] = 0.0;
  CHECK_THROWS_AS(PeriodicProfile(1, vals), std::domain_error);
}
