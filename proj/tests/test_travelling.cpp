#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "curveflow/travelling.hpp"

using namespace curveflow;

TEST_CASE("wave_field: equilibrium, direct substitution, ray cancellation") {
  const auto f0 = wave_field(1.0, 0.0, 3.0, 0.1);
  CHECK(f0[0] == 0.0);
  CHECK(f0[1] == Catch::Approx(0.0).margin(1e-15));

  // (H,G) = (0.5, 0), p = 3, c = 0.1: (-p/4 + p/2)/H = (0.75)/0.5
  const auto f1 = wave_field(0.5, 0.0, 3.0, 0.1);
  CHECK(f1[0] == 0.0);
  CHECK(f1[1] == Catch::Approx(1.5));

  // along G = (p/c) H the linear terms cancel and dG/dxi -> 0 with H
  const double p = 3.0, c = 0.4;
  const auto g1 = wave_field(1e-4, (p / c) * 1e-4, p, c);
  const auto g2 = wave_field(1e-6, (p / c) * 1e-6, p, c);
  CHECK(std::fabs(g2[1]) < std::fabs(g1[1]) / 50.0);

  CHECK_THROWS_AS(wave_field(-1.0, 0.0, 3.0, 0.1), std::domain_error);
}

TEST_CASE("equilibria and eigenvalues match the closed forms") {
  const auto eq = equilibria_and_eigenvalues(3.0, 0.1);

  // origin: {0, -c}
  CHECK(eq[0].lambda1 == std::complex<double>(0.0, 0.0));
  CHECK(eq[0].lambda2.real() == Catch::Approx(-0.1));

  // (1,0): (-c +- sqrt(c^2 - 4p))/2 = -0.05 +- 1.7313...i
  CHECK(eq[1].H == 1.0);
  CHECK(eq[1].lambda1.real() == Catch::Approx(-0.05).epsilon(1e-14));
  CHECK(eq[1].lambda1.imag() == Catch::Approx(std::sqrt(12.0 - 0.01) / 2.0).epsilon(1e-14));
  CHECK(eq[1].lambda2.imag() == Catch::Approx(-std::sqrt(12.0 - 0.01) / 2.0).epsilon(1e-14));

  // (0, pc/(p-1)): {pc/(p-1), c}; at p = 3, c = 0.2 the point is (0, 0.3)
  const auto eq2 = equilibria_and_eigenvalues(3.0, 0.2);
  CHECK(eq2[2].G == Catch::Approx(0.3));
  CHECK(eq2[2].lambda1.real() == Catch::Approx(0.3));
  CHECK(eq2[2].lambda2.real() == Catch::Approx(0.2));
}

TEST_CASE("WaveParams validation") {
  CHECK_THROWS_AS(WaveParams{3.0, 4.0, 1e-6, 100.0}.validate(), std::invalid_argument);
  CHECK_THROWS_AS(WaveParams{3.0, 0.5, 1e-3, 100.0}.validate(), std::invalid_argument);
  CHECK_THROWS_AS(WaveParams{1.5, 0.5, 1e-6, 100.0}.validate(), std::invalid_argument);
  CHECK_NOTHROW(WaveParams{3.0, 0.5, 1e-6, 100.0}.validate());
}

TEST_CASE("shoot_unstable lands above the equilibrium and obeys the tail laws") {
  const WaveParams params{3.0, 0.5, 1e-6, 200.0};
  const auto traj = shoot_unstable(params);

  CHECK(traj.h_c > 1.0);
  CHECK(traj.U0 == Catch::Approx(std::pow(traj.h_c, 1.0 / 3.0)));
  CHECK(traj.U0 > 1.0);
  CHECK(std::isfinite(traj.U0));

  SECTION("G stays strictly positive before the crossing") {
    for (std::size_t i = 0; i + 1 < traj.G.size(); ++i) CHECK(traj.G[i] > 0.0);
  }

  SECTION("seed-slope consistency at the ten smallest-H samples") {
    for (std::size_t i = 0; i < 10; ++i)
      CHECK(std::fabs(traj.G[i] / traj.H[i] - 3.0 / 0.5) < 0.01 * (3.0 / 0.5));
  }

  SECTION("Lyapunov energy is non-increasing along the stored arc") {
    double prev = wave_energy(traj.H[0], traj.G[0], 3.0);
    for (std::size_t i = 1; i + 1 < traj.H.size(); ++i) {
      const double E = wave_energy(traj.H[i], traj.G[i], 3.0);
      CHECK(E <= prev + 1e-10 * (1.0 + std::fabs(prev)));
      prev = E;
    }
  }

  SECTION("profile table: crossing at xi = 0, tail slopes 1/c") {
    const auto table = uc_profile(traj, 3.0);
    CHECK(table.xi.back() == Catch::Approx(0.0).margin(1e-12));
    CHECK(std::fabs(table.Uprime.back()) < 1e-10);

    // far tail: U'/U -> 1/c within 1%
    for (std::size_t i = 0; i < 10; ++i)
      CHECK(table.Uprime[i] / table.U[i] == Catch::Approx(2.0).epsilon(0.01));

    // second-order tail: U''/U' -> 1/c within 2%, after the orbit has
    // settled onto the manifold (H ~ 100 eps0) but still far out
    bool checked = false;
    for (std::size_t i = 0; i < traj.H.size(); ++i) {
      if (traj.H[i] < 1e-4 || traj.H[i] > 1e-3) continue;
      const double U = table.U[i], Up = table.Uprime[i];
      const double Upp = (U - std::pow(U, 4.0) - 0.5 * Up) / std::pow(U, 3.0);
      CHECK(Upp / Up == Catch::Approx(2.0).epsilon(0.02));
      checked = true;
    }
    CHECK(checked);
  }
}

TEST_CASE("shoot_unstable is insensitive to the seed magnitude") {
  const auto a = shoot_unstable(WaveParams{3.0, 0.5, 1e-6, 200.0});
  const auto b = shoot_unstable(WaveParams{3.0, 0.5, 1e-8, 200.0});
  CHECK(std::fabs(a.U0 - b.U0) / a.U0 < 1e-6);
}

TEST_CASE("U0 grows strictly as c decreases, without visible bound") {
  const double u05 = shoot_unstable(WaveParams{3.0, 0.5, 1e-6, 200.0}).U0;
  const double u03 = shoot_unstable(WaveParams{3.0, 0.3, 1e-6, 200.0}).U0;
  const double u01 = shoot_unstable(WaveParams{3.0, 0.1, 1e-6, 200.0}).U0;
  CHECK(u05 < u03);
  CHECK(u03 < u01);
  // divergence as c drops: U0 at least doubles from c = 0.5 to c = 0.05
  const double u005 = shoot_unstable(WaveParams{3.0, 0.05, 1e-6, 200.0}).U0;
  CHECK(u005 > 2.0 * u05);
}

TEST_CASE("horizon exhaustion is reported") {
  CHECK_THROWS_WITH(shoot_unstable(WaveParams{3.0, 0.5, 1e-6, 0.5}),
                    Catch::Matchers::ContainsSubstring("horizon"));
}

TEST_CASE("c = 0 orbits close with conserved energy") {
  const auto ret = closed_orbit_return(3.0, 1.5);
  CHECK(std::fabs(ret.H_return - std::pow(1.5, 3.0)) / std::pow(1.5, 3.0) < 1e-7);
  CHECK(ret.energy_drift < 1e-8);
  CHECK(ret.period > 0.0);
}

TEST_CASE("c_for_level clears the requested level") {
  const double c2 = c_for_level(3.0, 2.0);
  const auto shot = shoot_unstable(WaveParams{3.0, c2, 1e-6, 400.0});
  CHECK(shot.U0 > 2.0);
  const auto table = uc_profile(shot, 3.0);
  double min_slope = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < table.U.size(); ++i)
    if (table.U[i] >= 0.5 && table.U[i] <= 2.0) min_slope = std::min(min_slope, table.Uprime[i]);
  CHECK(min_slope > 2.0);

  SECTION("monotone consistency in the level") {
    const double c4 = c_for_level(3.0, 4.0);
    CHECK(c4 <= c2);
  }

  SECTION("an already-clearing endpoint is returned unchanged") {
    CHECK(c_for_level(3.0, 2.0, c2) == c2);
  }
}
