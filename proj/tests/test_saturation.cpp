#include <doctest.h>

#include <cmath>
#include <random>

#include "satctl/saturation.hpp"

using satctl::ConfinementCertificate;
using satctl::Jet;
using satctl::SaturationParams;

namespace {
SaturationParams sec4() { return SaturationParams{100.0, 0.1, 2, -0.5, 0.75}; }

// One classical RK4 step of the scalar saturation ODE under constant command.
double rk4_sat(double u, double u_c, double h, const SaturationParams& p) {
  const double k1 = satctl::saturation_rhs(u, u_c, p);
  const double k2 = satctl::saturation_rhs(u + 0.5 * h * k1, u_c, p);
  const double k3 = satctl::saturation_rhs(u + 0.5 * h * k2, u_c, p);
  const double k4 = satctl::saturation_rhs(u + h * k3, u_c, p);
  return u + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}
}  // namespace

TEST_CASE("effective gain at the center and the rails") {
  const auto p = sec4();
  CHECK(satctl::effective_gain(0.0, p) == doctest::Approx(100.0));
  CHECK(satctl::effective_gain(0.75, p) == doctest::Approx(0.0).scale(1.0));
  CHECK(satctl::effective_gain(-0.5, p) == doctest::Approx(0.0).scale(1.0));
  CHECK(satctl::effective_gain(0.5, p) == doctest::Approx(100.0 * (1.0 - 4.0 / 9.0)));
  CHECK(satctl::effective_gain(0.375, p) == doctest::Approx(75.0));
  CHECK(satctl::effective_gain(-0.25, p) == doctest::Approx(75.0));
}

TEST_CASE("gain is positive strictly inside the rails") {
  const auto p = sec4();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(p.u_min + 1e-9, p.u_max - 1e-9);
  for (int i = 0; i < 2000; ++i) CHECK(satctl::effective_gain(d(rng), p) > 0.0);
}

TEST_CASE("gain outside the rails is a domain error") {
  const auto p = sec4();
  CHECK_THROWS_AS(satctl::effective_gain(0.76, p), satctl::NumericalError);
  CHECK_THROWS_AS(satctl::effective_gain(-0.51, p), satctl::NumericalError);
}

TEST_CASE("gain bracket extends the gain smoothly past the rails") {
  const auto p = sec4();
  // Inside the rails the bracket and the gain agree exactly.
  for (double u : {-0.49, -0.25, 0.0, 0.3, 0.7}) {
    CHECK(satctl::gain_bracket(u, p) == satctl::effective_gain(u, p));
  }
  // It vanishes on the rails and turns negative beyond them.
  CHECK(satctl::gain_bracket(p.u_max, p) == doctest::Approx(0.0).scale(1.0));
  CHECK(satctl::gain_bracket(p.u_min, p) == doctest::Approx(0.0).scale(1.0));
  CHECK(satctl::gain_bracket(0.8, p) ==
        doctest::Approx(100.0 * (1.0 - (0.8 / 0.75) * (0.8 / 0.75))));
  CHECK(satctl::gain_bracket(-0.6, p) ==
        doctest::Approx(100.0 * (1.0 - 1.44)));
  // input_rate realizes G(u)uc - p1 p2 u with the extended gain.
  CHECK(satctl::input_rate(0.3, 0.8, p) ==
        doctest::Approx(satctl::saturation_rhs(0.3, 0.8, p)));
  CHECK(satctl::input_rate(0.8, 1.0, p) ==
        doctest::Approx(satctl::gain_bracket(0.8, p) * 1.0 - 100.0 * 0.1 * 0.8));
}

TEST_CASE("saturation rhs spot values") {
  const auto p = sec4();
  CHECK(satctl::saturation_rhs(0.75, 10.0, p) == doctest::Approx(-7.5));
  CHECK(satctl::saturation_rhs(0.0, 1.0, p) == doctest::Approx(100.0));
  CHECK(satctl::saturation_rhs(0.0, 0.3, p) == doctest::Approx(30.0));
  CHECK(satctl::saturation_rhs(-0.25, -1.0, p) == doctest::Approx(-72.5));
  CHECK(satctl::saturation_rhs(0.375, 1.0, p) == doctest::Approx(71.25));
}

TEST_CASE("jet form of the saturation rhs matches the scalar form and its derivative") {
  const auto p = sec4();
  // frozen command, u > 0 branch: udot = G(u)uc - p1p2u, and the slot-1 entry
  // must equal d(udot)/dt = G'(u)udot*uc - p1p2*udot.
  Jet u(2, 0.3);
  Jet uc = Jet::constant(0.8, 2);
  const double udot0 = satctl::saturation_rhs(0.3, 0.8, p);
  u[1] = udot0;
  u[2] = 0.0;
  Jet rhs = satctl::saturation_rhs(u, uc, p);
  CHECK(rhs.value() == satctl::saturation_rhs(0.3, 0.8, p));
  const double gprime = -p.p1 * p.gamma * std::pow(0.3 / p.u_max, p.gamma - 1) / p.u_max;
  CHECK(rhs[1] == doctest::Approx(gprime * udot0 * 0.8 - p.p1 * p.p2 * udot0));
}

TEST_CASE("confinement certificate formula against the frozen oracle") {
  const auto p = sec4();
  ConfinementCertificate c = satctl::invariant_bounds(p, 1.0);
  CHECK(c.u_tilde_max == doctest::Approx(0.72336423325561817).epsilon(1e-12));
  CHECK(c.u_tilde_min == doctest::Approx(-0.48795003647426659).epsilon(1e-12));

  ConfinementCertificate wide = satctl::invariant_bounds(p, 1e9);
  CHECK(wide.u_tilde_max > 0.7499);
  CHECK(wide.u_tilde_max < 0.75);
  CHECK(wide.u_tilde_min < -0.4999);
  CHECK(wide.u_tilde_min > -0.5);

  for (double xi : {0.5, 1.0, 5.0, 20.0}) {
    ConfinementCertificate cc = satctl::invariant_bounds(p, xi);
    CHECK(cc.u_tilde_min > p.u_min);
    CHECK(cc.u_tilde_min < 0.0);
    CHECK(cc.u_tilde_max > 0.0);
    CHECK(cc.u_tilde_max < p.u_max);
  }
}

TEST_CASE("worst-case constant commands stall strictly inside the certificate") {
  const auto p = sec4();
  for (double xi : {1.0, 20.0}) {
    ConfinementCertificate c = satctl::invariant_bounds(p, xi);
    double hi = 0.0, lo = 0.0;
    const double h = 1e-4;
    for (int i = 0; i < 30000; ++i) {  // 3 s, plenty to reach equilibrium
      hi = rk4_sat(hi, xi, h, p);
      lo = rk4_sat(lo, -xi, h, p);
    }
    CHECK(hi <= c.u_tilde_max + 1e-6);
    CHECK(lo >= c.u_tilde_min - 1e-6);
    // the ceiling is genuinely approached: within 2% of the certificate
    CHECK(hi > 0.97 * c.u_tilde_max);
    CHECK(lo < 0.97 * c.u_tilde_min);
  }
}

TEST_CASE("odd symmetry when the rails are symmetric") {
  SaturationParams p{100.0, 0.1, 2, -0.75, 0.75};
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> du(-0.74, 0.74), dc(-5.0, 5.0);
  for (int i = 0; i < 500; ++i) {
    const double u = du(rng), uc = dc(rng);
    CHECK(satctl::saturation_rhs(-u, -uc, p) ==
          doctest::Approx(-satctl::saturation_rhs(u, uc, p)).epsilon(1e-12));
  }
}

TEST_CASE("parameter validation") {
  SaturationParams p = sec4();
  p.gamma = 3;
  CHECK_THROWS_AS(p.validate(), satctl::ConfigError);
  p = sec4();
  p.u_min = 0.0;
  CHECK_THROWS_AS(p.validate(), satctl::ConfigError);
  p = sec4();
  p.p2 = -1.0;
  CHECK_THROWS_AS(p.validate(), satctl::ConfigError);
  CHECK_THROWS_AS(satctl::invariant_bounds(sec4(), 0.0), satctl::ConfigError);
  CHECK_NOTHROW(sec4().validate());
}
