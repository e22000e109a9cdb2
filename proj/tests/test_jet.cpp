#include <doctest.h>

#include <cmath>
#include <random>

#include "satctl/jet.hpp"

using satctl::Jet;

namespace {

// Asserts slot-wise equality within an absolute/relative mix.
void check_slots(const Jet& j, const std::vector<double>& want, double tol = 1e-12) {
  REQUIRE(j.order() + 1 == static_cast<int>(want.size()));
  for (int k = 0; k <= j.order(); ++k) {
    CAPTURE(k);
    CHECK(j[k] == doctest::Approx(want[static_cast<size_t>(k)]).epsilon(tol).scale(1.0));
  }
}

Jet random_jet(std::mt19937_64& rng, int order, double lo = -2.0, double hi = 2.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Jet j(order);
  for (int k = 0; k <= order; ++k) j[k] = d(rng);
  return j;
}

}  // namespace

TEST_CASE("jet construction and accessors") {
  Jet t = Jet::time(1.0, 3);
  CHECK(t.order() == 3);
  CHECK(t.value() == 1.0);
  CHECK(t[1] == 1.0);
  CHECK(t[2] == 0.0);

  Jet c = Jet::constant(4.5, 2);
  CHECK(c[0] == 4.5);
  CHECK(c[1] == 0.0);

  CHECK(Jet().order() == 0);
}

TEST_CASE("squaring the clock: derivatives of t^2 at t=1") {
  Jet t = Jet::time(1.0, 3);
  check_slots(t * t, {1.0, 2.0, 2.0, 0.0});
}

TEST_CASE("quotient recursion: 1/(1+t) at t=0") {
  Jet one = Jet::constant(1.0, 3);
  Jet denom = Jet::time(0.0, 3) + 1.0;
  check_slots(one / denom, {1.0, -1.0, 2.0, -6.0});
}

TEST_CASE("integer power of a constant jet") {
  Jet half = Jet::constant(0.5, 3);
  check_slots(pow_int(half, 2), {0.25, 0.0, 0.0, 0.0});
}

TEST_CASE("trig jets of the bare clock at t=0") {
  Jet t = Jet::time(0.0, 3);
  check_slots(sin(t), {0.0, 1.0, 0.0, -1.0});
  check_slots(cos(t), {1.0, 0.0, -1.0, 0.0});
}

TEST_CASE("sin of an affine signal pi/6 + 2t") {
  Jet a(3);
  a[0] = M_PI / 6.0;
  a[1] = 2.0;
  check_slots(sin(a), {0.5, 1.7320508075688772, -2.0, -6.928203230275509});
  check_slots(cos(a), {0.8660254037844386, -1.0, -3.4641016151377544, 4.0}, 1e-11);
}

TEST_CASE("product jets: (1+t)^2 * sin(t) at t=0.3") {
  Jet t = Jet::time(0.3, 4);
  Jet val = pow_int(t + 1.0, 2) * sin(t);
  check_slots(val, {0.4994291492576639, 2.382871203941757, 5.0593610075181665,
                    1.8124426561729132, -12.982312817584713},
              1e-11);
}

TEST_CASE("sqrt jet: sqrt(1 + sin(t)/2) at t=0.7") {
  Jet t = Jet::time(0.7, 3);
  Jet val = sqrt(sin(t) * 0.5 + 1.0);
  check_slots(val, {1.1498299194310633, 0.16629463504979347, -0.1641184702770126,
                    -0.09508752695901523},
              1e-11);
}

TEST_CASE("order mismatch is a configuration error") {
  Jet a(2), b(3);
  CHECK_THROWS_AS(a + b, satctl::ConfigError);
  CHECK_THROWS_AS(a * b, satctl::ConfigError);
  CHECK_THROWS_AS(a / b, satctl::ConfigError);
}

TEST_CASE("division by a near-zero leading slot is a numerical error") {
  Jet a = Jet::constant(1.0, 2);
  Jet b = Jet::constant(1e-12, 2);
  CHECK_THROWS_AS(a / b, satctl::NumericalError);
}

TEST_CASE("derivative shift and truncation") {
  Jet t = Jet::time(0.3, 4);
  Jet s = sin(t);
  Jet sd = s.derivative();
  CHECK(sd.order() == 3);
  for (int k = 0; k <= 3; ++k) CHECK(sd[k] == s[k + 1]);

  Jet st = s.truncated(2);
  CHECK(st.order() == 2);
  for (int k = 0; k <= 2; ++k) CHECK(st[k] == s[k]);

  CHECK_THROWS_AS(Jet(0).derivative(), satctl::ConfigError);
  CHECK_THROWS_AS(s.truncated(5), satctl::ConfigError);
}

TEST_CASE("jet slots agree with central differences of the closed form") {
  // signal s(tau) = (1+tau)^2 sin(tau); its jet at tau comes from jet
  // arithmetic, the finite difference from the closed form itself.
  auto closed = [](double tau) { return (1.0 + tau) * (1.0 + tau) * std::sin(tau); };
  const double h = 1e-4;
  for (double tau : {0.0, 0.3, 1.2, 4.9}) {
    Jet t = Jet::time(tau, 2);
    Jet s = pow_int(t + 1.0, 2) * sin(t);
    const double fd1 = (closed(tau + h) - closed(tau - h)) / (2.0 * h);
    const double fd2 = (closed(tau + h) - 2.0 * closed(tau) + closed(tau - h)) / (h * h);
    CHECK(std::abs(s[1] - fd1) <= 1e-5 * std::max(1e-6, std::abs(fd1)));
    CHECK(std::abs(s[2] - fd2) <= 1e-4 * std::max(1e-2, std::abs(fd2)));
  }
}

TEST_CASE("multiplication is commutative and associative to machine precision") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    Jet a = random_jet(rng, 4), b = random_jet(rng, 4), c = random_jet(rng, 4);
    Jet ab = a * b, ba = b * a;
    for (int k = 0; k <= 4; ++k)
      CHECK(ab[k] == doctest::Approx(ba[k]).epsilon(1e-12).scale(1.0));
    Jet left = (a * b) * c, right = a * (b * c);
    for (int k = 0; k <= 4; ++k)
      CHECK(left[k] == doctest::Approx(right[k]).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("div undoes mul when the divisor is well conditioned") {
  // The quotient recursion divides by b[0] once per slot, so its roundoff
  // scales like (max_k |b_k| / |b_0|)^order; keep that ratio bounded and the
  // round trip is exact to 1e-12.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> mag(0.5, 2.0);
  std::bernoulli_distribution flip(0.5);
  for (int trial = 0; trial < 200; ++trial) {
    Jet a = random_jet(rng, 4);
    Jet b = random_jet(rng, 4);
    b[0] = (flip(rng) ? 1.0 : -1.0) * mag(rng);
    Jet back = (a * b) / b;
    for (int k = 0; k <= 4; ++k)
      CHECK(back[k] == doctest::Approx(a[k]).epsilon(1e-12).scale(1.0));
  }
  // small leading slot stays fine as long as the rest of b scales with it
  for (int trial = 0; trial < 50; ++trial) {
    Jet a = random_jet(rng, 4);
    Jet b = random_jet(rng, 4);
    b[0] = (flip(rng) ? 1.0 : -1.0) * 2.0;
    for (int k = 0; k <= 4; ++k) b[k] *= 1e-3;
    Jet back = (a * b) / b;
    for (int k = 0; k <= 4; ++k)
      CHECK(back[k] == doctest::Approx(a[k]).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("scalar broadcasting matches constant-jet arithmetic") {
  std::mt19937_64 rng(3);
  Jet a = random_jet(rng, 3);
  Jet c = Jet::constant(1.7, 3);
  Jet lhs = a * 1.7, rhs = a * c;
  for (int k = 0; k <= 3; ++k) CHECK(lhs[k] == doctest::Approx(rhs[k]));
  lhs = a + 1.7;
  rhs = a + c;
  for (int k = 0; k <= 3; ++k) CHECK(lhs[k] == rhs[k]);
  lhs = 1.7 / a;
  rhs = c / a;
  for (int k = 0; k <= 3; ++k) CHECK(lhs[k] == rhs[k]);
}
