#include <doctest.h>

#include <array>
#include <cmath>

#include "satctl/expr.hpp"

using satctl::Expr;
using satctl::Jet;

TEST_CASE("parse and evaluate polynomials in states") {
  Expr e = Expr::parse("0.1*x1^2 + x2");
  std::array<double, 2> x{3.0, -1.5};
  CHECK(e.eval(x, 0.0) == doctest::Approx(0.1 * 9.0 - 1.5));
  CHECK(e.max_state() == 2);
  CHECK_FALSE(e.uses_time());
}

TEST_CASE("parse trig in time with affine argument") {
  Expr e = Expr::parse("0.2 + 0.3*sin(t)");
  CHECK(e.eval({}, 0.0) == doctest::Approx(0.2));
  CHECK(e.eval({}, M_PI / 2.0) == doctest::Approx(0.5));
  CHECK(e.uses_time());
  CHECK(e.max_state() == 0);
}

TEST_CASE("precedence and unary minus") {
  CHECK(Expr::parse("2+3*4").eval({}, 0.0) == 14.0);
  CHECK(Expr::parse("(2+3)*4").eval({}, 0.0) == 20.0);
  CHECK(Expr::parse("-2^2").eval({}, 0.0) == -4.0);
  CHECK(Expr::parse("2-3-4").eval({}, 0.0) == -5.0);
  CHECK(Expr::parse("12/3/2").eval({}, 0.0) == 2.0);
  CHECK(Expr::parse("-0.5 + 0.4*sin(t)").eval({}, 0.0) == doctest::Approx(-0.5));
}

TEST_CASE("jet evaluation matches double evaluation bit for bit at order 0") {
  Expr e = Expr::parse("0.1*x1*x2 - 0.2*x1 + (1 + x1^2)*cos(t)");
  std::array<double, 2> xd{1.3, -0.7};
  const double want = e.eval(xd, 0.42);

  std::array<Jet, 2> xj{Jet::constant(1.3, 0), Jet::constant(-0.7, 0)};
  Jet got = e.eval(xj, Jet::time(0.42, 0));
  CHECK(got.value() == want);
}

TEST_CASE("jet evaluation carries true time derivatives") {
  // d/dt [0.2 + 0.3 sin t] = 0.3 cos t, etc.
  Expr e = Expr::parse("0.2 + 0.3*sin(t)");
  Jet j = e.eval(std::span<const Jet>{}, Jet::time(0.0, 3));
  CHECK(j[0] == doctest::Approx(0.2));
  CHECK(j[1] == doctest::Approx(0.3));
  CHECK(j[2] == doctest::Approx(0.0).scale(1.0));
  CHECK(j[3] == doctest::Approx(-0.3));
}

TEST_CASE("malformed expressions raise config errors with a position") {
  CHECK_THROWS_AS(Expr::parse("0.1*x1^"), satctl::ConfigError);
  CHECK_THROWS_AS(Expr::parse("sin 0.2"), satctl::ConfigError);
  CHECK_THROWS_AS(Expr::parse("(1+2"), satctl::ConfigError);
  CHECK_THROWS_AS(Expr::parse("1+2)"), satctl::ConfigError);
  CHECK_THROWS_AS(Expr::parse("x0"), satctl::ConfigError);
  CHECK_THROWS_AS(Expr::parse("foo(t)"), satctl::ConfigError);
  CHECK_THROWS_AS(Expr::parse("x1^-2"), satctl::ConfigError);
  CHECK_THROWS_AS(Expr::parse(""), satctl::ConfigError);

  try {
    Expr::parse("1 + @");
  } catch (const satctl::ConfigError& err) {
    CHECK(std::string(err.what()).find("position") != std::string::npos);
  }
}

TEST_CASE("referencing a state beyond the supplied vector is a config error") {
  Expr e = Expr::parse("x3");
  std::array<double, 2> x{1.0, 2.0};
  CHECK_THROWS_AS(e.eval(x, 0.0), satctl::ConfigError);
}

TEST_CASE("scientific-notation literals") {
  CHECK(Expr::parse("1e-3").eval({}, 0.0) == 1e-3);
  CHECK(Expr::parse("2.5e2").eval({}, 0.0) == 250.0);
}
