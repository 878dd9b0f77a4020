#include <doctest.h>

#include <cmath>

#include "isp/errors.hpp"
#include "isp/pulses.hpp"
#include "oracles.hpp"

using namespace isp;

TEST_CASE("pulse values") {
  const Pulse lp = Pulse::linear_plateau();
  const Pulse tr = Pulse::triangle();
  CHECK(lp.eval(0.5) == 0.5);
  CHECK(lp.eval(2.0) == 1.0);
  CHECK(tr.eval(0.5) == 0.5);
  CHECK(tr.eval(1.0) == 0.0);
  CHECK(tr.eval(0.25) == 0.25);
  CHECK(tr.eval(2.0) == 0.0);
  for (const Pulse& p : {lp, tr, Pulse::custom({{0, 0}, {0.3, 0.9}, {1, 1}}, SupportKind::Plateau)}) {
    CHECK(p.eval(-3.0) == 0.0);
    CHECK(p.eval(0.0) == 0.0);
  }
  CHECK(lp.plateau_value() == 1.0);
  CHECK(tr.plateau_value() == 0.0);
  CHECK(lp.lipschitz_f() == 1.0);
  CHECK(tr.lipschitz_f() == 1.0);
}

TEST_CASE("increments and kernel") {
  const Pulse lp = Pulse::linear_plateau();
  CHECK(lp.increment(1.0, -0.5, 2.0) == doctest::Approx(0.5));
  CHECK(lp.increment(1.0, 5.0, 1.0) == 0.0);
  CHECK(Pulse::triangle().increment(1.0, 5.0, 1.0) == 0.0);
  CHECK(lp.increment(1.0, 0.0, 1.0) == 1.0);
  CHECK(lp.kernel(1.0, 0.0, 1.0, 2.0) == 2.0);
  CHECK(lp.kernel(1.0, -0.5, 2.0, -1.0) == doctest::Approx(-1.0));
  CHECK(lp.kernel(1.3, 0.2, 0.7, 0.0) == 0.0);
  CHECK_THROWS_AS(lp.increment(1.0, 0.0, 0.0), DomainError);
}

TEST_CASE("custom pulse construction") {
  CHECK_THROWS_AS(Pulse::custom({{0, 0.1}, {1, 1}}, SupportKind::Plateau), ConfigError);
  CHECK_THROWS_AS(Pulse::custom({{0, 0}, {0.5, 1}}, SupportKind::Plateau), ConfigError);
  CHECK_THROWS_AS(Pulse::custom({{0, 0}, {0.5, 1}, {1, 0.5}}, SupportKind::Compact), ConfigError);
  CHECK_THROWS_AS(Pulse::custom({{0, 0}, {0.5, 1}, {0.4, 1}, {1, 1}}, SupportKind::Plateau),
                  ConfigError);
  const Pulse p = Pulse::custom({{0, 0}, {0.25, 0.75}, {1, 1}}, SupportKind::Plateau);
  CHECK(p.lipschitz_f() == doctest::Approx(3.0));
  CHECK(p.eval(0.125) == doctest::Approx(0.375));
  CHECK(p.eval(5.0) == 1.0);
  const auto bp = p.breakpoints();
  CHECK(bp.front() == 0.0);
  CHECK(bp.back() == 1.0);
}

TEST_CASE("pulse validation") {
  CHECK(validate(Pulse::linear_plateau()).pass);
  CHECK(validate(Pulse::triangle()).pass);
  const Pulse steep = Pulse::custom({{0, 0}, {0.1, 0.5}, {1, 1}}, SupportKind::Plateau, 2.0);
  const PulseReport rep = validate(steep);
  CHECK_FALSE(rep.pass);
  REQUIRE(rep.offending_pair.has_value());
  // The pair must lie on the steep first piece where the slope is 5.
  CHECK(rep.offending_pair->first < 0.1 + 1e-9);
  CHECK(rep.worst_ratio_f == doctest::Approx(2.5).epsilon(1e-6));
  CHECK_FALSE(rep.messages.empty());
}

TEST_CASE("property: increment vanishes outside (-u, t]") {
  for (const Pulse& p : {Pulse::linear_plateau(), Pulse::triangle()}) {
    for (double t : {0.3, 1.0, 2.5}) {
      for (double u : {0.01, 0.4, 1.0, 7.0}) {
        for (double s = t + 1e-9; s < t + 3.0; s += 0.37) CHECK(p.increment(t, s, u) == 0.0);
        for (double s = -u; s > -u - 5.0; s -= 0.41) CHECK(p.increment(t, s, u) == 0.0);
      }
    }
  }
}

TEST_CASE("property: linear plateau kernel equals the truncated-minimum form") {
  const Pulse lp = Pulse::linear_plateau();
  auto pos = [](double x) { return x > 0 ? x : 0.0; };
  for (double t = 0.05; t < 3.0; t += 0.23) {
    for (double s = -4.0; s < 4.0; s += 0.17) {
      for (double u = 0.03; u < 5.0; u *= 1.7) {
        const double r = -1.3;
        const double expected = r * (std::min(pos(t - s), u) - std::min(pos(-s), u));
        CHECK(lp.kernel(t, s, u, r) == doctest::Approx(expected).epsilon(1e-12).scale(1.0));
      }
    }
  }
}

TEST_CASE("property: increment bounds") {
  for (const Pulse& p : {Pulse::linear_plateau(), Pulse::triangle()}) {
    const double M = p.lipschitz_f();
    for (double t = 0.1; t < 3.0; t += 0.31) {
      for (double s = -6.0; s < 3.0; s += 0.13) {
        for (double u = 0.05; u < 9.0; u *= 1.6) {
          const double inc = p.increment(t, s, u);
          CHECK(std::abs(inc) <= 2.0 * M + 1e-15);
          if (s < 0.0 && s + u > t) CHECK(std::abs(inc) <= M * t / u + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("pulses agree with test-side reimplementations") {
  for (double x = -1.0; x < 3.0; x += 0.0137) {
    CHECK(Pulse::linear_plateau().eval(x) == doctest::Approx(oracle::linear_plateau(x)));
    CHECK(Pulse::triangle().eval(x) == doctest::Approx(oracle::triangle(x)));
  }
}
