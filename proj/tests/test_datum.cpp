#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "heatsg/datum.hpp"

using namespace heatsg;

TEST_CASE("hermite polynomials") {
  const double x = 0.7;
  CHECK(hermite_polynomial(0, x) == 1.0);
  CHECK(hermite_polynomial(1, x) == doctest::Approx(2 * x));
  CHECK(hermite_polynomial(2, x) == doctest::Approx(4 * x * x - 2));
  CHECK(hermite_polynomial(3, x) == doctest::Approx(8 * x * x * x - 12 * x));
  CHECK(hermite_polynomial(4, x) ==
        doctest::Approx(16 * std::pow(x, 4) - 48 * x * x + 12));
}

TEST_CASE("hermite functions are orthonormal") {
  // Trapezoid on a fine grid is spectrally accurate for these integrands.
  const double h = 0.01;
  for (int j = 0; j <= 4; ++j) {
    for (int k = 0; k <= 4; ++k) {
      double sum = 0.0;
      for (double y = -15.0; y <= 15.0; y += h) {
        sum += (log_hermite_function(j, y) * log_hermite_function(k, y)).value();
      }
      CHECK(sum * h == doctest::Approx(j == k ? 1.0 : 0.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("hermite function at the origin") {
  CHECK(log_hermite_function(0, 0.0).value() ==
        doctest::Approx(std::pow(std::numbers::pi, -0.25)).epsilon(1e-15));
  CHECK(log_hermite_function(1, 0.0).sign == 0);
  // Deep in the tail the log form stays finite.
  const auto far = log_hermite_function(3, 60.0);
  CHECK(far.sign == 1);
  CHECK(std::isfinite(far.log_abs));
}

TEST_CASE("datum values") {
  SUBCASE("gaussian") {
    const auto g = InitialDatum::gaussian(1.0, {0.5, -1.0});
    const Point y{0.2, 0.3};
    CHECK(g.value(y) == doctest::Approx(std::exp(-0.13 + 0.1 - 0.3)));
  }
  SUBCASE("broadcast multi-index") {
    const auto h = InitialDatum::hermite_polynomial({2});
    const Point y{0.5, -1.5};
    CHECK(h.value(y) == doctest::Approx((4 * 0.25 - 2) * (4 * 2.25 - 2)));
  }
  SUBCASE("box is closed") {
    const auto b = InitialDatum::box({-1.0}, {1.0});
    CHECK(b.value(Point{1.0}) == 1.0);
    CHECK(b.value(Point{1.0000001}) == 0.0);
    CHECK(b.value(Point{0.0, 0.5}) == 1.0);
    CHECK(b.value(Point{0.0, 1.5}) == 0.0);
  }
  SUBCASE("quartic exponential") {
    const auto q = InitialDatum::quartic_exponential(0.5);
    CHECK(q.value(Point{1.0, 1.0}) == doctest::Approx(std::exp(0.5 * 4.0)));
    CHECK(q.separable(Dim(1)));
    CHECK_FALSE(q.separable(Dim(2)));
  }
  SUBCASE("tabulated hat") {
    const auto t = InitialDatum::tabulated({-1.0, 0.0, 1.0}, {0.0, 1.0, 0.0});
    CHECK(t.value(Point{0.0}) == doctest::Approx(1.0));
    CHECK(t.value(Point{0.25}) == doctest::Approx(0.75));
    CHECK(t.value(Point{-0.5, 0.5}) == doctest::Approx(0.25));
    CHECK(t.value(Point{2.0}) == 0.0);
  }
  SUBCASE("zero") {
    const auto z = InitialDatum::zero();
    CHECK(z.is_zero());
    CHECK(z.value(Point{1.0, 2.0, 3.0}) == 0.0);
  }
}

TEST_CASE("times_gaussian is the isometry onto L2(dx)") {
  const auto h = InitialDatum::hermite_polynomial({1});
  const auto u = h.times_gaussian(0.5, -0.25 * std::log(std::numbers::pi));
  CHECK(u.is_modified());
  const double y = 0.8;
  CHECK(u.value(Point{y}) ==
        doctest::Approx(std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * y * y) * 2 * y));
  // U H_1 is sqrt(2) times the first Hermite function.
  CHECK(u.value(Point{y}) ==
        doctest::Approx(std::sqrt(2.0) * log_hermite_function(1, y).value()));
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS_AS(InitialDatum::hermite_function({-1}), std::invalid_argument);
  CHECK_THROWS_AS(InitialDatum::box({1.0}, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(InitialDatum::tabulated({0.0, 1.0}, {1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(InitialDatum::tabulated({0.0, 0.0, 1.0}, {0.0, 1.0, 0.0}),
                  std::invalid_argument);
  // Per-axis parameters must match the point dimension unless broadcast.
  const auto h = InitialDatum::hermite_polynomial({1, 2});
  CHECK_THROWS(h.value(Point{1.0, 2.0, 3.0}));
}

TEST_CASE("closed-form availability") {
  CHECK(InitialDatum::hermite_function({1}).has_closed_form(KernelKind::Hermite));
  CHECK(InitialDatum::hermite_function({1}).has_closed_form(KernelKind::HermiteShifted));
  CHECK(InitialDatum::hermite_polynomial({2}).has_closed_form(KernelKind::OrnsteinUhlenbeck));
  CHECK(InitialDatum::gaussian(1.0).has_closed_form(KernelKind::Classical));
  CHECK(InitialDatum::box({-1.0}, {1.0}).has_closed_form(KernelKind::Classical));
  CHECK_FALSE(InitialDatum::quartic_exponential(1.0).has_closed_form(KernelKind::Classical));
  CHECK(InitialDatum::zero().has_closed_form(KernelKind::OrnsteinUhlenbeck));
}

TEST_CASE("describe") {
  CHECK(InitialDatum::hermite_function({0}).describe() == "hermite-fn:0");
  CHECK(InitialDatum::box({-1.0}, {1.0}).describe() == "box:-1,1");
  CHECK(InitialDatum::zero().describe() == "zero");
  CHECK(InitialDatum::quartic_exponential(0.5).describe() == "quartic-exp:0.5");
}

TEST_CASE("growth envelopes") {
  const auto q = InitialDatum::quartic_exponential(0.5);
  CHECK(q.envelope().power_exponent == 4.0);
  CHECK(q.envelope().power_coeff == 0.5);
  const auto h = InitialDatum::hermite_polynomial({3});
  const auto shape = h.axis_shape(0, Dim(1));
  CHECK(shape.quadratic == 0.0);
  CHECK(shape.residual.poly_degree >= 3.0);
  const auto b = InitialDatum::box({-1.0, 0.0}, {1.0, 2.0});
  const auto s1 = b.axis_shape(1, Dim(2));
  REQUIRE(s1.support.has_value());
  CHECK(s1.support->first == 0.0);
  CHECK(s1.support->second == 2.0);
}
