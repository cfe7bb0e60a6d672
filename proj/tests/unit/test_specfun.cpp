#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "fou_sheet/errors.hpp"
#include "fou_sheet/rng.hpp"
#include "fou_sheet/specfun.hpp"

using namespace fou;
using specfun::BesselConfig;
using specfun::j0_asymptotic;
using specfun::j0_integral;
using specfun::j0_series;
using specfun::j0_series_partial;
using specfun::kSeriesMaxArgument;

namespace {
// Reference values computed with 50-digit arithmetic (tests/oracles/oracles.py).
constexpr double kJ0At2 = 0.22389077914123566805;
constexpr double kFirstZero = 2.4048255576957727686;
constexpr double kJ0At10 = -0.2459357644513483352;
constexpr double kJ0At20 = 0.16702466434058315473;
constexpr double kJ0At24_9 = 0.083245968353015490053;
constexpr double kJ0At25_1 = 0.10827567149994945198;
constexpr double kJ0At50 = 0.055812327669251815005;
constexpr double kJ0At100 = 0.019985850304223122424;
constexpr double kJ0At200 = -0.015437439930565091592;
}  // namespace

TEST_SUITE("specfun") {
  TEST_CASE("series values") {
    CHECK(j0_series(0.0) == 1.0);
    CHECK(j0_series(2.0) == doctest::Approx(kJ0At2).epsilon(1e-15));
    CHECK(std::abs(j0_series(2.404826)) < 1e-5);
    CHECK(std::abs(j0_series(kFirstZero)) < 1e-15);
    CHECK(j0_series(10.0) == doctest::Approx(kJ0At10).epsilon(1e-14));
    CHECK(j0_series(20.0) == doctest::Approx(kJ0At20).epsilon(1e-12));
  }

  TEST_CASE("partial sums bracket the value") {
    // Alternating series with decreasing terms past the peak: consecutive
    // partial sums straddle J0(x).
    const double x = 2.0;
    for (int n = 2; n < 12; ++n) {
      const double a = j0_series_partial(x, n);
      const double b = j0_series_partial(x, n + 1);
      CHECK(std::min(a, b) <= kJ0At2 + 1e-16);
      CHECK(std::max(a, b) >= kJ0At2 - 1e-16);
    }
    CHECK(j0_series_partial(x, 1) == 1.0);
    CHECK(j0_series_partial(x, 2) == 0.0);
  }

  TEST_CASE("integral representation") {
    CHECK(j0_integral(0.0) == 1.0);
    CHECK(std::abs(j0_integral(2.0) - j0_series(2.0)) < 1e-10);
    BesselConfig many;
    many.quad_nodes = 512;
    CHECK(std::abs(j0_integral(50.0, many) - j0_asymptotic(50.0)) < std::pow(50.0, -1.5));
    CHECK(j0_integral(50.0, many) == doctest::Approx(kJ0At50).epsilon(1e-13));
  }

  TEST_CASE("quadrature error shrinks with nodes") {
    BesselConfig coarse;
    coarse.quad_nodes = 16;
    BesselConfig fine;
    fine.quad_nodes = 32;
    const double x = 30.0;
    BesselConfig ref;
    ref.quad_nodes = 256;
    const double exact = j0_integral(x, ref);
    CHECK(std::abs(j0_integral(x, fine) - exact) < std::abs(j0_integral(x, coarse) - exact));
  }

  TEST_CASE("hybrid dispatcher") {
    CHECK(specfun::j0(0.0) == 1.0);
    CHECK(std::abs(specfun::j0(24.9) - kJ0At24_9) < 1e-10);
    CHECK(std::abs(specfun::j0(25.1) - kJ0At25_1) < 1e-10);
    CHECK(std::abs(specfun::j0(std::nextafter(25.0, 0.0)) - specfun::j0(25.0)) < 1e-9);
    CHECK(std::abs(specfun::j0(100.0) - kJ0At100) < 1e-12);
    CHECK(std::abs(specfun::j0(200.0) - kJ0At200) < 1e-12);
  }

  TEST_CASE("asymptotic form") {
    CHECK(j0_asymptotic(std::numbers::pi / 4) == doctest::Approx(std::sqrt(8.0) / std::numbers::pi).epsilon(1e-15));
    for (double x : {10.0, 20.0, 50.0, 100.0}) {
      CHECK(std::abs(specfun::j0(x) - j0_asymptotic(x)) <= std::pow(x, -1.5));
    }
    for (double x = 0.01; x < 1000.0; x *= 1.7) {
      CHECK(std::abs(j0_asymptotic(x) * std::sqrt(x)) <= std::sqrt(2.0 / std::numbers::pi) + 1e-15);
    }
    CHECK_THROWS_AS(j0_asymptotic(0.0), RangeError);
  }

  TEST_CASE("representations agree on random arguments") {
    RandomStream r(2024, 0, stream_domain::kBesselCheck);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const double x = 25.0 * r.uniform();
      worst = std::max(worst, std::abs(j0_series(x) - j0_integral(x)));
    }
    CHECK(worst < 1e-10);
  }

  TEST_CASE("bounded by one") {
    for (double x = 0.0; x < 60.0; x += 0.37) CHECK(std::abs(specfun::j0(x)) <= 1.0);
  }

  TEST_CASE("input validation") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(j0_series(nan), NonFiniteInput);
    CHECK_THROWS_AS(j0_integral(inf), NonFiniteInput);
    CHECK_THROWS_AS(specfun::j0(nan), NonFiniteInput);
    CHECK_THROWS_AS(j0_series(-1.0), RangeError);
    CHECK_THROWS_AS(j0_series(kSeriesMaxArgument + 1.0), RangeError);
    BesselConfig bad;
    bad.quad_nodes = 4;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = {};
    bad.series_tol = 0.0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  }
}
