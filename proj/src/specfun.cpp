#include "fou_sheet/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fou_sheet/errors.hpp"

namespace fou::specfun {

namespace {

// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2.
struct DoubleDouble {
  double hi = 0.0;
  double lo = 0.0;
};

DoubleDouble two_sum(double a, double b) {
  const double s = a + b;
  const double bb = s - a;
  const double err = (a - (s - bb)) + (b - bb);
  return {s, err};
}

DoubleDouble quick_two_sum(double a, double b) {
  const double s = a + b;
  return {s, b - (s - a)};
}

DoubleDouble two_prod(double a, double b) {
  const double p = a * b;
  return {p, std::fma(a, b, -p)};
}

DoubleDouble add(DoubleDouble a, DoubleDouble b) {
  DoubleDouble s = two_sum(a.hi, b.hi);
  DoubleDouble t = two_sum(a.lo, b.lo);
  s.lo += t.hi;
  s = quick_two_sum(s.hi, s.lo);
  s.lo += t.lo;
  return quick_two_sum(s.hi, s.lo);
}

DoubleDouble mul(DoubleDouble a, DoubleDouble b) {
  DoubleDouble p = two_prod(a.hi, b.hi);
  p.lo += a.hi * b.lo + a.lo * b.hi;
  return quick_two_sum(p.hi, p.lo);
}

DoubleDouble div(DoubleDouble a, double b) {
  const double q1 = a.hi / b;
  DoubleDouble p = two_prod(q1, b);
  DoubleDouble r = two_sum(a.hi, -p.hi);
  r.lo += a.lo - p.lo;
  const double q2 = (r.hi + r.lo) / b;
  return quick_two_sum(q1, q2);
}

void require_finite_nonnegative(double x, const char* what) {
  if (!std::isfinite(x)) throw NonFiniteInput(std::string(what) + ": argument is not finite");
  if (x < 0.0) throw RangeError(std::string(what) + ": argument must be >= 0, got " + std::to_string(x));
}

double periodic_trapezoid(double x, int nodes) {
  // (1/N) sum_{k<N} cos(x sin(k pi / N)); symmetric about pi/2, so fold the sum.
  const double step = std::numbers::pi / nodes;
  double sum = 1.0;  // k = 0
  const int half = nodes / 2;
  for (int k = 1; k < half + (nodes % 2); ++k) sum += 2.0 * std::cos(x * std::sin(k * step));
  if (nodes % 2 == 0) sum += std::cos(x);  // k = N/2, sin = 1
  return sum / nodes;
}

}  // namespace

void BesselConfig::validate() const {
  if (!(series_tol > 0.0)) throw InvalidArgument("BesselConfig: series_tol must be > 0");
  if (quad_nodes < 16) throw InvalidArgument("BesselConfig: quad_nodes must be >= 16");
  if (!(switch_point > 0.0)) throw InvalidArgument("BesselConfig: switch_point must be > 0");
}

double j0_series(double x, const BesselConfig& cfg) {
  cfg.validate();
  require_finite_nonnegative(x, "j0_series");
  if (x > kSeriesMaxArgument) {
    throw RangeError("j0_series: x = " + std::to_string(x) + " exceeds the stable range [0, " +
                     std::to_string(kSeriesMaxArgument) + "]");
  }
  // x/2 is exact, so q = (x/2)^2 is exact in double-double.
  const double half = 0.5 * x;
  const DoubleDouble q = two_prod(half, half);
  const double peak = half;  // terms grow while n < x/2
  DoubleDouble term{1.0, 0.0};
  DoubleDouble sum{1.0, 0.0};
  for (int n = 1;; ++n) {
    term = div(mul(term, q), static_cast<double>(n) * n);
    term.hi = -term.hi;
    term.lo = -term.lo;
    if (std::abs(term.hi) < cfg.series_tol && n > peak) break;
    sum = add(sum, term);
  }
  return sum.hi + sum.lo;
}

double j0_series_partial(double x, int terms) {
  require_finite_nonnegative(x, "j0_series_partial");
  if (terms < 1) throw InvalidArgument("j0_series_partial: need at least one term");
  if (x > kSeriesMaxArgument) throw RangeError("j0_series_partial: argument outside the stable range");
  const double half = 0.5 * x;
  const DoubleDouble q = two_prod(half, half);
  DoubleDouble term{1.0, 0.0};
  DoubleDouble sum{1.0, 0.0};
  for (int n = 1; n < terms; ++n) {
    term = div(mul(term, q), static_cast<double>(n) * n);
    term.hi = -term.hi;
    term.lo = -term.lo;
    sum = add(sum, term);
  }
  return sum.hi + sum.lo;
}

double j0_integral(double x, const BesselConfig& cfg) {
  cfg.validate();
  require_finite_nonnegative(x, "j0_integral");
  return periodic_trapezoid(x, cfg.quad_nodes);
}

double j0(double x, const BesselConfig& cfg) {
  cfg.validate();
  require_finite_nonnegative(x, "j0");
  if (x < cfg.switch_point) return j0_series(x, cfg);
  const int nodes = std::max({cfg.quad_nodes, 64, 8 * static_cast<int>(std::ceil(x))});
  return periodic_trapezoid(x, nodes);
}

double j0_asymptotic(double x) {
  if (!std::isfinite(x)) throw NonFiniteInput("j0_asymptotic: argument is not finite");
  if (!(x > 0.0)) throw RangeError("j0_asymptotic: argument must be > 0");
  return std::sqrt(2.0 / (std::numbers::pi * x)) * std::cos(x - std::numbers::pi / 4.0);
}

}  // namespace fou::specfun
