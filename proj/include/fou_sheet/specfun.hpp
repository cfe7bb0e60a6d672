#pragma once

namespace fou::specfun {

/// Evaluation settings for the Bessel function J0.
struct BesselConfig {
  /// Series truncation: stop once the next term's magnitude drops below this.
  double series_tol = 1e-17;
  /// Nodes of the periodic trapezoid rule for the integral representation.
  int quad_nodes = 64;
  /// j0() uses the series below this argument and the integral above it.
  double switch_point = 25.0;

  /// Throws InvalidArgument unless series_tol > 0, quad_nodes >= 16, switch_point > 0.
  void validate() const;
};

/// Largest argument accepted by j0_series. The series is summed in
/// double-double arithmetic; its largest term is about I0(x), so at x = 40
/// roughly 16 of the ~32 available digits are lost to cancellation.
inline constexpr double kSeriesMaxArgument = 40.0;

/// J0 by its power series, sum_n (-1)^n / (n!)^2 (x/2)^(2n).
double j0_series(double x, const BesselConfig& cfg = {});

/// Sum of the first `terms` terms of the power series (terms >= 1).
double j0_series_partial(double x, int terms);

/// J0 by (1/pi) int_0^pi cos(x sin r) dr with the periodic trapezoid rule.
///
/// The integrand is smooth and pi-periodic, so the N-node rule is
/// spectrally accurate once N comfortably exceeds x/2.
double j0_integral(double x, const BesselConfig& cfg = {});

/// Hybrid: series for x < switch_point, integral above with
/// max(quad_nodes, 64, 8 * ceil(x)) nodes.
double j0(double x, const BesselConfig& cfg = {});

/// Leading large-argument form sqrt(2 / (pi x)) cos(x - pi/4), for x > 0.
///
/// Not used for evaluation anywhere in the library; it backs the envelope
/// checks |J0(x) - j0_asymptotic(x)| <= C x^(-3/2).
double j0_asymptotic(double x);

}  // namespace fou::specfun
