#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fou::singular {

/// log Gamma(x) for x > 0 (Lanczos approximation, g = 7, 9 coefficients).
double log_gamma(double x);

/// Gamma(x) for real x that is not a non-positive integer; the reflection
/// formula covers x < 1/2.
double gamma_fn(double x);

/// Beta(x, y) = Gamma(x) Gamma(y) / Gamma(x + y) for x, y > 0.
double beta_fn(double x, double y);

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussLegendre gauss_legendre(int n);

/// Incomplete Beta integral int_0^r z^{a-1} (1 - z)^{b-1} dz for
/// a, b > 0 and 0 <= r <= 1.
///
/// The piece on [0, min(r, 1/2)] is rewritten with z^a = xi and the piece on
/// [1/2, r] with (1 - z)^b = eta. Both substitutions remove the endpoint
/// power singularity. Each piece is then integrated by composite
/// Gauss-Legendre on panels graded geometrically toward both ends of the
/// transformed range: the lower end carries what is left of the
/// singularity, the upper end the steep growth of xi^{1/a} or eta^{1/b}
/// when an exponent is small.
double incomplete_beta_integral(double a, double b, double r, int quad_nodes = 20);

/// Point (t, u, t0, u0, s, v, s0, v0) of the eight-dimensional domain.
using Point8 = std::array<double, 8>;

/// ((t-u)(s-v)(t0-u0)(s0-v0))^{-1/4} |t-t0|^{2a-2} |u-u0|^{2a-2} |s-s0|^{2b-2} |v-v0|^{2b-2}.
///
/// Requires every coordinate in (0, 1) and t > u, t0 > u0, s > v, s0 > v0
/// (RangeError otherwise). Coincident coordinates across the two blocks
/// give +infinity.
double integrand_I(const Point8& p, double alpha, double beta);

struct SingularMCResult {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::int64_t n_samples = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  bool theorem_regime = false;  ///< both exponents in (1/2, 5/8)
};

/// Importance-sampled Monte Carlo estimate of the eight-dimensional
/// integral of integrand_I over its domain.
///
/// The integrand factorizes into a (t, u, t0, u0) block with exponent
/// alpha and an (s, v, s0, v0) block with exponent beta, sampled
/// independently. Within a block with exponent g:
///   u0 ~ U(0, 1),  u = u0 + e2,  t0 = u0 + d2,  t = t0 + e1,
/// with e1, e2 symmetric Beta(2g - 1, 1) gaps and d2 of density
/// (3/4) x^{-1/4} on (0, 1). The map has unit Jacobian, and the proposal
/// density cancels every singular factor except (t - u)^{-1/4}, so the
/// weight is
///   (t - u)^{-1/4} / ((3/4) ((2g - 1) / 2)^2)
/// inside the domain and 0 outside. Its second moment is finite.
/// swap_blocks exchanges the random streams feeding the alpha and beta
/// blocks. The blocks are independent, so the swapped estimate has the
/// same distribution; for alpha != beta it is a different realization,
/// while for alpha = beta the product weight makes it coincide exactly.
///
/// Exponents must lie in (1/2, 1). Near a point where all four
/// coordinates of a block meet, the integrand grows like r^{4g - 9/2}
/// against a volume r^4, so the integral is finite for every g > 1/8; it
/// grows without bound as an exponent falls to 1/2, where the gap factors
/// stop being integrable. Results outside (1/2, 5/8) are flagged through
/// theorem_regime = false because the variance bound built on this
/// integral is only stated there.
/// Samples are drawn in chunks of fixed size, chunk c from stream index c,
/// so the result does not depend on the worker count.
SingularMCResult integral_I_mc(double alpha, double beta, std::int64_t n_samples, std::uint64_t seed,
                               bool swap_blocks = false, int workers = -1);

/// Same sampler with the integrand replaced by 1. The exact value is the
/// domain volume 1/16, which checks that the weights cancel the proposal.
SingularMCResult region_volume_mc(double alpha, double beta, std::int64_t n_samples, std::uint64_t seed,
                                  int workers = -1);

struct BetaReduction {
  double lhs = 0.0;  ///< int_0^{s0} |v - v0|^{2b-2} (s0 - v0)^{-1/4} dv0 by quadrature
  double rhs = 0.0;  ///< closed-form bound built from Beta functions
  bool upper_branch = false;  ///< true when s0 < v
};

/// One-dimensional reduction of the inner v0 integral and its Beta bound.
///
/// For s0 < v the substitution z = (s0 - v0) / (v - v0) gives
///   lhs = (v - s0)^{2b - 5/4} int_0^{s0/v} z^{-1/4} (1 - z)^{1/4 - 2b} dz,
///   rhs = (v - s0)^{2b - 5/4} B(3/4, 5/4 - 2b).
/// For v < s0 the range splits at v0 = v; z = (v - v0) / (s0 - v0) and
/// z = (s0 - v0) / (v0 - v) give
///   lhs = (s0 - v)^{2b - 5/4} (int_0^{v/s0} z^{2b-2} (1 - z)^{1/4 - 2b} dz + B(3/4, 2b - 1)),
///   rhs = (s0 - v)^{2b - 5/4} (B(2b - 1, 5/4 - 2b) + B(3/4, 2b - 1)).
/// The incomplete integrals are evaluated by incomplete_beta_integral.
/// Requires b in (1/2, 5/8), v and s0 in (0, 1) and v != s0.
BetaReduction beta_reduction_check(double beta, double v, double s0, int quad_nodes = 20);

struct ScanCell {
  double alpha = 0.0;
  double beta = 0.0;
  std::optional<SingularMCResult> result;
  std::string error;  ///< set when the cell failed
};

/// integral_I_mc over the grid alphas x betas (alpha-major order), every
/// cell with the same seed so neighbouring cells share random numbers.
/// A failing cell records its error and the scan continues.
std::vector<ScanCell> finiteness_scan(const std::vector<double>& alphas, const std::vector<double>& betas,
                                      std::int64_t n_samples, std::uint64_t seed, int workers = -1);

}  // namespace fou::singular
