#include "fou_sheet/singular.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include "fou_sheet/errors.hpp"
#include "fou_sheet/grid.hpp"
#include "fou_sheet/parallel.hpp"
#include "fou_sheet/rng.hpp"

namespace fou::singular {

namespace {

constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

// Lanczos series for Gamma(x + 1), x >= -1/2, returned as log.
double lanczos_log_gamma1(double x) {
  double a = kLanczos[0];
  for (std::size_t i = 1; i < kLanczos.size(); ++i) a += kLanczos[i] / (x + static_cast<double>(i));
  const double t = x + kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (x + 0.5) * std::log(t) - t + std::log(a);
}

}  // namespace

double log_gamma(double x) {
  if (!std::isfinite(x)) throw NonFiniteInput("log_gamma: argument must be finite");
  if (!(x > 0.0)) throw RangeError("log_gamma: argument must be > 0");
  if (x < 0.5) {
    // Gamma(x) Gamma(1 - x) = pi / sin(pi x)
    return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - lanczos_log_gamma1(-x);
  }
  return lanczos_log_gamma1(x - 1.0);
}

double gamma_fn(double x) {
  if (!std::isfinite(x)) throw NonFiniteInput("gamma_fn: argument must be finite");
  if (x <= 0.0 && x == std::floor(x)) throw RangeError("gamma_fn: pole at a non-positive integer");
  if (x < 0.5) return std::numbers::pi / (std::sin(std::numbers::pi * x) * gamma_fn(1.0 - x));
  return std::exp(lanczos_log_gamma1(x - 1.0));
}

double beta_fn(double x, double y) {
  if (!(x > 0.0 && y > 0.0)) throw RangeError("beta_fn: arguments must be > 0");
  return std::exp(log_gamma(x) + log_gamma(y) - log_gamma(x + y));
}

GaussLegendre gauss_legendre(int n) {
  if (n < 1) throw InvalidArgument("gauss_legendre: n must be >= 1");
  GaussLegendre rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double step = p1 / dp;
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

namespace {

// Composite Gauss-Legendre on [lo, hi]. The lower half is cut into panels
// halving in width toward lo (endpoint singularities of the transformed
// integrands sit there); the upper half into panels halving toward hi,
// which resolves the steep eta^{1/b} growth when an exponent is small.
double graded_integral(const std::function<double(double)>& g, double lo, double hi, const GaussLegendre& rule) {
  if (!(hi > lo)) return 0.0;
  constexpr int kLowLevels = 48;
  constexpr int kHighLevels = 12;
  const double half_width = 0.5 * (hi - lo);
  auto panel = [&](double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) acc += rule.weights[i] * g(c + h * rule.nodes[i]);
    return h * acc;
  };
  double total = panel(lo, lo + half_width * std::ldexp(1.0, -kLowLevels));
  for (int k = kLowLevels - 1; k >= 0; --k) {
    total += panel(lo + half_width * std::ldexp(1.0, -k - 1), lo + half_width * std::ldexp(1.0, -k));
  }
  for (int k = 0; k < kHighLevels; ++k) {
    total += panel(hi - half_width * std::ldexp(1.0, -k), hi - half_width * std::ldexp(1.0, -k - 1));
  }
  total += panel(hi - half_width * std::ldexp(1.0, -kHighLevels), hi);
  return total;
}

}  // namespace

double incomplete_beta_integral(double a, double b, double r, int quad_nodes) {
  if (!(a > 0.0 && b > 0.0)) throw RangeError("incomplete_beta_integral: a and b must be > 0");
  if (!(r >= 0.0 && r <= 1.0)) throw RangeError("incomplete_beta_integral: r must lie in [0, 1]");
  if (quad_nodes < 2) throw InvalidArgument("incomplete_beta_integral: quad_nodes must be >= 2");
  const GaussLegendre rule = gauss_legendre(quad_nodes);
  const double m = std::min(r, 0.5);
  // z = xi^{1/a}: z^{a-1} dz = dxi / a
  const double head = graded_integral(
      [&](double xi) { return std::pow(1.0 - std::pow(xi, 1.0 / a), b - 1.0) / a; }, 0.0, std::pow(m, a), rule);
  if (r <= 0.5) return head;
  // 1 - z = eta^{1/b}: (1 - z)^{b-1} dz = -deta / b
  const double tail = graded_integral(
      [&](double eta) { return std::pow(1.0 - std::pow(eta, 1.0 / b), a - 1.0) / b; }, std::pow(1.0 - r, b),
      std::pow(0.5, b), rule);
  return head + tail;
}

double integrand_I(const Point8& p, double alpha, double beta) {
  for (double x : p) {
    if (!std::isfinite(x)) throw NonFiniteInput("integrand_I: coordinates must be finite");
    if (!(x > 0.0 && x < 1.0)) throw RangeError("integrand_I: coordinates must lie in (0, 1)");
  }
  const auto [t, u, t0, u0, s, v, s0, v0] = p;
  if (!(t > u && t0 > u0 && s > v && s0 > v0)) {
    throw RangeError("integrand_I: requires t > u, t0 > u0, s > v, s0 > v0");
  }
  const double ea = 2.0 * alpha - 2.0;
  const double eb = 2.0 * beta - 2.0;
  return std::pow((t - u) * (s - v) * (t0 - u0) * (s0 - v0), -0.25) * std::pow(std::abs(t - t0), ea) *
         std::pow(std::abs(u - u0), ea) * std::pow(std::abs(s - s0), eb) * std::pow(std::abs(v - v0), eb);
}

namespace {

constexpr std::int64_t kChunk = 1 << 16;

// One draw of a four-dimensional block. `free_gap` is the gap (t - u) that
// the proposal does not absorb; `inv_density` is 1 / proposal density.
struct BlockDraw {
  bool inside = false;
  double free_gap = 0.0;
  double inv_density = 0.0;
};

double symmetric_beta_gap(RandomStream& rng, double shape) {
  const double magnitude = std::pow(rng.uniform_open(), 1.0 / shape);
  return rng.uniform() < 0.5 ? -magnitude : magnitude;
}

BlockDraw draw_block(RandomStream& rng, double g) {
  const double shape = 2.0 * g - 1.0;
  const double anchor = rng.uniform_open();
  const double e2 = symmetric_beta_gap(rng, shape);
  const double d2 = std::pow(rng.uniform_open(), 4.0 / 3.0);
  const double e1 = symmetric_beta_gap(rng, shape);
  // anchor = u0, partner = u, upper = t0, upper_partner = t.
  const double partner = anchor + e2;
  const double upper = anchor + d2;
  const double upper_partner = upper + e1;
  BlockDraw out;
  const bool in_range = partner > 0.0 && partner < 1.0 && upper < 1.0 && upper_partner > 0.0 && upper_partner < 1.0;
  const double free_gap = upper_partner - partner;
  if (!in_range || !(free_gap > 0.0)) return out;
  const double half_shape = 0.5 * shape;
  out.inside = true;
  out.free_gap = free_gap;
  out.inv_density = std::pow(std::abs(e1) * std::abs(e2), 1.0 - shape) * std::pow(d2, 0.25) /
                    (0.75 * half_shape * half_shape);
  return out;
}

double block_weight(const BlockDraw& d, double g) {
  if (!d.inside) return 0.0;
  const double half_shape = g - 0.5;
  return std::pow(d.free_gap, -0.25) / (0.75 * half_shape * half_shape);
}

void check_exponent(double g, const char* name) {
  if (!std::isfinite(g) || !(g > 0.5 && g < 1.0)) {
    throw RangeError(std::string("integral_I_mc: ") + name + " must lie in (1/2, 1)");
  }
}

template <typename Weight>
SingularMCResult run_mc(double alpha, double beta, std::int64_t n_samples, std::uint64_t seed, bool swap, int workers,
                        Weight weight) {
  check_exponent(alpha, "alpha");
  check_exponent(beta, "beta");
  if (n_samples < 2) throw InvalidArgument("integral_I_mc: n_samples must be >= 2");
  if (workers < 1) workers = worker_count();
  const std::int64_t chunks = (n_samples + kChunk - 1) / kChunk;
  std::vector<double> sums(static_cast<std::size_t>(chunks));
  std::vector<double> squares(static_cast<std::size_t>(chunks));
  parallel_for(
      static_cast<std::size_t>(chunks),
      [&](std::size_t c) {
        const std::int64_t begin = static_cast<std::int64_t>(c) * kChunk;
        const std::int64_t count = std::min(kChunk, n_samples - begin);
        RandomStream rng_t(seed, c, swap ? stream_domain::kLemmaIntegralS : stream_domain::kLemmaIntegral);
        RandomStream rng_s(seed, c, swap ? stream_domain::kLemmaIntegral : stream_domain::kLemmaIntegralS);
        double sum = 0.0;
        double sq = 0.0;
        for (std::int64_t k = 0; k < count; ++k) {
          const BlockDraw bt = draw_block(rng_t, alpha);
          const BlockDraw bs = draw_block(rng_s, beta);
          const double w = weight(bt, bs);
          sum += w;
          sq += w * w;
        }
        sums[c] = sum;
        squares[c] = sq;
      },
      workers);
  double sum = 0.0;
  double sq = 0.0;
  for (std::size_t c = 0; c < sums.size(); ++c) {
    sum += sums[c];
    sq += squares[c];
  }
  const auto n = static_cast<double>(n_samples);
  const double mean = sum / n;
  const double var = std::max(0.0, (sq - n * mean * mean) / (n - 1.0));
  SingularMCResult out;
  out.estimate = mean;
  out.standard_error = std::sqrt(var / n);
  out.n_samples = n_samples;
  out.alpha = alpha;
  out.beta = beta;
  out.seed = seed;
  out.theorem_regime = in_theorem_regime(alpha) && in_theorem_regime(beta);
  return out;
}

}  // namespace

SingularMCResult integral_I_mc(double alpha, double beta, std::int64_t n_samples, std::uint64_t seed,
                               bool swap_blocks, int workers) {
  return run_mc(alpha, beta, n_samples, seed, swap_blocks, workers, [&](const BlockDraw& bt, const BlockDraw& bs) {
    return block_weight(bt, alpha) * block_weight(bs, beta);
  });
}

SingularMCResult region_volume_mc(double alpha, double beta, std::int64_t n_samples, std::uint64_t seed,
                                  int workers) {
  return run_mc(alpha, beta, n_samples, seed, false, workers, [](const BlockDraw& bt, const BlockDraw& bs) {
    return (bt.inside && bs.inside) ? bt.inv_density * bs.inv_density : 0.0;
  });
}

BetaReduction beta_reduction_check(double beta, double v, double s0, int quad_nodes) {
  if (!std::isfinite(beta) || !in_theorem_regime(beta)) {
    throw RangeError("beta_reduction_check: beta must lie in (1/2, 5/8)");
  }
  if (!(v > 0.0 && v < 1.0 && s0 > 0.0 && s0 < 1.0)) throw RangeError("beta_reduction_check: v, s0 must lie in (0, 1)");
  if (v == s0) throw RangeError("beta_reduction_check: v = s0 is degenerate");
  const double power = 2.0 * beta - 1.25;
  BetaReduction out;
  if (s0 < v) {
    const double scale = std::pow(v - s0, power);
    out.upper_branch = true;
    out.lhs = scale * incomplete_beta_integral(0.75, 1.25 - 2.0 * beta, s0 / v, quad_nodes);
    out.rhs = scale * beta_fn(0.75, 1.25 - 2.0 * beta);
    return out;
  }
  const double scale = std::pow(s0 - v, power);
  const double tail = beta_fn(0.75, 2.0 * beta - 1.0);
  out.lhs = scale * (incomplete_beta_integral(2.0 * beta - 1.0, 1.25 - 2.0 * beta, v / s0, quad_nodes) + tail);
  out.rhs = scale * (beta_fn(2.0 * beta - 1.0, 1.25 - 2.0 * beta) + tail);
  return out;
}

std::vector<ScanCell> finiteness_scan(const std::vector<double>& alphas, const std::vector<double>& betas,
                                      std::int64_t n_samples, std::uint64_t seed, int workers) {
  if (alphas.empty() || betas.empty()) throw InvalidArgument("finiteness_scan: parameter lists must be nonempty");
  std::vector<ScanCell> cells;
  cells.reserve(alphas.size() * betas.size());
  for (double a : alphas) {
    for (double b : betas) {
      ScanCell cell;
      cell.alpha = a;
      cell.beta = b;
      try {
        cell.result = integral_I_mc(a, b, n_samples, seed, false, workers);
      } catch (const Error& e) {
        cell.error = e.what();
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

}  // namespace fou::singular
