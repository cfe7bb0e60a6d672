// Acceptance criteria AC1..AC10. Prints one PASS/FAIL line per criterion
// followed by indented detail lines; exits nonzero if any selected
// criterion fails. Usage: fou_acceptance [--only ACn]...

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "fou_sheet/chaos.hpp"
#include "fou_sheet/errors.hpp"
#include "fou_sheet/estimator.hpp"
#include "fou_sheet/fbs.hpp"
#include "fou_sheet/harness.hpp"
#include "fou_sheet/ou_sheet.hpp"
#include "fou_sheet/rng.hpp"
#include "fou_sheet/singular.hpp"
#include "fou_sheet/specfun.hpp"

using namespace fou;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> details;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    details.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
  void note(const std::string& what) { details.push_back("     " + what); }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Centered-moment helpers with influence-function standard errors.
struct SampleStats {
  double mean, var, var_se, kappa4, kappa4_se;
};

SampleStats sample_stats(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  const double kappa4 = m4 - 3.0 * m2 * m2;
  double s_var = 0.0;
  double s_k4 = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    const double if_var = d * d - m2;
    const double if_k4 = (d * d * d * d - m4) - 4.0 * m3 * d - 6.0 * m2 * (d * d - m2);
    s_var += if_var * if_var;
    s_k4 += if_k4 * if_k4;
  }
  return {mean, m2 * n / (n - 1.0), std::sqrt(s_var / n / n), kappa4, std::sqrt(s_k4 / n / n)};
}

Outcome ac1() {
  Outcome o;
  RandomStream rng(20240601, 0, stream_domain::kBesselCheck);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double x = 25.0 * rng.uniform();
    worst = std::max(worst, std::abs(specfun::j0_series(x) - specfun::j0_integral(x)));
  }
  o.require(worst < 1e-10, fmt("max |series - integral| over 200 x in [0, 25] = %.3e (< 1e-10)", worst));
  double worst_env = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    const double x = 10.0 * std::pow(20.0, i / 2000.0);
    const double scaled = std::abs(specfun::j0(x) - specfun::j0_asymptotic(x)) * std::pow(x, 1.5);
    worst_env = std::max(worst_env, scaled);
  }
  o.require(worst_env <= 1.0, fmt("max x^1.5 |j0 - asymptotic| on [10, 200] = %.4f (<= 1)", worst_env));
  return o;
}

Outcome ac2() {
  Outcome o;
  const GridSpec g(2.0, 2.0, 4, 4);
  const HurstPair hurst(0.55, 0.55);
  const fbs::SheetSampler sampler(g, hurst);
  const int n = 20000;
  std::vector<SheetPath> paths;
  paths.reserve(n);
  for (int r = 0; r < n; ++r) paths.push_back(sampler.sample(2002, r).second);
  const std::vector<fbs::NodePair> pairs = {
      {1, 1, 2, 2}, {2, 3, 4, 1}, {3, 3, 3, 4}, {4, 2, 1, 4}, {2, 2, 4, 4}, {4, 4, 4, 4}};
  const auto est = fbs::empirical_cov(paths, pairs);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto& q = pairs[p];
    const double exact =
        fbs::cov_r(g.node_t(q.i), g.node_t(q.k), 0.55) * fbs::cov_r(g.node_s(q.j), g.node_s(q.l), 0.55);
    const double z = (est[p].estimate - exact) / est[p].standard_error;
    const bool corner = p + 1 == pairs.size();
    o.require(std::abs(z) < 3.0,
              fmt("%s (%d,%d)-(%d,%d): empirical %.5f vs exact %.5f, z = %+.2f", corner ? "corner variance" : "pair",
                  q.i, q.j, q.k, q.l, est[p].estimate, exact, z));
  }
  return o;
}

Outcome ac3() {
  Outcome o;
  const HurstPair hurst(0.55, 0.55);
  const GridSpec finest(2.0, 2.0, 32, 32);
  const SheetIncrements incr = fbs::sample_sheet(finest, hurst, 1).first;
  std::vector<double> dist;
  std::vector<double> resid;
  for (int n : {8, 16, 32}) {
    const GridSpec g(2.0, 2.0, n, n);
    const SheetIncrements c = coarsen(incr, 32 / n, 32 / n);
    const SheetPath b = cumulate(c);
    const SheetPath xk = ou::solve_by_kernel(c, g, 1.0);
    const SheetPath xf = ou::solve_by_fixed_point(b, g, ou::DriftParam(1.0));
    dist.push_back((xk.values - xf.values).cwiseAbs().maxCoeff());
    resid.push_back(ou::langevin_residual(xk, b, g, ou::DriftParam(1.0)));
    o.note(fmt("n = %2d: sup distance %.5e, kernel-solution residual %.5e", n, dist.back(), resid.back()));
  }
  for (int k = 0; k < 2; ++k) {
    const double r = dist[k] / dist[k + 1];
    o.require(r >= 1.5 && r <= 2.5, fmt("distance ratio n=%d/n=%d: %.3f in [1.5, 2.5]", 8 << k, 16 << k, r));
  }
  for (int k = 0; k < 2; ++k) {
    const double r = resid[k] / resid[k + 1];
    o.require(r >= 1.5 && r <= 2.5, fmt("residual ratio n=%d/n=%d: %.3f in [1.5, 2.5]", 8 << k, 16 << k, r));
  }
  return o;
}

Outcome ac4() {
  Outcome o;
  const GridSpec g(2.0, 2.0, 4, 4);
  const HurstPair hurst(0.55, 0.55);
  const fbs::SheetSampler sampler(g, hurst);
  const auto h = chaos::kernel_matrix(g, ou::DriftParam(1.0));
  const auto diag = chaos::normality_gap(h, sampler.covariance());
  const int n = 20000;
  std::vector<double> f(n);
  for (int r = 0; r < n; ++r) f[r] = est::wick_double_integral(h, sampler.sample_increments(4004, r), sampler.covariance());
  const SampleStats s = sample_stats(f);
  o.note(fmt("sample mean %.5f (exact 0)", s.mean));
  o.require(std::abs(s.var - diag.sigma2) < 3.0 * s.var_se,
            fmt("variance: sample %.5f +- %.5f vs 2 tr(M^2) = %.5f, z = %+.2f", s.var, s.var_se, diag.sigma2,
                (s.var - diag.sigma2) / s.var_se));
  o.require(std::abs(s.kappa4 - diag.kappa4) < 3.0 * s.kappa4_se,
            fmt("fourth cumulant: sample %.5f +- %.5f vs 48 tr(M^4) = %.5f, z = %+.2f", s.kappa4, s.kappa4_se,
                diag.kappa4, (s.kappa4 - diag.kappa4) / s.kappa4_se));
  return o;
}

Outcome ac5() {
  Outcome o;
  std::vector<GridSpec> horizons;
  for (double t : {4.0, 8.0, 16.0}) horizons.push_back(GridSpec::with_step(t, t, 0.25));
  const auto rep = est::mc_consistency(horizons, HurstPair(0.55, 0.55), ou::DriftParam(1.0), 200, 5005);
  for (const auto& h : rep.horizons) {
    o.note(fmt("T = S = %2.0f: median |error| %.5f, IQR %.5f, failures %d", h.grid.horizon_t(), h.median_abs_error,
               h.iqr_abs_error, h.failures));
  }
  o.require(rep.batch_ok(), "no DenominatorZero failures");
  bool decreasing = true;
  for (std::size_t k = 1; k < rep.horizons.size(); ++k) {
    decreasing = decreasing && rep.horizons[k].median_abs_error < rep.horizons[k - 1].median_abs_error;
  }
  o.require(decreasing, "median |theta_hat - 1| strictly decreases across T = S in {4, 8, 16}");
  return o;
}

std::vector<GridSpec> unit_step_horizons() {
  std::vector<GridSpec> out;
  for (double t : {4.0, 8.0, 16.0, 32.0}) out.push_back(GridSpec::with_step(t, t, 1.0));
  return out;
}

Outcome ac6() {
  Outcome o;
  const HurstPair hurst(0.55, 0.55);
  std::vector<double> eps0;
  std::vector<double> eps;
  for (const GridSpec& g : unit_step_horizons()) {
    auto d = chaos::normality_gap(chaos::kernel_matrix(g, ou::DriftParam(1.0)), fbs::increment_cov(g, hurst));
    eps0.push_back(chaos::scaled_variance(d, hurst, 0.0));
    eps.push_back(chaos::scaled_variance(d, hurst, 0.05));
    o.note(fmt("T = S = %2.0f (step 1): sigma2 %.6e, scaled eps=0 %.6e, scaled eps=0.05 %.6e", g.horizon_t(), d.sigma2,
               eps0.back(), eps.back()));
  }
  double max_ratio = 0.0;
  bool decreasing = true;
  for (std::size_t k = 1; k < eps0.size(); ++k) {
    max_ratio = std::max(max_ratio, eps0[k] / eps0[k - 1]);
    decreasing = decreasing && eps[k] < eps[k - 1];
  }
  o.require(max_ratio <= 1.25, fmt("max consecutive ratio at eps = 0: %.4f (<= 1.25)", max_ratio));
  o.require(decreasing, "scaled variance at eps = 0.05 strictly decreases");
  return o;
}

Outcome ac7() {
  Outcome o;
  const HurstPair hurst(0.55, 0.55);
  std::vector<double> normalized;
  for (const GridSpec& g : unit_step_horizons()) {
    const auto m = chaos::mean_denominator(g, ou::DriftParam(1.0), fbs::increment_cov(g, hurst));
    normalized.push_back(chaos::normalized_denominator(m.mean, g, hurst, 0.05));
    o.note(fmt("T = S = %2.0f (step 1): E D %.6e, normalized %.6e", g.horizon_t(), m.mean, normalized.back()));
  }
  bool increasing = true;
  for (std::size_t k = 1; k < normalized.size(); ++k) increasing = increasing && normalized[k] > normalized[k - 1];
  o.require(increasing, "normalized mean denominator strictly increases across T = S in {4, 8, 16, 32}");
  return o;
}

Outcome ac8() {
  Outcome o;
  const HurstPair hurst(0.55, 0.55);
  std::vector<double> gaps;
  for (const GridSpec& g : unit_step_horizons()) {
    const auto d = chaos::normality_gap(chaos::kernel_matrix(g, ou::DriftParam(1.0)), fbs::increment_cov(g, hurst));
    gaps.push_back(d.normality_gap);
    o.note(fmt("T = S = %2.0f (step 1): normality gap %.6e, T * gap %.4f", g.horizon_t(), d.normality_gap,
               g.horizon_t() * d.normality_gap));
  }
  o.require(gaps.back() >= 0.5 * gaps.front(),
            fmt("gap(32) >= 0.5 gap(4): ratio gap(32)/gap(4) = %.4f", gaps.back() / gaps.front()));
  const int n = 16;
  const auto iso = chaos::normality_gap(chaos::KernelMatrix::from_dense(Eigen::MatrixXd::Identity(n, n), 4, 4),
                                        fbs::IncrementCovariance{Eigen::MatrixXd::Identity(4, 4), Eigen::MatrixXd::Identity(4, 4)});
  o.require(std::abs(iso.normality_gap - 1.0 / n) < 1e-14,
            fmt("sanity control: %d equal eigenvalues give gap %.6f (1/n = %.6f)", n, iso.normality_gap, 1.0 / n));
  return o;
}

Outcome ac9() {
  Outcome o;
  const std::int64_t n = 1 << 18;
  const auto a = singular::integral_I_mc(0.55, 0.55, n, 9009);
  const auto b = singular::integral_I_mc(0.55, 0.55, 4 * n, 9010);
  const double combined = std::hypot(a.standard_error, b.standard_error);
  o.require(std::abs(a.estimate - b.estimate) < 3.0 * combined,
            fmt("(0.55, 0.55): n = %lld gives %.1f +- %.1f, 4n gives %.1f +- %.1f, |diff| / combined SE = %.2f",
                static_cast<long long>(n), a.estimate, a.standard_error, b.estimate, b.standard_error,
                std::abs(a.estimate - b.estimate) / combined));

  const auto scan = singular::finiteness_scan({0.55}, {0.52, 0.56, 0.60, 0.62}, 1 << 20, 9011);
  bool increasing = true;
  for (std::size_t k = 0; k < scan.size(); ++k) {
    o.note(fmt("alpha 0.55, beta %.2f: I = %.1f +- %.1f", scan[k].beta, scan[k].result->estimate,
               scan[k].result->standard_error));
    if (k > 0) increasing = increasing && scan[k].result->estimate > scan[k - 1].result->estimate;
  }
  o.require(increasing, "estimates strictly increase along beta in {0.52, 0.56, 0.60, 0.62}");

  RandomStream rng(9012, 0);
  int held = 0;
  int tried = 0;
  double worst = 0.0;
  while (tried < 50) {
    const double beta = 0.5 + 0.125 * rng.uniform_open();
    const double v = rng.uniform_open();
    const double s0 = rng.uniform_open();
    if (beta == 0.625 || v == s0) continue;
    ++tried;
    const auto red = singular::beta_reduction_check(beta, v, s0);
    held += red.lhs <= red.rhs * (1.0 + 1e-8);
    worst = std::max(worst, red.lhs / red.rhs);
  }
  o.require(held == 50, fmt("lhs <= rhs on %d of 50 random (beta, v, s0) triples, max lhs/rhs = %.6f", held, worst));

  double worst_beta = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double x = 0.1 + 2.9 * rng.uniform();
    const double y = 0.1 + 2.9 * rng.uniform();
    const double g = singular::gamma_fn(x) * singular::gamma_fn(y) / singular::gamma_fn(x + y);
    worst_beta = std::max(worst_beta, std::abs(singular::beta_fn(x, y) - g) / std::max(1.0, g));
  }
  double worst_gamma = 0.0;
  double fact = 1.0;
  for (int k = 1; k <= 10; ++k) {
    worst_gamma = std::max(worst_gamma, std::abs(singular::gamma_fn(k) - fact) / fact);
    fact *= k;
  }
  worst_gamma = std::max(worst_gamma, std::abs(singular::gamma_fn(0.5) - std::sqrt(std::numbers::pi)));
  o.require(worst_beta < 1e-10 && worst_gamma < 1e-10,
            fmt("Beta = Gamma Gamma / Gamma at 20 points: max err %.2e; Gamma exact values: max rel err %.2e",
                worst_beta, worst_gamma));
  return o;
}

Outcome ac10() {
  Outcome o;
  using namespace fou::harness;
  const std::vector<std::string> configs = {
      "kind = simulate\nseed = 3\n[grid]\nhorizons = 2\ncell_step = 0.5\n[run]\nreplications = 50\n",
      "kind = estimate\nseed = 3\n[grid]\nhorizons = 4, 8\ncell_step = 0.5\n",
      "kind = consistency\nseed = 3\n[grid]\nhorizons = 2, 4\ncell_step = 0.5\n[run]\nreplications = 20\n",
      "kind = variance-scaling\nseed = 3\n[grid]\nhorizons = 4, 8\ncell_step = 1\n",
      "kind = denominator-growth\nseed = 3\n[grid]\nhorizons = 4, 8\ncell_step = 1\n",
      "kind = normality-gap\nseed = 3\n[grid]\nhorizons = 4, 8\ncell_step = 1\n",
      "kind = lemma-integral\nseed = 3\n[run]\nsamples = 20000\nbetas = 0.55, 0.6\n",
      "kind = bessel-check\nseed = 3\n",
  };
  for (const auto& text : configs) {
    const ExperimentConfig cfg = parse_config(text);
    const RunReport r1 = run_experiment(cfg, 1);
    const RunReport r2 = run_experiment(parse_config(text), 2);
    const bool same = report_json(r1) == report_json(r2) && report_csv(r1) == report_csv(r2);
    o.require(same, fmt("%s: two runs give byte-identical JSON and CSV", std::string(kind_name(cfg.kind)).c_str()));
  }
  for (const char* kind : {"consistency", "variance-scaling", "normality-gap"}) {
    for (const char* field : {"alpha = 0.7", "beta = 0.625"}) {
      bool rejected = false;
      try {
        parse_config(std::string("kind = ") + kind + "\n[model]\n" + field + "\n[grid]\nhorizons = 4\ncell_step = 1\n");
      } catch (const ValidationError& e) {
        rejected = std::string(e.what()).find("(1/2, 5/8)") != std::string::npos;
      }
      o.require(rejected, fmt("%s with %s rejected naming the regime (1/2, 5/8)", kind, field));
    }
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
      {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}, {"AC10", ac10},
  };
  std::vector<std::string> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      only.push_back(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--only ACn]...\n", argv[0]);
      return 2;
    }
  }
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = run();
    } catch (const std::exception& e) {
      out.require(false, std::string("error: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s (%.1f s)\n", name.c_str(), out.pass ? "PASS" : "FAIL", secs);
    for (const auto& d : out.details) std::printf("    %s\n", d.c_str());
    std::fflush(stdout);
    failures += out.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
