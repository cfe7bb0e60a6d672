#include "fou_sheet/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>
#include <string>

#include "fou_sheet/errors.hpp"
#include "fou_sheet/parallel.hpp"

namespace fou::est {

double wick_double_integral(const chaos::KernelMatrix& h, const SheetIncrements& incr,
                            const fbs::IncrementCovariance& cov) {
  if (incr.values.rows() != h.cells_t() || incr.values.cols() != h.cells_s()) {
    throw DimensionMismatch("wick_double_integral: increments do not match the kernel grid");
  }
  return h.quadratic_form(incr.values) - h.trace_product(cov);
}

OracleEstimator::OracleEstimator(const GridSpec& grid, const HurstPair& hurst, ou::DriftParam theta)
    : grid_(grid),
      hurst_(hurst),
      theta_(theta.value()),
      kernel_(chaos::KernelMatrix::ou_sheet(grid, theta)),
      cov_(fbs::increment_cov(grid, hurst)),
      trace_(kernel_.trace_product(cov_)) {}

Eigen::MatrixXd OracleEstimator::cell_field(const SheetIncrements& incr) const {
  require_matches(incr, grid_);
  return kernel_.apply_causal(incr.values);
}

EstimateResult OracleEstimator::estimate(const SheetIncrements& incr, std::uint64_t seed) const {
  const Eigen::MatrixXd field = cell_field(incr);
  const double denominator = grid_.cell_area() * field.squaredNorm();
  if (!(denominator > 0.0)) throw DenominatorZero("lse_oracle: the discrete integral of X^2 is zero");
  const double f = field.cwiseProduct(incr.values).sum() - trace_;
  return {theta_ - f / denominator, f, denominator, grid_, hurst_, seed};
}

EstimateResult lse_oracle(const SheetIncrements& incr, const GridSpec& grid, const HurstPair& hurst,
                          ou::DriftParam theta_true, std::uint64_t seed) {
  return OracleEstimator(grid, hurst, theta_true).estimate(incr, seed);
}

EstimateResult lse_pathwise(const SheetPath& x, const GridSpec& grid) {
  require_matches(x, grid);
  const int nt = grid.cells_t();
  const int ns = grid.cells_s();
  if (x.values.row(0).cwiseAbs().maxCoeff() != 0.0 || x.values.col(0).cwiseAbs().maxCoeff() != 0.0) {
    throw InvalidArgument("lse_pathwise: path must vanish on the first row and column");
  }
  const SheetIncrements dx = increments_of(x);
  const auto left = x.values.topLeftCorner(nt, ns);
  const double denominator = grid.cell_area() * left.squaredNorm();
  if (!(denominator > 0.0)) throw DenominatorZero("lse_pathwise: the discrete integral of X^2 is zero");
  const double nominator = left.cwiseProduct(dx.values).sum();
  return {-nominator / denominator, nominator, denominator, grid, std::nullopt, 0};
}

EstimateResult lse_pathwise_cells(const OracleEstimator& oracle, const SheetIncrements& incr, std::uint64_t seed) {
  const EstimateResult base = oracle.estimate(incr, seed);
  // sum Xc (dB - theta a Xc) = (F + tr) - theta D
  const double nominator = base.nominator + oracle.trace_correction() - oracle.theta() * base.denominator;
  EstimateResult out = base;
  out.nominator = nominator;
  out.theta_hat = -nominator / base.denominator;
  return out;
}

bool ConsistencyReport::batch_ok() const {
  return std::all_of(horizons.begin(), horizons.end(), [](const HorizonSummary& h) { return h.failures == 0; });
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw InvalidArgument("quantile: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("quantile: p must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

void check_common_step(const std::vector<GridSpec>& horizons) {
  const GridSpec& first = horizons.front();
  for (const auto& g : horizons) {
    const bool same_t = std::abs(g.step_t() - first.step_t()) <= 1e-12 * first.step_t();
    const bool same_s = std::abs(g.step_s() - first.step_s()) <= 1e-12 * first.step_s();
    if (!same_t || !same_s) throw InvalidArgument("mc_consistency: all horizons must share the cell step");
  }
}

}  // namespace

ConsistencyReport mc_consistency(const std::vector<GridSpec>& horizons, const HurstPair& hurst, ou::DriftParam theta,
                                 int replications, std::uint64_t seed, int workers) {
  if (horizons.empty()) throw InvalidArgument("mc_consistency: no horizons given");
  if (replications < 1) throw InvalidArgument("mc_consistency: replications must be >= 1");
  if (!hurst.theorem_regime()) {
    throw RangeError("mc_consistency: alpha, beta must lie in the theorem regime (1/2, 5/8)");
  }
  check_common_step(horizons);
  if (workers < 1) workers = worker_count();

  ConsistencyReport report;
  report.replications = replications;
  report.theta = theta.value();
  report.seed = seed;

  for (std::size_t k = 0; k < horizons.size(); ++k) {
    const GridSpec& grid = horizons[k];
    const fbs::SheetSampler sampler(grid, hurst);
    const OracleEstimator oracle(grid, hurst, theta);
    std::vector<std::optional<double>> slot(static_cast<std::size_t>(replications));
    parallel_for(
        slot.size(),
        [&](std::size_t r) {
          const std::uint64_t index = (static_cast<std::uint64_t>(k) << 32) | r;
          try {
            slot[r] = oracle.estimate(sampler.sample_increments(seed, index), seed).theta_hat - theta.value();
          } catch (const DenominatorZero&) {
            slot[r].reset();
          }
        },
        workers);

    HorizonSummary summary{grid, 0.0, 0.0, 0.0, 0.0, 0, {}};
    std::vector<double> abs_errors;
    for (const auto& e : slot) {
      if (!e) {
        ++summary.failures;
        continue;
      }
      summary.errors.push_back(*e);
      abs_errors.push_back(std::abs(*e));
    }
    if (!abs_errors.empty()) {
      double sum = 0.0;
      for (double e : summary.errors) sum += e;
      summary.mean_error = sum / static_cast<double>(summary.errors.size());
      summary.median_abs_error = quantile(abs_errors, 0.5);
      summary.iqr_abs_error = quantile(abs_errors, 0.75) - quantile(abs_errors, 0.25);
      summary.iqr_error = quantile(summary.errors, 0.75) - quantile(summary.errors, 0.25);
    }
    report.horizons.push_back(std::move(summary));
  }
  return report;
}

}  // namespace fou::est
