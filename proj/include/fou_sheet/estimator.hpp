#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "fou_sheet/chaos.hpp"
#include "fou_sheet/fbs.hpp"
#include "fou_sheet/grid.hpp"
#include "fou_sheet/ou_sheet.hpp"

namespace fou::est {

/// Discrete second-chaos integral dB^T H dB - tr(H C) of a cell kernel
/// against the increments, with C = cov_t (x) cov_s its Wick correction.
double wick_double_integral(const chaos::KernelMatrix& h, const SheetIncrements& incr,
                            const fbs::IncrementCovariance& cov);

struct EstimateResult {
  double theta_hat;
  double nominator;    ///< F for the oracle form, the raw product sum for pathwise forms
  double denominator;  ///< discrete double integral of X^2
  GridSpec grid;
  std::optional<HurstPair> hurst;  ///< absent for node-path estimates
  std::uint64_t seed;
};

/// Least-squares estimator with the stochastic integral taken in the
/// divergence sense and discretized as a Wick quadratic form.
///
/// The cell field Xc = K dB is the solution kernel evaluated at cell
/// midpoints. With D = h_t h_s sum Xc^2 and F = sum Xc dB - tr(H C),
/// the estimator is theta_hat = theta - F / D, which is the error identity
/// theta_hat - theta = -F / D of the continuous estimator written at the
/// discrete level. The kernel and trace depend on theta, so the estimator
/// needs the true value: it is an oracle for checking the limit theory,
/// not a procedure for data of unknown drift.
///
/// Construction caches the kernel and tr(H C); estimate() is then
/// O((n_t n_s)^2) per path and safe to call concurrently.
class OracleEstimator {
 public:
  OracleEstimator(const GridSpec& grid, const HurstPair& hurst, ou::DriftParam theta);

  EstimateResult estimate(const SheetIncrements& incr, std::uint64_t seed = 0) const;

  /// Cell field K dB.
  Eigen::MatrixXd cell_field(const SheetIncrements& incr) const;

  const chaos::KernelMatrix& kernel() const { return kernel_; }
  const fbs::IncrementCovariance& covariance() const { return cov_; }
  double trace_correction() const { return trace_; }
  const GridSpec& grid() const { return grid_; }
  double theta() const { return theta_; }

 private:
  GridSpec grid_;
  HurstPair hurst_;
  double theta_;
  chaos::KernelMatrix kernel_;
  fbs::IncrementCovariance cov_;
  double trace_;
};

EstimateResult lse_oracle(const SheetIncrements& incr, const GridSpec& grid, const HurstPair& hurst,
                          ou::DriftParam theta_true, std::uint64_t seed = 0);

/// Pathwise least squares on node values with the left-point rule:
///   theta_hat = -sum X(i, j) dX_ij / (h_t h_s sum X(i, j)^2),
/// sums over cells (i, j) with X taken at the lower-left node. For
/// alpha, beta > 1/2 the product sum carries the trace term that the
/// divergence integral removes, so this estimate does not converge to theta.
EstimateResult lse_pathwise(const SheetPath& x, const GridSpec& grid);

/// Pathwise estimate built on the same cell field as the oracle, with
/// Langevin increments dXc = dB - theta h_t h_s Xc. Its nominator is the
/// plain product sum sum Xc dXc, so
///   oracle - pathwise = tr(H C) / D
/// holds exactly up to round-off.
EstimateResult lse_pathwise_cells(const OracleEstimator& oracle, const SheetIncrements& incr, std::uint64_t seed = 0);

struct HorizonSummary {
  GridSpec grid;
  double median_abs_error = 0.0;
  double iqr_abs_error = 0.0;
  double mean_error = 0.0;
  double iqr_error = 0.0;  ///< IQR of the signed error theta_hat - theta
  int failures = 0;        ///< replications that hit DenominatorZero
  std::vector<double> errors;  ///< signed errors in replication order (failures omitted)
};

struct ConsistencyReport {
  std::vector<HorizonSummary> horizons;
  int replications = 0;
  double theta = 0.0;
  std::uint64_t seed = 0;

  /// A batch fails on any DenominatorZero occurrence.
  bool batch_ok() const;
};

/// Quantile of a sample by linear interpolation between order statistics
/// (the usual "type 7" definition); p in [0, 1].
double quantile(std::vector<double> values, double p);

/// Monte Carlo consistency experiment. Horizon k, replication r draws its
/// sheet from stream index k * 2^32 + r, so runs are reproducible and
/// horizons are independent. All horizons must share the cell step and
/// the Hurst pair must lie in the theorem regime.
ConsistencyReport mc_consistency(const std::vector<GridSpec>& horizons, const HurstPair& hurst, ou::DriftParam theta,
                                 int replications, std::uint64_t seed, int workers = -1);

}  // namespace fou::est
