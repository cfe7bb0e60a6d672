#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fou_sheet/grid.hpp"

namespace fou::fbs {

/// Covariance of a one-dimensional fBm: (t^{2h} + u^{2h} - |t - u|^{2h}) / 2.
double cov_r(double t, double u, double h);

/// Covariance matrix of the increments of fBm with exponent h over the
/// `cells` uniform cells of [0, horizon].
///
/// Entry (i, k) is the second-order difference of cov_r over the cell pair,
/// evaluated in the stationary form
///   step^{2h} (|d+1|^{2h} + |d-1|^{2h} - 2|d|^{2h}) / 2,   d = i - k,
/// which avoids subtracting the large t^{2h} terms.
Eigen::MatrixXd increment_cov_1d(double horizon, int cells, double h);

/// Covariance of the rectangular sheet increments, stored as its two
/// Kronecker factors: Cov(dB_{ij}, dB_{kl}) = cov_t(i,k) * cov_s(j,l).
struct IncrementCovariance {
  Eigen::MatrixXd cov_t;
  Eigen::MatrixXd cov_s;

  int size() const { return static_cast<int>(cov_t.rows() * cov_s.rows()); }
  /// Entry for flattened cells a = (i, j), b = (k, l).
  double at(int a, int b) const;
  /// Dense cov_t (x) cov_s; only for small grids and tests.
  Eigen::MatrixXd dense() const;
};

IncrementCovariance increment_cov(const GridSpec& grid, const HurstPair& hurst);

/// Lower Cholesky factor of a PSD matrix. On failure, adds
/// 1e-12 * trace / n to the diagonal and retries once; a second failure
/// throws FactorizationFailure.
Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& cov);

/// Exact sampler for the fractional Brownian sheet on a fixed grid.
///
/// Increments are L_t G L_s^T with L_t L_t^T = cov_t, L_s L_s^T = cov_s and
/// G a matrix of iid standard normals, filled row by row from the stream
/// (seed, replication) in the kSheet domain.
class SheetSampler {
 public:
  SheetSampler(const GridSpec& grid, const HurstPair& hurst);

  SheetIncrements sample_increments(std::uint64_t seed, std::uint64_t replication) const;
  std::pair<SheetIncrements, SheetPath> sample(std::uint64_t seed, std::uint64_t replication) const;

  const GridSpec& grid() const { return grid_; }
  const IncrementCovariance& covariance() const { return cov_; }

 private:
  GridSpec grid_;
  IncrementCovariance cov_;
  Eigen::MatrixXd chol_t_;
  Eigen::MatrixXd chol_s_;
};

/// One-shot convenience over SheetSampler.
std::pair<SheetIncrements, SheetPath> sample_sheet(const GridSpec& grid, const HurstPair& hurst,
                                                   std::uint64_t seed, std::uint64_t replication = 0);

/// Pair of nodes (i, j) and (k, l) of a SheetPath.
struct NodePair {
  int i, j, k, l;
};

struct CovarianceEstimate {
  double estimate;
  double standard_error;
};

/// Unbiased sample covariance of the node values at each pair, with the
/// Monte Carlo standard error sd(centered products) / sqrt(n).
std::vector<CovarianceEstimate> empirical_cov(std::span<const SheetPath> samples, std::span<const NodePair> pairs);

}  // namespace fou::fbs
