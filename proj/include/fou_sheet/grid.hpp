#pragma once

#include <Eigen/Dense>

namespace fou {

/// Hurst exponents of the driving sheet in the t and s directions.
///
/// Construction enforces the simulation regime 1/2 < alpha, beta < 1. The
/// narrower theorem regime (1/2, 5/8) is reported by theorem_regime() and
/// checked by the operations that rely on it.
class HurstPair {
 public:
  HurstPair(double alpha, double beta);

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

  /// True iff both exponents lie in (1/2, 5/8).
  bool theorem_regime() const;

  /// c(h) = h (2h - 1), the constant of the inner product kernel.
  double c_alpha() const { return alpha_ * (2.0 * alpha_ - 1.0); }
  double c_beta() const { return beta_ * (2.0 * beta_ - 1.0); }

  static constexpr double kTheoremUpper = 0.625;

 private:
  double alpha_;
  double beta_;
};

bool in_theorem_regime(double h);

/// Horizon [0, T] x [0, S] split into a uniform n_t x n_s cell grid.
/// Cells are indexed by their lower-left node (i, j), 0 <= i < n_t, 0 <= j < n_s.
class GridSpec {
 public:
  GridSpec(double horizon_t, double horizon_s, int cells_t, int cells_s);

  /// Grid with the given step in both directions; the horizons must be
  /// integer multiples of the step.
  static GridSpec with_step(double horizon_t, double horizon_s, double step);

  double horizon_t() const { return horizon_t_; }
  double horizon_s() const { return horizon_s_; }
  int cells_t() const { return cells_t_; }
  int cells_s() const { return cells_s_; }
  int num_cells() const { return cells_t_ * cells_s_; }

  double step_t() const { return horizon_t_ / cells_t_; }
  double step_s() const { return horizon_s_ / cells_s_; }
  double cell_area() const { return step_t() * step_s(); }

  double node_t(int i) const { return i * step_t(); }
  double node_s(int j) const { return j * step_s(); }
  double mid_t(int i) const { return (i + 0.5) * step_t(); }
  double mid_s(int j) const { return (j + 0.5) * step_s(); }

  /// Row-major flattening of cell (i, j); matches cov_t (x) cov_s.
  int cell_index(int i, int j) const { return i * cells_s_ + j; }

  bool operator==(const GridSpec&) const = default;

 private:
  double horizon_t_;
  double horizon_s_;
  int cells_t_;
  int cells_s_;
};

/// Rectangular increments of a sheet over each cell, n_t x n_s.
struct SheetIncrements {
  Eigen::MatrixXd values;
};

/// Sheet values on the (n_t + 1) x (n_s + 1) nodes. Row 0 and column 0 are zero.
struct SheetPath {
  Eigen::MatrixXd values;
};

/// Cumulative double sum with a zero first row and column.
SheetPath cumulate(const SheetIncrements& incr);

/// Rectangular increments of a node path; inverse of cumulate().
SheetIncrements increments_of(const SheetPath& path);

/// Sums blocks of factor_t x factor_s fine cells into one coarse cell.
/// Rectangular increments are additive, so this is exact.
SheetIncrements coarsen(const SheetIncrements& fine, int factor_t, int factor_s);

/// Row-major flattening of an n_t x n_s cell matrix into a vector of length n_t * n_s.
Eigen::VectorXd flatten_cells(const Eigen::MatrixXd& cells);

void require_matches(const SheetIncrements& incr, const GridSpec& grid);
void require_matches(const SheetPath& path, const GridSpec& grid);

}  // namespace fou
