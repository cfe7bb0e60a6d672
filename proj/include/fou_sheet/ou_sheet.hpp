#pragma once

#include <Eigen/Dense>

#include "fou_sheet/grid.hpp"
#include "fou_sheet/specfun.hpp"

namespace fou::ou {

/// Drift parameter theta > 0 of the Langevin sheet equation.
class DriftParam {
 public:
  explicit DriftParam(double theta);
  double value() const { return theta_; }

 private:
  double theta_;
};

/// The solution kernel f(t, s, u, v) = 1{u <= t} 1{v <= s} J0(2 sqrt(theta (t-u)(s-v))).
///
/// The indicators are closed, so f = 1 on the edges u = t or v = s.
class KernelField {
 public:
  explicit KernelField(DriftParam theta, specfun::BesselConfig bessel = {});

  double operator()(double t, double s, double u, double v) const;

  /// Kernel value for nonnegative gaps dt = t - u, ds = s - v.
  double at_gap(double dt, double ds) const;

  double theta() const { return theta_; }

 private:
  double theta_;
  specfun::BesselConfig bessel_;
};

double kernel_f(double t, double s, double u, double v, DriftParam theta);

/// X at node (i, j) = sum_{k<i, l<j} f(t_i, s_j, mid_t(k), mid_s(l)) dB_{kl}.
///
/// theta >= 0; theta = 0 gives f = 1 on the support and X = cumulate(dB).
SheetPath solve_by_kernel(const SheetIncrements& incr, const GridSpec& grid, double theta);

/// Cell value used by the discrete double integral.
enum class CellRule {
  /// X at the lower-left node (k, l): the plain double cumulative sum.
  /// First order; agrees with solve_by_kernel to O(h_t + h_s).
  kLowerLeft,
  /// Average of the anti-diagonal corners (k+1, l) and (k, l+1). Exact at
  /// the midpoint for linear fields; agrees with solve_by_kernel to second order.
  kAntiDiagonal,
};

/// Discrete double integral Q(i, j) = h_t h_s sum_{k<i, l<j} xbar_{kl} with
/// the cell value xbar given by `rule`. Neither rule reads node (i, j) when
/// forming Q(i, j), so the map X -> Q(X) is strictly causal.
Eigen::MatrixXd cell_double_integral(const SheetPath& x, const GridSpec& grid, CellRule rule = CellRule::kLowerLeft);

/// Picard iteration X <- B - theta Q(X), started from X = B. Stops at the
/// first iterate X with sup|(B - theta Q(X)) - X| < tol and returns that X,
/// so langevin_residual(X) < tol on return. Strict causality makes the map
/// nilpotent, so the iteration terminates after at most n_t + n_s + 1 steps
/// unless round-off interferes; max_iter bounds it anyway.
SheetPath solve_by_fixed_point(const SheetPath& sheet_b, const GridSpec& grid, DriftParam theta, int max_iter = 1000,
                               double tol = 1e-12, CellRule rule = CellRule::kLowerLeft);

/// max over nodes of |X + theta Q(X) - B|.
double langevin_residual(const SheetPath& x, const SheetPath& sheet_b, const GridSpec& grid, DriftParam theta,
                         CellRule rule = CellRule::kLowerLeft);

}  // namespace fou::ou
