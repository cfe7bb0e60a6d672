#pragma once

#include <optional>

#include <Eigen/Dense>

#include "fou_sheet/fbs.hpp"
#include "fou_sheet/grid.hpp"
#include "fou_sheet/ou_sheet.hpp"

namespace fou::chaos {

/// Symmetrized second-chaos kernel on flattened cell pairs.
///
/// For the OU sheet, H[c, c'] = (f(mid_c; mid_c') + f(mid_c'; mid_c)) / 2 with
/// f the Bessel solution kernel, so H[c, c] = 1 and H vanishes on pairs of
/// cells whose midpoints are not ordered componentwise. The increments dB
/// already carry the cell measure, so no extra area weight enters H:
/// dB^T H dB approximates the double integral of f against dB x dB.
///
/// The OU-sheet kernel depends on cell index differences only and is kept
/// as its gap table W(a, b) = f at gaps (a h_t, b h_s), a, b >= 0. Arbitrary
/// symmetric matrices are also accepted (dense storage) for checks.
class KernelMatrix {
 public:
  static KernelMatrix ou_sheet(const GridSpec& grid, ou::DriftParam theta);
  static KernelMatrix from_dense(Eigen::MatrixXd symmetric, int cells_t, int cells_s);

  int cells_t() const { return cells_t_; }
  int cells_s() const { return cells_s_; }
  int size() const { return cells_t_ * cells_s_; }
  bool structured() const { return !dense_.has_value(); }
  const std::optional<GridSpec>& grid() const { return grid_; }

  /// Gap table of the structured kernel (cells_t x cells_s).
  const Eigen::MatrixXd& gap_table() const { return gaps_; }

  double entry(int c, int c2) const;
  Eigen::MatrixXd dense() const;

  /// Cell field (K dB)_c = sum_{c'} f(mid_c; mid_c') dB_{c'} of the
  /// unsymmetrized kernel; structured kernels only. dB^T H dB = sum_c (K dB)_c dB_c.
  Eigen::MatrixXd apply_causal(const Eigen::MatrixXd& incr) const;

  /// dB^T H dB for an n_t x n_s increment matrix.
  double quadratic_form(const Eigen::MatrixXd& incr) const;

  /// tr(H C) with C = cov_t (x) cov_s; O(n_t n_s) for structured kernels.
  double trace_product(const fbs::IncrementCovariance& cov) const;

 private:
  KernelMatrix(int cells_t, int cells_s) : cells_t_(cells_t), cells_s_(cells_s) {}

  int cells_t_;
  int cells_s_;
  Eigen::MatrixXd gaps_;
  std::optional<Eigen::MatrixXd> dense_;
  std::optional<GridSpec> grid_;
};

KernelMatrix kernel_matrix(const GridSpec& grid, ou::DriftParam theta);

/// M = H C, formed as (C H)^T with the Kronecker factors applied to each
/// reshaped column of H; C itself is never materialized.
Eigen::MatrixXd kernel_times_cov(const KernelMatrix& h, const fbs::IncrementCovariance& cov);

/// E I2(H)^2 = 2 tr((H C)^2).
double variance_f(const KernelMatrix& h, const fbs::IncrementCovariance& cov);

struct ChaosDiagnostics {
  double sigma2 = 0.0;         ///< E F^2 = 2 tr(M^2)
  double kappa4 = 0.0;         ///< fourth cumulant = 48 tr(M^4)
  double normality_gap = 0.0;  ///< tr(M^4) / tr(M^2)^2
  double trace_m2 = 0.0;
  double trace_m4 = 0.0;
  std::optional<double> scaled_sigma2;
  std::optional<GridSpec> horizon;
};

/// Exact second-chaos diagnostics for F = dB^T H dB - tr(H C).
///
/// F is distributed as sum_k lambda_k (Z_k^2 - 1) with lambda the
/// eigenvalues of M = H C, so Var F = 2 sum lambda^2 and the fourth
/// cumulant is 48 sum lambda^4. For G = F / sigma, ||DG||^2 = 4 sum lambda^2 Z^2 / sigma^2
/// has mean 2 and
///   Var(||DG||^2) = 32 tr(M^4) / sigma^4 = 8 tr(M^4) / tr(M^2)^2 = (2/3) kappa4(G),
/// so the normality gap tr(M^4) / tr(M^2)^2 is Var(||DG||^2) / 8. It lies in
/// (0, 1], equals 1 for rank-one M and 1/n for n equal eigenvalues, and
/// G tends to N(0, 1) exactly when the gap tends to 0.
ChaosDiagnostics normality_gap(const KernelMatrix& h, const fbs::IncrementCovariance& cov);

/// (T^{-2 alpha + 1/4 - eps} S^{-2 beta + 1/4 - eps})^2; requires the
/// theorem regime and T, S > 1.
double variance_scaling_factor(double horizon_t, double horizon_s, const HurstPair& hurst, double epsilon);

/// sigma2 times variance_scaling_factor for the diagnostics' horizon.
double scaled_variance(const ChaosDiagnostics& diag, const HurstPair& hurst, double epsilon);

struct DenominatorMoments {
  Eigen::MatrixXd cell_second_moment;  ///< E (K dB)_c^2 per cell
  double mean = 0.0;                   ///< h_t h_s sum_c E (K dB)_c^2
};

/// Expected denominator E sum_c (K dB)_c^2 h_t h_s, each cell term being
/// k_c^T C k_c for the kernel row k_c.
DenominatorMoments mean_denominator(const GridSpec& grid, ou::DriftParam theta, const fbs::IncrementCovariance& cov);

/// mean / (T^{2 alpha + 1/2 - eps} S^{2 beta + 1/2 - eps}).
double normalized_denominator(double mean, const GridSpec& grid, const HurstPair& hurst, double epsilon);

}  // namespace fou::chaos
