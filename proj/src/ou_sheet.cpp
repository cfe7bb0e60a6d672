#include "fou_sheet/ou_sheet.hpp"

#include <cmath>
#include <string>

#include "fou_sheet/errors.hpp"

namespace fou::ou {

DriftParam::DriftParam(double theta) : theta_(theta) {
  if (!(std::isfinite(theta) && theta > 0.0)) {
    throw InvalidArgument("drift parameter theta must be > 0, got " + std::to_string(theta));
  }
}

KernelField::KernelField(DriftParam theta, specfun::BesselConfig bessel)
    : theta_(theta.value()), bessel_(bessel) {}

double KernelField::at_gap(double dt, double ds) const {
  if (dt < 0.0 || ds < 0.0) return 0.0;
  return specfun::j0(2.0 * std::sqrt(theta_ * dt * ds), bessel_);
}

double KernelField::operator()(double t, double s, double u, double v) const {
  if (t < 0.0 || s < 0.0 || u < 0.0 || v < 0.0) throw RangeError("kernel_f: coordinates must be >= 0");
  return at_gap(t - u, s - v);
}

double kernel_f(double t, double s, double u, double v, DriftParam theta) {
  return KernelField(theta)(t, s, u, v);
}

SheetPath solve_by_kernel(const SheetIncrements& incr, const GridSpec& grid, double theta) {
  require_matches(incr, grid);
  if (!(std::isfinite(theta) && theta >= 0.0)) throw InvalidArgument("solve_by_kernel: theta must be >= 0");
  const int nt = grid.cells_t();
  const int ns = grid.cells_s();
  const double ht = grid.step_t();
  const double hs = grid.step_s();

  // Node (i, j) sees cell (k, l) at gaps (i - k - 1/2) h_t, (j - l - 1/2) h_s,
  // so the weights form a table indexed by a = i - k >= 1, b = j - l >= 1.
  Eigen::MatrixXd weight(nt + 1, ns + 1);
  weight.setZero();
  for (int a = 1; a <= nt; ++a) {
    for (int b = 1; b <= ns; ++b) {
      weight(a, b) = specfun::j0(2.0 * std::sqrt(theta * (a - 0.5) * ht * (b - 0.5) * hs));
    }
  }

  SheetPath x{Eigen::MatrixXd::Zero(nt + 1, ns + 1)};
  for (int i = 1; i <= nt; ++i) {
    for (int j = 1; j <= ns; ++j) {
      double acc = 0.0;
      for (int k = 0; k < i; ++k) {
        for (int l = 0; l < j; ++l) acc += weight(i - k, j - l) * incr.values(k, l);
      }
      x.values(i, j) = acc;
    }
  }
  return x;
}

Eigen::MatrixXd cell_double_integral(const SheetPath& x, const GridSpec& grid, CellRule rule) {
  require_matches(x, grid);
  const int nt = grid.cells_t();
  const int ns = grid.cells_s();
  const double area = grid.cell_area();
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(nt + 1, ns + 1);
  for (int i = 1; i <= nt; ++i) {
    for (int j = 1; j <= ns; ++j) {
      const double cell = rule == CellRule::kLowerLeft ? x.values(i - 1, j - 1)
                                                       : 0.5 * (x.values(i, j - 1) + x.values(i - 1, j));
      q(i, j) = area * cell + q(i - 1, j) + q(i, j - 1) - q(i - 1, j - 1);
    }
  }
  return q;
}

namespace {

void require_zero_boundary(const SheetPath& path, const char* what) {
  if (path.values.row(0).cwiseAbs().maxCoeff() != 0.0 || path.values.col(0).cwiseAbs().maxCoeff() != 0.0) {
    throw InvalidArgument(std::string(what) + ": path must vanish on the first row and column");
  }
}

}  // namespace

SheetPath solve_by_fixed_point(const SheetPath& sheet_b, const GridSpec& grid, DriftParam theta, int max_iter,
                               double tol, CellRule rule) {
  require_matches(sheet_b, grid);
  require_zero_boundary(sheet_b, "solve_by_fixed_point");
  if (!(tol > 0.0)) throw InvalidArgument("solve_by_fixed_point: tol must be > 0");
  if (max_iter < 1) throw InvalidArgument("solve_by_fixed_point: max_iter must be >= 1");

  SheetPath x = sheet_b;
  for (int iter = 0; iter < max_iter; ++iter) {
    Eigen::MatrixXd next = sheet_b.values - theta.value() * cell_double_integral(x, grid, rule);
    const double change = (next - x.values).cwiseAbs().maxCoeff();
    if (change < tol) return x;
    x.values = std::move(next);
  }
  throw MaxIterExceeded("solve_by_fixed_point: no convergence to tol=" + std::to_string(tol) + " within " +
                        std::to_string(max_iter) + " iterations");
}

double langevin_residual(const SheetPath& x, const SheetPath& sheet_b, const GridSpec& grid, DriftParam theta,
                         CellRule rule) {
  require_matches(x, grid);
  require_matches(sheet_b, grid);
  return (x.values + theta.value() * cell_double_integral(x, grid, rule) - sheet_b.values).cwiseAbs().maxCoeff();
}

}  // namespace fou::ou
