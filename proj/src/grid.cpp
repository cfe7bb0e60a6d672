#include "fou_sheet/grid.hpp"

#include <cmath>
#include <string>

#include "fou_sheet/errors.hpp"

namespace fou {

namespace {

bool open_unit_half(double h) { return std::isfinite(h) && h > 0.5 && h < 1.0; }

}  // namespace

HurstPair::HurstPair(double alpha, double beta) : alpha_(alpha), beta_(beta) {
  if (!open_unit_half(alpha) || !open_unit_half(beta)) {
    throw InvalidArgument("Hurst exponents must lie in (1/2, 1); got alpha=" + std::to_string(alpha) +
                          ", beta=" + std::to_string(beta));
  }
}

bool in_theorem_regime(double h) { return h > 0.5 && h < HurstPair::kTheoremUpper; }

bool HurstPair::theorem_regime() const { return in_theorem_regime(alpha_) && in_theorem_regime(beta_); }

GridSpec::GridSpec(double horizon_t, double horizon_s, int cells_t, int cells_s)
    : horizon_t_(horizon_t), horizon_s_(horizon_s), cells_t_(cells_t), cells_s_(cells_s) {
  if (!(std::isfinite(horizon_t) && horizon_t > 0.0 && std::isfinite(horizon_s) && horizon_s > 0.0)) {
    throw InvalidArgument("grid horizons must be finite and positive");
  }
  if (cells_t < 1 || cells_s < 1) throw InvalidArgument("grid needs at least one cell per direction");
}

GridSpec GridSpec::with_step(double horizon_t, double horizon_s, double step) {
  if (!(std::isfinite(step) && step > 0.0)) throw InvalidArgument("cell step must be positive");
  auto cells = [step](double horizon) {
    const double ratio = horizon / step;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
      throw InvalidArgument("horizon " + std::to_string(horizon) + " is not a multiple of the cell step " +
                            std::to_string(step));
    }
    return static_cast<int>(rounded);
  };
  return GridSpec(horizon_t, horizon_s, cells(horizon_t), cells(horizon_s));
}

SheetPath cumulate(const SheetIncrements& incr) {
  const Eigen::Index nt = incr.values.rows();
  const Eigen::Index ns = incr.values.cols();
  SheetPath path{Eigen::MatrixXd::Zero(nt + 1, ns + 1)};
  for (Eigen::Index i = 0; i < nt; ++i) {
    for (Eigen::Index j = 0; j < ns; ++j) {
      path.values(i + 1, j + 1) =
          incr.values(i, j) + path.values(i, j + 1) + path.values(i + 1, j) - path.values(i, j);
    }
  }
  return path;
}

SheetIncrements increments_of(const SheetPath& path) {
  const Eigen::Index nt = path.values.rows() - 1;
  const Eigen::Index ns = path.values.cols() - 1;
  SheetIncrements incr{Eigen::MatrixXd(nt, ns)};
  for (Eigen::Index i = 0; i < nt; ++i) {
    for (Eigen::Index j = 0; j < ns; ++j) {
      incr.values(i, j) =
          path.values(i + 1, j + 1) - path.values(i, j + 1) - path.values(i + 1, j) + path.values(i, j);
    }
  }
  return incr;
}

SheetIncrements coarsen(const SheetIncrements& fine, int factor_t, int factor_s) {
  if (factor_t < 1 || factor_s < 1 || fine.values.rows() % factor_t != 0 || fine.values.cols() % factor_s != 0) {
    throw DimensionMismatch("coarsening factors must divide the fine grid");
  }
  const Eigen::Index nt = fine.values.rows() / factor_t;
  const Eigen::Index ns = fine.values.cols() / factor_s;
  SheetIncrements coarse{Eigen::MatrixXd(nt, ns)};
  for (Eigen::Index i = 0; i < nt; ++i) {
    for (Eigen::Index j = 0; j < ns; ++j) {
      coarse.values(i, j) = fine.values.block(i * factor_t, j * factor_s, factor_t, factor_s).sum();
    }
  }
  return coarse;
}

Eigen::VectorXd flatten_cells(const Eigen::MatrixXd& cells) {
  Eigen::VectorXd out(cells.size());
  const Eigen::Index ns = cells.cols();
  for (Eigen::Index i = 0; i < cells.rows(); ++i) {
    for (Eigen::Index j = 0; j < ns; ++j) out(i * ns + j) = cells(i, j);
  }
  return out;
}

void require_matches(const SheetIncrements& incr, const GridSpec& grid) {
  if (incr.values.rows() != grid.cells_t() || incr.values.cols() != grid.cells_s()) {
    throw DimensionMismatch("increments are " + std::to_string(incr.values.rows()) + "x" +
                            std::to_string(incr.values.cols()) + " but the grid has " +
                            std::to_string(grid.cells_t()) + "x" + std::to_string(grid.cells_s()) + " cells");
  }
}

void require_matches(const SheetPath& path, const GridSpec& grid) {
  if (path.values.rows() != grid.cells_t() + 1 || path.values.cols() != grid.cells_s() + 1) {
    throw DimensionMismatch("path has " + std::to_string(path.values.rows()) + "x" +
                            std::to_string(path.values.cols()) + " nodes but the grid has " +
                            std::to_string(grid.cells_t() + 1) + "x" + std::to_string(grid.cells_s() + 1));
  }
}

}  // namespace fou
