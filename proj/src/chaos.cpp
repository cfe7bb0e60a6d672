#include "fou_sheet/chaos.hpp"

#include <cmath>
#include <string>

#include "fou_sheet/errors.hpp"

namespace fou::chaos {

namespace {

using RowMajorMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

void require_cov_dims(const fbs::IncrementCovariance& cov, int cells_t, int cells_s) {
  if (cov.cov_t.rows() != cells_t || cov.cov_s.rows() != cells_s) {
    throw DimensionMismatch("covariance factors are " + std::to_string(cov.cov_t.rows()) + "/" +
                            std::to_string(cov.cov_s.rows()) + " but the kernel has " + std::to_string(cells_t) +
                            "x" + std::to_string(cells_s) + " cells");
  }
}

// Sum over i of cov(i - a, i): total covariance along the a-th subdiagonal.
Eigen::VectorXd subdiagonal_sums(const Eigen::MatrixXd& cov) {
  const Eigen::Index n = cov.rows();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index i = a; i < n; ++i) out(a) += cov(i - a, i);
  }
  return out;
}

}  // namespace

KernelMatrix KernelMatrix::ou_sheet(const GridSpec& grid, ou::DriftParam theta) {
  KernelMatrix k(grid.cells_t(), grid.cells_s());
  const ou::KernelField field(theta);
  k.gaps_.resize(grid.cells_t(), grid.cells_s());
  for (int a = 0; a < grid.cells_t(); ++a) {
    for (int b = 0; b < grid.cells_s(); ++b) k.gaps_(a, b) = field.at_gap(a * grid.step_t(), b * grid.step_s());
  }
  k.grid_ = grid;
  return k;
}

KernelMatrix KernelMatrix::from_dense(Eigen::MatrixXd symmetric, int cells_t, int cells_s) {
  if (symmetric.rows() != symmetric.cols() || symmetric.rows() != static_cast<Eigen::Index>(cells_t) * cells_s) {
    throw DimensionMismatch("kernel matrix must be square of size cells_t * cells_s");
  }
  const double asym = (symmetric - symmetric.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(1.0, symmetric.cwiseAbs().maxCoeff())) {
    throw InvalidArgument("kernel matrix must be symmetric");
  }
  KernelMatrix k(cells_t, cells_s);
  k.dense_ = std::move(symmetric);
  return k;
}

double KernelMatrix::entry(int c, int c2) const {
  if (dense_) return (*dense_)(c, c2);
  const int a = c / cells_s_ - c2 / cells_s_;
  const int b = c % cells_s_ - c2 % cells_s_;
  double value = 0.0;
  if (a >= 0 && b >= 0) value += gaps_(a, b);
  if (a <= 0 && b <= 0) value += gaps_(-a, -b);
  return 0.5 * value;
}

Eigen::MatrixXd KernelMatrix::dense() const {
  if (dense_) return *dense_;
  const int n = size();
  Eigen::MatrixXd out(n, n);
  for (int c = 0; c < n; ++c) {
    for (int c2 = 0; c2 < n; ++c2) out(c, c2) = entry(c, c2);
  }
  return out;
}

Eigen::MatrixXd KernelMatrix::apply_causal(const Eigen::MatrixXd& incr) const {
  if (dense_) throw InvalidArgument("apply_causal needs a structured OU-sheet kernel");
  if (incr.rows() != cells_t_ || incr.cols() != cells_s_) throw DimensionMismatch("apply_causal: increment shape");
  Eigen::MatrixXd out(cells_t_, cells_s_);
  for (int i = 0; i < cells_t_; ++i) {
    for (int j = 0; j < cells_s_; ++j) {
      double acc = 0.0;
      for (int k = 0; k <= i; ++k) {
        for (int l = 0; l <= j; ++l) acc += gaps_(i - k, j - l) * incr(k, l);
      }
      out(i, j) = acc;
    }
  }
  return out;
}

double KernelMatrix::quadratic_form(const Eigen::MatrixXd& incr) const {
  if (incr.rows() != cells_t_ || incr.cols() != cells_s_) throw DimensionMismatch("quadratic_form: increment shape");
  if (dense_) {
    const Eigen::VectorXd v = flatten_cells(incr);
    return v.dot(*dense_ * v);
  }
  return apply_causal(incr).cwiseProduct(incr).sum();
}

double KernelMatrix::trace_product(const fbs::IncrementCovariance& cov) const {
  require_cov_dims(cov, cells_t_, cells_s_);
  if (dense_) {
    double acc = 0.0;
    const int n = size();
    for (int c = 0; c < n; ++c) {
      for (int c2 = 0; c2 < n; ++c2) acc += (*dense_)(c, c2) * cov.at(c2, c);
    }
    return acc;
  }
  // tr(H C) = tr(K C) = sum_{a,b >= 0} W(a, b) Dt(a) Ds(b).
  const Eigen::VectorXd dt = subdiagonal_sums(cov.cov_t);
  const Eigen::VectorXd ds = subdiagonal_sums(cov.cov_s);
  return dt.dot(gaps_ * ds);
}

KernelMatrix kernel_matrix(const GridSpec& grid, ou::DriftParam theta) { return KernelMatrix::ou_sheet(grid, theta); }

Eigen::MatrixXd kernel_times_cov(const KernelMatrix& h, const fbs::IncrementCovariance& cov) {
  require_cov_dims(cov, h.cells_t(), h.cells_s());
  const int nt = h.cells_t();
  const int ns = h.cells_s();
  const Eigen::MatrixXd dense = h.dense();
  // Column c of C H is vec(cov_t R cov_s) with R the row-major reshape of H's column c.
  Eigen::MatrixXd ch(dense.rows(), dense.cols());
  Eigen::MatrixXd column(nt, ns);
  for (Eigen::Index c = 0; c < dense.cols(); ++c) {
    Eigen::VectorXd src = dense.col(c);
    const RowMajorMap r(src.data(), nt, ns);
    Eigen::VectorXd dst(dense.rows());
    RowMajorMap out(dst.data(), nt, ns);
    out.noalias() = cov.cov_t * r * cov.cov_s;
    ch.col(c) = dst;
  }
  return ch.transpose();
}

double variance_f(const KernelMatrix& h, const fbs::IncrementCovariance& cov) {
  const Eigen::MatrixXd m = kernel_times_cov(h, cov);
  return 2.0 * m.cwiseProduct(m.transpose()).sum();
}

ChaosDiagnostics normality_gap(const KernelMatrix& h, const fbs::IncrementCovariance& cov) {
  const Eigen::MatrixXd m = kernel_times_cov(h, cov);
  const double tr2 = m.cwiseProduct(m.transpose()).sum();
  if (!(tr2 > 0.0)) throw ZeroVariance("normality_gap: the second-chaos variable has zero variance");
  Eigen::MatrixXd m2(m.rows(), m.cols());
  m2.noalias() = m * m;
  const double tr4 = m2.cwiseProduct(m2.transpose()).sum();
  ChaosDiagnostics diag;
  diag.sigma2 = 2.0 * tr2;
  diag.kappa4 = 48.0 * tr4;
  diag.trace_m2 = tr2;
  diag.trace_m4 = tr4;
  diag.normality_gap = tr4 / (tr2 * tr2);
  diag.horizon = h.grid();
  return diag;
}

double variance_scaling_factor(double horizon_t, double horizon_s, const HurstPair& hurst, double epsilon) {
  if (!hurst.theorem_regime()) {
    throw RangeError("variance scaling requires alpha, beta in the theorem regime (1/2, 5/8)");
  }
  if (!(horizon_t > 1.0 && horizon_s > 1.0)) throw RangeError("variance scaling requires T, S > 1");
  if (!(epsilon >= 0.0)) throw InvalidArgument("epsilon must be >= 0");
  const double et = -2.0 * hurst.alpha() + 0.25 - epsilon;
  const double es = -2.0 * hurst.beta() + 0.25 - epsilon;
  return std::pow(horizon_t, 2.0 * et) * std::pow(horizon_s, 2.0 * es);
}

double scaled_variance(const ChaosDiagnostics& diag, const HurstPair& hurst, double epsilon) {
  if (!diag.horizon) throw InvalidArgument("scaled_variance: diagnostics carry no horizon");
  return diag.sigma2 * variance_scaling_factor(diag.horizon->horizon_t(), diag.horizon->horizon_s(), hurst, epsilon);
}

DenominatorMoments mean_denominator(const GridSpec& grid, ou::DriftParam theta, const fbs::IncrementCovariance& cov) {
  require_cov_dims(cov, grid.cells_t(), grid.cells_s());
  const KernelMatrix k = KernelMatrix::ou_sheet(grid, theta);
  const Eigen::MatrixXd& w = k.gap_table();
  const int nt = grid.cells_t();
  const int ns = grid.cells_s();
  DenominatorMoments out;
  out.cell_second_moment.resize(nt, ns);
  Eigen::MatrixXd row(nt, ns);
  for (int i = 0; i < nt; ++i) {
    for (int j = 0; j < ns; ++j) {
      // Kernel row of cell (i, j) restricted to its support [0, i] x [0, j].
      const int rt = i + 1;
      const int rs = j + 1;
      for (int k2 = 0; k2 < rt; ++k2) {
        for (int l = 0; l < rs; ++l) row(k2, l) = w(i - k2, j - l);
      }
      const auto r = row.topLeftCorner(rt, rs);
      const Eigen::MatrixXd weighted = cov.cov_t.topLeftCorner(rt, rt) * r * cov.cov_s.topLeftCorner(rs, rs);
      out.cell_second_moment(i, j) = weighted.cwiseProduct(r).sum();
    }
  }
  out.mean = out.cell_second_moment.sum() * grid.cell_area();
  return out;
}

double normalized_denominator(double mean, const GridSpec& grid, const HurstPair& hurst, double epsilon) {
  if (!(epsilon >= 0.0)) throw InvalidArgument("epsilon must be >= 0");
  return mean / (std::pow(grid.horizon_t(), 2.0 * hurst.alpha() + 0.5 - epsilon) *
                 std::pow(grid.horizon_s(), 2.0 * hurst.beta() + 0.5 - epsilon));
}

}  // namespace fou::chaos
