#include "fou_sheet/fbs.hpp"

#include <cmath>
#include <string>

#include "fou_sheet/errors.hpp"
#include "fou_sheet/rng.hpp"

namespace fou::fbs {

double cov_r(double t, double u, double h) {
  if (!(std::isfinite(t) && std::isfinite(u))) throw NonFiniteInput("cov_r: arguments must be finite");
  if (t < 0.0 || u < 0.0) throw RangeError("cov_r: arguments must be >= 0");
  if (!(h > 0.0 && h < 1.0)) throw RangeError("cov_r: Hurst exponent must lie in (0, 1)");
  const double two_h = 2.0 * h;
  return 0.5 * (std::pow(t, two_h) + std::pow(u, two_h) - std::pow(std::abs(t - u), two_h));
}

Eigen::MatrixXd increment_cov_1d(double horizon, int cells, double h) {
  if (cells < 1 || !(horizon > 0.0)) throw InvalidArgument("increment_cov_1d: invalid grid");
  const double two_h = 2.0 * h;
  const double scale = 0.5 * std::pow(horizon / cells, two_h);
  Eigen::VectorXd lag(cells);
  for (int d = 0; d < cells; ++d) {
    lag(d) = scale * (std::pow(d + 1.0, two_h) + std::pow(std::abs(d - 1.0), two_h) - 2.0 * std::pow(d, two_h));
  }
  Eigen::MatrixXd cov(cells, cells);
  for (int i = 0; i < cells; ++i) {
    for (int k = 0; k < cells; ++k) cov(i, k) = lag(std::abs(i - k));
  }
  return cov;
}

double IncrementCovariance::at(int a, int b) const {
  const auto ns = static_cast<int>(cov_s.rows());
  return cov_t(a / ns, b / ns) * cov_s(a % ns, b % ns);
}

Eigen::MatrixXd IncrementCovariance::dense() const {
  const Eigen::Index nt = cov_t.rows();
  const Eigen::Index ns = cov_s.rows();
  Eigen::MatrixXd out(nt * ns, nt * ns);
  for (Eigen::Index i = 0; i < nt; ++i) {
    for (Eigen::Index k = 0; k < nt; ++k) out.block(i * ns, k * ns, ns, ns) = cov_t(i, k) * cov_s;
  }
  return out;
}

IncrementCovariance increment_cov(const GridSpec& grid, const HurstPair& hurst) {
  return {increment_cov_1d(grid.horizon_t(), grid.cells_t(), hurst.alpha()),
          increment_cov_1d(grid.horizon_s(), grid.cells_s(), hurst.beta())};
}

Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  const auto n = static_cast<double>(cov.rows());
  Eigen::MatrixXd jittered = cov;
  jittered.diagonal().array() += 1e-12 * cov.trace() / n;
  llt.compute(jittered);
  if (llt.info() != Eigen::Success) {
    throw FactorizationFailure("Cholesky factorization of a " + std::to_string(cov.rows()) +
                               "x" + std::to_string(cov.rows()) + " increment covariance failed after jitter");
  }
  return llt.matrixL();
}

SheetSampler::SheetSampler(const GridSpec& grid, const HurstPair& hurst)
    : grid_(grid),
      cov_(increment_cov(grid, hurst)),
      chol_t_(cholesky_with_jitter(cov_.cov_t)),
      chol_s_(cholesky_with_jitter(cov_.cov_s)) {}

SheetIncrements SheetSampler::sample_increments(std::uint64_t seed, std::uint64_t replication) const {
  RandomStream rng(seed, replication, stream_domain::kSheet);
  Eigen::MatrixXd gauss(grid_.cells_t(), grid_.cells_s());
  for (int i = 0; i < grid_.cells_t(); ++i) {
    for (int j = 0; j < grid_.cells_s(); ++j) gauss(i, j) = rng.normal();
  }
  return {chol_t_.triangularView<Eigen::Lower>() * gauss * chol_s_.transpose().triangularView<Eigen::Upper>()};
}

std::pair<SheetIncrements, SheetPath> SheetSampler::sample(std::uint64_t seed, std::uint64_t replication) const {
  SheetIncrements incr = sample_increments(seed, replication);
  SheetPath path = cumulate(incr);
  return {std::move(incr), std::move(path)};
}

std::pair<SheetIncrements, SheetPath> sample_sheet(const GridSpec& grid, const HurstPair& hurst, std::uint64_t seed,
                                                   std::uint64_t replication) {
  return SheetSampler(grid, hurst).sample(seed, replication);
}

std::vector<CovarianceEstimate> empirical_cov(std::span<const SheetPath> samples, std::span<const NodePair> pairs) {
  const std::size_t n = samples.size();
  if (n < 2) throw InvalidArgument("empirical_cov: need at least 2 samples");
  const Eigen::Index rows = samples.front().values.rows();
  const Eigen::Index cols = samples.front().values.cols();
  for (const auto& s : samples) {
    if (s.values.rows() != rows || s.values.cols() != cols) throw DimensionMismatch("empirical_cov: ragged samples");
  }
  auto in_range = [&](int i, int j) { return i >= 0 && j >= 0 && i < rows && j < cols; };

  std::vector<CovarianceEstimate> out;
  out.reserve(pairs.size());
  std::vector<double> products(n);
  for (const auto& p : pairs) {
    if (!in_range(p.i, p.j) || !in_range(p.k, p.l)) throw RangeError("empirical_cov: node index out of range");
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (const auto& s : samples) {
      mean_x += s.values(p.i, p.j);
      mean_y += s.values(p.k, p.l);
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);
    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      products[r] = (samples[r].values(p.i, p.j) - mean_x) * (samples[r].values(p.k, p.l) - mean_y);
      sum += products[r];
    }
    const double mean_product = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double v : products) ss += (v - mean_product) * (v - mean_product);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    out.push_back({sum / static_cast<double>(n - 1), sd / std::sqrt(static_cast<double>(n))});
  }
  return out;
}

}  // namespace fou::fbs
