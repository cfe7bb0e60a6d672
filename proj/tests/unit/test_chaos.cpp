#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "fou_sheet/chaos.hpp"
#include "fou_sheet/errors.hpp"
#include "fou_sheet/fbs.hpp"

using namespace fou;
using namespace fou::chaos;

namespace {
constexpr double kHalfJ0At2 = 0.11194538957061783403;

Eigen::MatrixXd permutation(const std::vector<int>& order) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(static_cast<int>(order.size()), static_cast<int>(order.size()));
  for (std::size_t i = 0; i < order.size(); ++i) p(static_cast<int>(i), order[i]) = 1.0;
  return p;
}

fbs::IncrementCovariance identity_cov(int nt, int ns) {
  return {Eigen::MatrixXd::Identity(nt, nt), Eigen::MatrixXd::Identity(ns, ns)};
}
}  // namespace

TEST_SUITE("chaos") {
  TEST_CASE("kernel matrix entries") {
    const GridSpec g(2.0, 2.0, 2, 2);
    const KernelMatrix h = kernel_matrix(g, ou::DriftParam(1.0));
    CHECK(h.structured());
    const Eigen::MatrixXd d = h.dense();
    for (int c = 0; c < 4; ++c) CHECK(d(c, c) == 1.0);
    CHECK((d - d.transpose()).cwiseAbs().maxCoeff() == 0.0);
    // cells (0,0) and (1,1): midpoint gaps (1, 1)
    CHECK(h.entry(g.cell_index(0, 0), g.cell_index(1, 1)) == doctest::Approx(kHalfJ0At2).epsilon(1e-14));
    // cells (0,1) and (1,0) are incomparable
    CHECK(h.entry(g.cell_index(0, 1), g.cell_index(1, 0)) == 0.0);
    // same row: gap (0, 1) gives J0(0) = 1, halved
    CHECK(h.entry(g.cell_index(0, 0), g.cell_index(0, 1)) == 0.5);
  }

  TEST_CASE("dense and structured kernels agree") {
    const GridSpec g(3.0, 2.0, 6, 4);
    const HurstPair hurst(0.55, 0.6);
    const KernelMatrix h = kernel_matrix(g, ou::DriftParam(1.3));
    const KernelMatrix hd = KernelMatrix::from_dense(h.dense(), 6, 4);
    const auto cov = fbs::increment_cov(g, hurst);
    const auto incr = fbs::sample_sheet(g, hurst, 1).first;
    CHECK(h.quadratic_form(incr.values) == doctest::Approx(hd.quadratic_form(incr.values)).epsilon(1e-12));
    const double tr_dense = (h.dense() * cov.dense()).trace();
    CHECK(h.trace_product(cov) == doctest::Approx(tr_dense).epsilon(1e-12));
    CHECK(hd.trace_product(cov) == doctest::Approx(tr_dense).epsilon(1e-12));
    const Eigen::MatrixXd m = kernel_times_cov(h, cov);
    CHECK((m - h.dense() * cov.dense()).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::VectorXd flat = flatten_cells(incr.values);
    CHECK(flatten_cells(h.apply_causal(incr.values)).dot(flat) == doctest::Approx(flat.dot(h.dense() * flat)).epsilon(1e-12));
  }

  TEST_CASE("from_dense validation") {
    CHECK_THROWS_AS(KernelMatrix::from_dense(Eigen::MatrixXd::Zero(3, 3), 2, 2), DimensionMismatch);
    Eigen::MatrixXd asym = Eigen::MatrixXd::Zero(4, 4);
    asym(0, 1) = 1.0;
    CHECK_THROWS_AS(KernelMatrix::from_dense(asym, 2, 2), InvalidArgument);
    const KernelMatrix dense = KernelMatrix::from_dense(Eigen::MatrixXd::Identity(4, 4), 2, 2);
    CHECK_THROWS_AS(dense.apply_causal(Eigen::MatrixXd::Zero(2, 2)), InvalidArgument);
    const KernelMatrix h = kernel_matrix(GridSpec(1.0, 1.0, 2, 2), ou::DriftParam(1.0));
    CHECK_THROWS_AS(variance_f(h, identity_cov(3, 2)), DimensionMismatch);
  }

  TEST_CASE("variance of trivial kernels") {
    CHECK(variance_f(KernelMatrix::from_dense(Eigen::MatrixXd::Zero(6, 6), 2, 3), identity_cov(2, 3)) == 0.0);
    Eigen::VectorXd dt(2), ds(3);
    dt << 0.5, 2.0;
    ds << 1.0, 3.0, 0.25;
    const fbs::IncrementCovariance cov{dt.asDiagonal(), ds.asDiagonal()};
    double expected = 0.0;
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 3; ++j) expected += 2.0 * std::pow(dt(i) * ds(j), 2);
    }
    CHECK(variance_f(KernelMatrix::from_dense(Eigen::MatrixXd::Identity(6, 6), 2, 3), cov) == doctest::Approx(expected));
  }

  TEST_CASE("normality gap of rank-one and isotropic kernels") {
    Eigen::VectorXd v(6);
    v << 1.0, -2.0, 0.5, 0.0, 3.0, 1.5;
    const auto rank_one = normality_gap(KernelMatrix::from_dense(v * v.transpose(), 2, 3), identity_cov(2, 3));
    CHECK(rank_one.normality_gap == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(rank_one.kappa4 > 0.0);
    for (int n : {1, 4, 9}) {
      const int nt = static_cast<int>(std::lround(std::sqrt(n)));
      const auto iso = normality_gap(KernelMatrix::from_dense(2.0 * Eigen::MatrixXd::Identity(n, n), nt, nt), identity_cov(nt, nt));
      CHECK(iso.normality_gap == doctest::Approx(1.0 / n).epsilon(1e-14));
      CHECK(iso.sigma2 == doctest::Approx(8.0 * n));
      CHECK(iso.kappa4 == doctest::Approx(48.0 * 16.0 * n));
    }
    CHECK_THROWS_AS(normality_gap(KernelMatrix::from_dense(Eigen::MatrixXd::Zero(4, 4), 2, 2), identity_cov(2, 2)),
                    ZeroVariance);
  }

  TEST_CASE("diagnostics of the OU-sheet kernel") {
    const GridSpec g(4.0, 4.0, 8, 8);
    const HurstPair hurst(0.55, 0.55);
    const auto cov = fbs::increment_cov(g, hurst);
    const KernelMatrix h = kernel_matrix(g, ou::DriftParam(1.0));
    const auto diag = normality_gap(h, cov);
    CHECK(diag.sigma2 > 0.0);
    CHECK(diag.kappa4 > 0.0);
    CHECK(diag.normality_gap > 0.0);
    CHECK(diag.normality_gap <= 1.0);
    CHECK(diag.sigma2 == doctest::Approx(variance_f(h, cov)));
    CHECK(diag.sigma2 == doctest::Approx(2.0 * diag.trace_m2));
    CHECK(diag.normality_gap == doctest::Approx(diag.trace_m4 / (diag.trace_m2 * diag.trace_m2)));
    // eigenvalue form
    const Eigen::MatrixXd m = h.dense() * cov.dense();
    Eigen::EigenSolver<Eigen::MatrixXd> eig(m);
    const Eigen::ArrayXd lambda = eig.eigenvalues().real().array();
    CHECK(diag.trace_m2 == doctest::Approx(lambda.square().sum()).epsilon(1e-10));
    CHECK(diag.trace_m4 == doctest::Approx(lambda.square().square().sum()).epsilon(1e-10));
  }

  TEST_CASE("trace quantities are invariant under relabeling cells") {
    const GridSpec g(3.0, 2.0, 3, 2);
    const HurstPair hurst(0.55, 0.6);
    const auto cov = fbs::increment_cov(g, hurst);
    const KernelMatrix h = kernel_matrix(g, ou::DriftParam(0.8));
    const Eigen::MatrixXd pt = permutation({2, 0, 1});
    const Eigen::MatrixXd ps = permutation({1, 0});
    Eigen::MatrixXd p(6, 6);
    for (int i = 0; i < 3; ++i) {
      for (int k = 0; k < 3; ++k) p.block(2 * i, 2 * k, 2, 2) = pt(i, k) * ps;
    }
    const fbs::IncrementCovariance cov_p{pt * cov.cov_t * pt.transpose(), ps * cov.cov_s * ps.transpose()};
    CHECK((cov_p.dense() - p * cov.dense() * p.transpose()).cwiseAbs().maxCoeff() < 1e-14);
    const KernelMatrix hp = KernelMatrix::from_dense(p * h.dense() * p.transpose(), 3, 2);
    const auto a = normality_gap(h, cov);
    const auto b = normality_gap(hp, cov_p);
    CHECK(a.sigma2 == doctest::Approx(b.sigma2).epsilon(1e-13));
    CHECK(a.kappa4 == doctest::Approx(b.kappa4).epsilon(1e-13));
    CHECK(a.normality_gap == doctest::Approx(b.normality_gap).epsilon(1e-13));
    CHECK(h.trace_product(cov) == doctest::Approx(hp.trace_product(cov_p)).epsilon(1e-13));
  }

  TEST_CASE("scaling factor bookkeeping") {
    const HurstPair hurst(0.55, 0.55);
    CHECK(variance_scaling_factor(4.0, 4.0, hurst, 0.0) == doctest::Approx(std::pow(4.0, -1.7) * std::pow(4.0, -1.7)));
    CHECK(variance_scaling_factor(4.0, 9.0, hurst, 0.05) / variance_scaling_factor(4.0, 9.0, hurst, 0.0) ==
          doctest::Approx(std::pow(36.0, -0.1)));
    CHECK_THROWS_AS(variance_scaling_factor(4.0, 4.0, HurstPair(0.7, 0.55), 0.0), RangeError);
    CHECK_THROWS_AS(variance_scaling_factor(1.0, 4.0, hurst, 0.0), RangeError);
    CHECK_THROWS_AS(variance_scaling_factor(4.0, 4.0, hurst, -0.1), InvalidArgument);
    ChaosDiagnostics bare;
    CHECK_THROWS_AS(scaled_variance(bare, hurst, 0.0), InvalidArgument);
  }

  TEST_CASE("scaled variance decreases and raw variance grows at the bounded rate") {
    const HurstPair hurst(0.55, 0.55);
    const double bound = std::pow(2.0, 4 * 0.55 - 0.5) * std::pow(2.0, 4 * 0.55 - 0.5) * 1.25;
    std::vector<double> raw;
    std::vector<double> scaled;
    for (double t : {4.0, 8.0, 16.0, 32.0}) {
      const GridSpec g = GridSpec::with_step(t, t, 1.0);
      const auto diag = normality_gap(kernel_matrix(g, ou::DriftParam(1.0)), fbs::increment_cov(g, hurst));
      raw.push_back(diag.sigma2);
      scaled.push_back(scaled_variance(diag, hurst, 0.05));
    }
    CHECK(scaled.back() < scaled.front());
    for (std::size_t k = 0; k + 1 < raw.size(); ++k) {
      CAPTURE(raw[k + 1] / raw[k]);
      CHECK(raw[k + 1] / raw[k] <= bound);
    }
  }

  TEST_CASE("mean denominator") {
    const HurstPair hurst(0.55, 0.6);
    const GridSpec tiny(1e-3, 1e-3, 1, 1);
    const auto one = mean_denominator(tiny, ou::DriftParam(1.0), fbs::increment_cov(tiny, hurst));
    const double var_b = std::pow(1e-3, 2 * 0.55) * std::pow(1e-3, 2 * 0.6);
    CHECK(one.cell_second_moment(0, 0) == doctest::Approx(var_b).epsilon(1e-13));
    CHECK(one.mean == doctest::Approx(1e-6 * var_b).epsilon(1e-13));

    const GridSpec g(4.0, 4.0, 8, 8);
    const auto cov = fbs::increment_cov(g, hurst);
    const auto md = mean_denominator(g, ou::DriftParam(1.0), cov);
    CHECK(md.cell_second_moment.minCoeff() >= 0.0);
    // agrees with E sum (K dB)^2 computed from the dense kernel
    const KernelMatrix h = kernel_matrix(g, ou::DriftParam(1.0));
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(64, 64);
    for (int c = 0; c < 64; ++c) {
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(8, 8);
      e(c / 8, c % 8) = 1.0;
      k.col(c) = flatten_cells(h.apply_causal(e));
    }
    CHECK(md.mean == doctest::Approx(g.cell_area() * (k * cov.dense() * k.transpose()).trace()).epsilon(1e-12));
  }

  TEST_CASE("normalized denominator grows with the horizon") {
    const HurstPair hurst(0.55, 0.55);
    double previous = 0.0;
    for (double t : {4.0, 8.0, 16.0, 32.0}) {
      const GridSpec g = GridSpec::with_step(t, t, 1.0);
      const auto md = mean_denominator(g, ou::DriftParam(1.0), fbs::increment_cov(g, hurst));
      const double normalized = normalized_denominator(md.mean, g, hurst, 0.05);
      CHECK(normalized > previous);
      previous = normalized;
    }
  }
}
