#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fou_sheet/chaos.hpp"
#include "fou_sheet/errors.hpp"
#include "fou_sheet/estimator.hpp"
#include "fou_sheet/fbs.hpp"
#include "fou_sheet/harness.hpp"
#include "fou_sheet/ou_sheet.hpp"
#include "fou_sheet/singular.hpp"
#include "fou_sheet/specfun.hpp"

namespace py = pybind11;
using namespace fou;

namespace {

GridSpec make_grid(double t, double s, int nt, int ns) { return GridSpec(t, s, nt, ns); }

py::dict estimate_dict(const est::EstimateResult& r) {
  py::dict d;
  d["theta_hat"] = r.theta_hat;
  d["nominator"] = r.nominator;
  d["denominator"] = r.denominator;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Simulation and drift estimation for the fractional Ornstein-Uhlenbeck sheet.";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<RangeError>(m, "RangeError", base.ptr());
  py::register_exception<NonFiniteInput>(m, "NonFiniteInput", base.ptr());
  py::register_exception<DimensionMismatch>(m, "DimensionMismatch", base.ptr());
  py::register_exception<DenominatorZero>(m, "DenominatorZero", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());

  // special functions
  m.def("j0", [](double x) { return specfun::j0(x); }, py::arg("x"));
  m.def("j0_series", [](double x) { return specfun::j0_series(x); }, py::arg("x"));
  m.def("j0_integral", [](double x, int nodes) {
    specfun::BesselConfig cfg;
    cfg.quad_nodes = nodes;
    return specfun::j0_integral(x, cfg);
  }, py::arg("x"), py::arg("quad_nodes") = 64);
  m.def("j0_asymptotic", &specfun::j0_asymptotic, py::arg("x"));
  m.def("gamma", &singular::gamma_fn, py::arg("x"));
  m.def("beta", &singular::beta_fn, py::arg("x"), py::arg("y"));

  // sheets
  m.def("cov_r", &fbs::cov_r, py::arg("t"), py::arg("u"), py::arg("h"));
  m.def("increment_cov_1d", &fbs::increment_cov_1d, py::arg("horizon"), py::arg("cells"), py::arg("h"));
  m.def("sample_sheet",
        [](double t, double s, int nt, int ns, double alpha, double beta, std::uint64_t seed, std::uint64_t rep) {
          auto [incr, path] = fbs::sample_sheet(make_grid(t, s, nt, ns), HurstPair(alpha, beta), seed, rep);
          return py::make_tuple(incr.values, path.values);
        },
        py::arg("T"), py::arg("S"), py::arg("cells_t"), py::arg("cells_s"), py::arg("alpha"), py::arg("beta"),
        py::arg("seed"), py::arg("replication") = 0,
        "Returns (increments, path) as arrays of shape (n_t, n_s) and (n_t + 1, n_s + 1).");

  m.def("solve_by_kernel",
        [](const Eigen::MatrixXd& incr, double t, double s, double theta) {
          const GridSpec g = make_grid(t, s, static_cast<int>(incr.rows()), static_cast<int>(incr.cols()));
          return ou::solve_by_kernel(SheetIncrements{incr}, g, theta).values;
        },
        py::arg("increments"), py::arg("T"), py::arg("S"), py::arg("theta"));
  m.def("solve_by_fixed_point",
        [](const Eigen::MatrixXd& b, double t, double s, double theta) {
          const GridSpec g = make_grid(t, s, static_cast<int>(b.rows()) - 1, static_cast<int>(b.cols()) - 1);
          return ou::solve_by_fixed_point(SheetPath{b}, g, ou::DriftParam(theta)).values;
        },
        py::arg("sheet"), py::arg("T"), py::arg("S"), py::arg("theta"));
  m.def("langevin_residual",
        [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& b, double t, double s, double theta) {
          const GridSpec g = make_grid(t, s, static_cast<int>(b.rows()) - 1, static_cast<int>(b.cols()) - 1);
          return ou::langevin_residual(SheetPath{x}, SheetPath{b}, g, ou::DriftParam(theta));
        },
        py::arg("x"), py::arg("sheet"), py::arg("T"), py::arg("S"), py::arg("theta"));

  // chaos diagnostics
  m.def("chaos_diagnostics",
        [](double t, double s, double step, double alpha, double beta, double theta) {
          const GridSpec g = GridSpec::with_step(t, s, step);
          const auto d = chaos::normality_gap(chaos::kernel_matrix(g, ou::DriftParam(theta)),
                                              fbs::increment_cov(g, HurstPair(alpha, beta)));
          py::dict out;
          out["sigma2"] = d.sigma2;
          out["kappa4"] = d.kappa4;
          out["normality_gap"] = d.normality_gap;
          return out;
        },
        py::arg("T"), py::arg("S"), py::arg("cell_step"), py::arg("alpha"), py::arg("beta"), py::arg("theta"));
  m.def("mean_denominator",
        [](double t, double s, double step, double alpha, double beta, double theta) {
          const GridSpec g = GridSpec::with_step(t, s, step);
          return chaos::mean_denominator(g, ou::DriftParam(theta), fbs::increment_cov(g, HurstPair(alpha, beta))).mean;
        },
        py::arg("T"), py::arg("S"), py::arg("cell_step"), py::arg("alpha"), py::arg("beta"), py::arg("theta"));

  // estimation
  m.def("lse_oracle",
        [](const Eigen::MatrixXd& incr, double t, double s, double alpha, double beta, double theta) {
          const GridSpec g = make_grid(t, s, static_cast<int>(incr.rows()), static_cast<int>(incr.cols()));
          return estimate_dict(est::lse_oracle(SheetIncrements{incr}, g, HurstPair(alpha, beta), ou::DriftParam(theta)));
        },
        py::arg("increments"), py::arg("T"), py::arg("S"), py::arg("alpha"), py::arg("beta"), py::arg("theta"));
  m.def("lse_pathwise",
        [](const Eigen::MatrixXd& x, double t, double s) {
          const GridSpec g = make_grid(t, s, static_cast<int>(x.rows()) - 1, static_cast<int>(x.cols()) - 1);
          return estimate_dict(est::lse_pathwise(SheetPath{x}, g));
        },
        py::arg("x"), py::arg("T"), py::arg("S"));
  m.def("mc_consistency",
        [](const std::vector<double>& horizons, double step, double alpha, double beta, double theta, int reps,
           std::uint64_t seed) {
          std::vector<GridSpec> grids;
          for (double h : horizons) grids.push_back(GridSpec::with_step(h, h, step));
          const auto rep = est::mc_consistency(grids, HurstPair(alpha, beta), ou::DriftParam(theta), reps, seed);
          py::list out;
          for (const auto& h : rep.horizons) {
            py::dict d;
            d["T"] = h.grid.horizon_t();
            d["median_abs_error"] = h.median_abs_error;
            d["iqr_abs_error"] = h.iqr_abs_error;
            d["failures"] = h.failures;
            d["errors"] = h.errors;
            out.append(d);
          }
          return out;
        },
        py::arg("horizons"), py::arg("cell_step"), py::arg("alpha"), py::arg("beta"), py::arg("theta"),
        py::arg("replications"), py::arg("seed"));

  // singular integral
  m.def("integral_I_mc",
        [](double alpha, double beta, std::int64_t n, std::uint64_t seed) {
          const auto r = singular::integral_I_mc(alpha, beta, n, seed);
          return py::make_tuple(r.estimate, r.standard_error);
        },
        py::arg("alpha"), py::arg("beta"), py::arg("n_samples"), py::arg("seed"),
        "Returns (estimate, standard_error).");
  m.def("beta_reduction_check",
        [](double beta, double v, double s0) {
          const auto r = singular::beta_reduction_check(beta, v, s0);
          return py::make_tuple(r.lhs, r.rhs);
        },
        py::arg("beta"), py::arg("v"), py::arg("s0"), "Returns (lhs, rhs).");

  // harness
  m.def("run_config",
        [](const std::string& text) {
          const auto rep = harness::run_experiment(harness::parse_config(text));
          return py::make_tuple(harness::report_json(rep), harness::report_csv(rep));
        },
        py::arg("config_text"), "Runs an experiment from config text; returns (json, csv).");
  m.def("config_hash", [](const std::string& text) { return harness::config_hash(harness::parse_config(text)); },
        py::arg("config_text"));
  m.attr("__version__") = harness::library_version();
}
