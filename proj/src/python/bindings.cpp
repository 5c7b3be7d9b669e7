#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <string>
#include <vector>

#include "nsfde/bihari.hpp"
#include "nsfde/fbm.hpp"
#include "nsfde/hilbert.hpp"
#include "nsfde/report.hpp"
#include "nsfde/scenario.hpp"
#include "nsfde/solver.hpp"
#include "nsfde/wiener.hpp"

namespace py = pybind11;
using namespace nsfde;

namespace {

py::array_t<double> paths_to_array(const std::vector<fbm::ScalarFbmPath>& paths) {
  const std::size_t n_paths = paths.size();
  const std::size_t n_nodes = n_paths ? paths[0].values.size() : 0;
  py::array_t<double> out({n_paths, n_nodes});
  auto buf = out.mutable_unchecked<2>();
  for (std::size_t p = 0; p < n_paths; ++p)
    for (std::size_t k = 0; k < n_nodes; ++k) buf(p, k) = paths[p].values[k];
  return out;
}

bihari::ConcaveModulus modulus_by_name(const std::string& name, double l, double delta, double p,
                                       double scale) {
  if (name == "linear") return bihari::ConcaveModulus::linear(l, scale);
  if (name == "log_splice") return bihari::ConcaveModulus::log_splice(delta, scale);
  if (name == "power") return bihari::ConcaveModulus::power(p, scale);
  if (name == "zero") return bihari::ConcaveModulus::zero();
  throw std::invalid_argument("unknown modulus '" + name + "'");
}

py::dict report_to_dict(const solver::Scenario& s, const solver::DiagnosticsReport& rep) {
  py::dict d;
  d["hypotheses_pass"] = rep.hypotheses_pass;
  d["converged"] = rep.converged;
  d["iterations"] = rep.iterations;
  d["final_d"] = rep.final_d;
  d["gamma_t1"] = rep.gamma_t1;
  d["t1"] = rep.t1;
  d["n_windows"] = rep.n_windows;
  d["measured_inner_rate"] = rep.measured_inner_rate;
  d["d0_hat"] = rep.d0_hat;
  d["m1_hat"] = rep.m1_hat;
  d["m2_hat"] = rep.m2_hat;
  d["certifications_pass"] = rep.certifications_pass;
  d["all_pass"] = rep.all_pass();
  py::list rows;
  for (const auto& row : rep.hypothesis_rows)
    rows.append(py::make_tuple(row.name, row.lhs, row.rhs, row.margin, row.pass));
  d["hypothesis_rows"] = rows;
  py::list certs;
  for (const auto& row : rep.certification_rows)
    certs.append(py::make_tuple(row.name, row.lhs, row.rhs, row.margin, row.pass));
  d["certification_rows"] = certs;
  d["report_text"] = solver::format_report(s, rep);
  return d;
}

}  // namespace

PYBIND11_MODULE(_nsfde, m) {
  m.doc() = "fractional Brownian motion, Wiener-integral bounds, and a Picard solver "
            "for neutral stochastic delay equations";
  m.attr("__version__") = "0.1.0";

  m.def("covariance_rh",
        [](double s, double t, double h) { return fbm::covariance_rh(s, t, fbm::Hurst(h)); },
        py::arg("s"), py::arg("t"), py::arg("hurst"),
        "fBm covariance R_H(s, t) = (t^{2H} + s^{2H} - |t-s|^{2H})/2");
  m.def("c_h", [](double h) { return fbm::c_h(fbm::Hurst(h)); }, py::arg("hurst"),
        "Volterra kernel normalization constant c_H");
  m.def("kernel_kh",
        [](double t, double s, double h, int quad_points) {
          return fbm::kernel_kh(t, s, fbm::Hurst(h), quad_points);
        },
        py::arg("t"), py::arg("s"), py::arg("hurst"), py::arg("quad_points") = 64,
        "Volterra kernel K_H(t, s); zero for t <= s");

  m.def("sample_fbm",
        [](double hurst, double t_end, int steps, int paths, std::uint64_t seed,
           const std::string& method) {
          const TimeGrid grid(t_end, steps);
          const fbm::Hurst h(hurst);
          std::vector<fbm::ScalarFbmPath> out;
          if (method == "cholesky")
            out = fbm::sample_cholesky(fbm::CovMatrix::build(grid, h), paths, seed);
          else if (method == "volterra")
            out = fbm::sample_volterra(grid, h, paths, seed);
          else
            throw std::invalid_argument("method must be 'cholesky' or 'volterra'");
          py::list times;
          for (double t : grid.nodes()) times.append(t);
          return py::make_tuple(times, paths_to_array(out));
        },
        py::arg("hurst"), py::arg("t_end"), py::arg("steps"), py::arg("paths"), py::arg("seed"),
        py::arg("method") = "cholesky",
        "returns (times, array of shape [paths, steps+1]); exact Cholesky sampler or the "
        "Volterra cross-check generator");

  m.def("sample_qfbm",
        [](double hurst, double t_end, int steps, const std::vector<double>& eigenvalues,
           int paths, std::uint64_t seed) {
          const TimeGrid grid(t_end, steps);
          const hilbert::TraceClassQ q(eigenvalues);
          const auto qp = hilbert::sample_qfbm(grid, fbm::Hurst(hurst), q, paths, seed);
          py::array_t<double> out({static_cast<std::size_t>(paths),
                                   static_cast<std::size_t>(grid.n_nodes()),
                                   static_cast<std::size_t>(q.n_modes())});
          auto buf = out.mutable_unchecked<3>();
          for (int p = 0; p < paths; ++p)
            for (int k = 0; k < grid.n_nodes(); ++k)
              for (int n = 0; n < q.n_modes(); ++n) buf(p, k, n) = qp.coeff(p, k, n);
          return out;
        },
        py::arg("hurst"), py::arg("t_end"), py::arg("steps"), py::arg("eigenvalues"),
        py::arg("paths"), py::arg("seed"),
        "trace-class Q-fBm coefficients, shape [paths, steps+1, modes]");

  m.def("scalar_product_h",
        [](const std::vector<double>& breaks_a, const std::vector<double>& vals_a,
           const std::vector<double>& breaks_b, const std::vector<double>& vals_b, double h) {
          return wiener::scalar_product_h(wiener::StepFunction(breaks_a, vals_a),
                                          wiener::StepFunction(breaks_b, vals_b), fbm::Hurst(h));
        },
        py::arg("breaks_a"), py::arg("values_a"), py::arg("breaks_b"), py::arg("values_b"),
        py::arg("hurst"),
        "reproducing-kernel scalar product of piecewise-constant functions");

  m.def("gronwall_bound",
        [](const std::vector<double>& h, const std::vector<double>& lam, double t_end) {
          const TimeGrid grid(t_end, static_cast<int>(h.size()) - 1);
          return bihari::gronwall_bound(h, lam, grid);
        },
        py::arg("h"), py::arg("lam"), py::arg("t_end"));

  m.def("bihari_bound",
        [](const std::vector<double>& h, const std::vector<double>& lam, double t_end, double x0,
           const std::string& modulus, double l, double delta, double p, double scale) {
          const TimeGrid grid(t_end, static_cast<int>(h.size()) - 1);
          return bihari::bihari_bound(h, lam, modulus_by_name(modulus, l, delta, p, scale), x0,
                                      grid);
        },
        py::arg("h"), py::arg("lam"), py::arg("t_end"), py::arg("x0"),
        py::arg("modulus") = "linear", py::arg("l") = 1.0, py::arg("delta") = 0.1,
        py::arg("p") = 0.5, py::arg("scale") = 1.0);

  m.def("validate_hypotheses",
        [](const std::string& config_path) {
          const auto s = solver::scenario_from_file(config_path);
          const auto rep = solver::validate_hypotheses(s);
          py::dict d;
          d["pass"] = rep.hypotheses_pass;
          d["first_violated"] = rep.first_violated;
          py::list rows;
          for (const auto& row : rep.hypothesis_rows)
            rows.append(py::make_tuple(row.name, row.lhs, row.rhs, row.margin, row.pass));
          d["rows"] = rows;
          return d;
        },
        py::arg("config_path"), "(H.1)-(H.4) validation for a scenario config file");

  m.def("solve",
        [](const std::string& config_path, py::object seed, bool force) {
          auto s = solver::scenario_from_file(config_path);
          if (!seed.is_none()) s.seed = seed.cast<std::uint64_t>();
          if (force) s.force = true;
          const auto run = solver::picard_run(s);
          return report_to_dict(s, run.report);
        },
        py::arg("config_path"), py::arg("seed") = py::none(), py::arg("force") = false,
        "run the Picard solver for a scenario config; returns the diagnostics summary");

  m.def("default_config", [] { return solver::print_default_config(); },
        "canonical scenario config text with schema comments");
}
