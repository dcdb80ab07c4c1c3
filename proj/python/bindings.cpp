#include "fasamp/amp_engine.hpp"
#include "fasamp/angular.hpp"
#include "fasamp/bg_model.hpp"
#include "fasamp/em_learn.hpp"
#include "fasamp/harness.hpp"
#include "fasamp/metrics.hpp"
#include "fasamp/scene.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace fasamp;

namespace {

py::dict scene_to_dict(const ChannelScene& s) {
  py::dict d;
  d["X"] = s.X;
  d["active_set"] = s.active_set;
  d["lsfc"] = s.lsfc;
  d["psi"] = s.psi;
  std::vector<double> dist;
  for (const auto& l : s.locations) dist.push_back(l.distance);
  d["distances"] = dist;
  return d;
}

ExperimentConfig config_from(const std::string& text) {
  return text.empty() ? ExperimentConfig{} : parse_config(nlohmann::json::parse(text));
}

std::string report_csv(const ExperimentReport& r) {
  std::ostringstream out;
  write_csv(r, out);
  return out.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Activity detection and channel estimation for fluid-antenna uplinks";
  m.attr("__version__") = version_string();

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_ArithmeticError);

  m.def("lsfc", &lsfc, py::arg("d"), py::arg("exponent") = 2.0);
  m.def("calibrate_noise", &calibrate_noise, py::arg("snr_db"), py::arg("mean_lsfc"), py::arg("G"));
  m.def(
      "steering_vector",
      [](double theta_deg, int N_o, double W, double lambda_len) {
        return steering_vector(to_radians(Degrees{theta_deg}), N_o, W, lambda_len);
      },
      py::arg("theta_deg"), py::arg("N_o"), py::arg("W") = 31.5, py::arg("lambda_len") = 1.0);
  m.def(
      "generate_pilots", [](int G, int K, std::uint64_t seed) { return generate_pilots(G, K, seed).A; },
      py::arg("G"), py::arg("K"), py::arg("seed"));
  m.def(
      "sample_scene",
      [](const std::string& config_json) { return scene_to_dict(sample_scene(config_from(config_json).scene)); },
      py::arg("config_json") = "", "Samples one realization from a JSON configuration document.");
  m.def("synthesize_received", &synthesize_received, py::arg("A"), py::arg("X"), py::arg("psi"), py::arg("seed"));

  m.def(
      "denoise",
      [](cdouble mu_hat, double phi_hat, double lambda, cdouble mu, double phi) {
        const PosteriorMoments p = denoise(mu_hat, phi_hat, {lambda, mu, phi});
        py::dict d;
        d["pi"] = p.pi;
        d["gamma"] = p.gamma;
        d["nu"] = p.nu;
        d["x_tilde"] = p.x_tilde;
        d["phi_tilde"] = p.phi_tilde;
        return d;
      },
      py::arg("mu_hat"), py::arg("phi_hat"), py::arg("lambda_"), py::arg("mu"), py::arg("phi"));
  m.def("init_lambda", &init_lambda, py::arg("G"), py::arg("K"));

  m.def(
      "run",
      [](const CMatrix& Y, const CMatrix& A, double psi, const std::string& variant, int T_max, double tol,
         double damping, std::optional<std::pair<double, double>> bounds, std::optional<CMatrix> codebook, int L_s,
         double lambda_thresh) {
        RunOptions o;
        o.variant = parse_em_variant(variant);
        o.T_max = T_max;
        o.tol = tol;
        o.damping = damping;
        if (bounds) o.geo = GeoBounds(bounds->first, bounds->second);
        if (codebook) o.codebook = &*codebook;
        o.L_s = L_s;
        o.lambda_thresh = lambda_thresh;
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run(Y, A, psi, o);
        }
        std::vector<double> residual;
        for (const TraceEntry& e : r.trace) residual.push_back(e.residual);
        py::dict d;
        d["lambda"] = r.lambda;
        d["x_hat"] = r.x_hat;
        d["phi_x"] = RVector(r.prior.phi_x.col(0));
        d["residual"] = residual;
        d["converged"] = r.converged;
        return d;
      },
      py::arg("Y"), py::arg("A"), py::arg("psi"), py::arg("variant") = "conventional", py::arg("T_max") = 50,
      py::arg("tol") = 1e-8, py::arg("damping") = 1.0, py::arg("geo_bounds") = py::none(),
      py::arg("codebook") = py::none(), py::arg("L_s") = 3, py::arg("lambda_thresh") = 0.1);

  m.def(
      "build_codebook",
      [](double theta_min, double theta_max, int N_s, int N_o, double W, double lambda_len) {
        return build_codebook(Degrees{theta_min}, Degrees{theta_max}, N_s, N_o, W, lambda_len).W;
      },
      py::arg("theta_min") = 30.0, py::arg("theta_max") = 150.0, py::arg("N_s") = 121, py::arg("N_o") = 16,
      py::arg("W") = 31.5, py::arg("lambda_len") = 1.0);
  m.def(
      "omp_refine",
      [](const CVector& row, const CMatrix& W, int L_s) {
        const RefinedRow r = omp_refine(row, W, L_s);
        return py::make_tuple(r.row, r.gains.support);
      },
      py::arg("row"), py::arg("W"), py::arg("L_s"));
  m.def(
      "somp",
      [](const CMatrix& Y, const CMatrix& C, int K_a) {
        const SompResult r = somp(Y, C, K_a);
        return py::make_tuple(r.support, r.H);
      },
      py::arg("Y"), py::arg("C"), py::arg("K_a"));

  m.def("ade", &ade, py::arg("true_set"), py::arg("est_set"), py::arg("K_a"));
  m.def(
      "nmse", [](const CMatrix& H, const CMatrix& H_hat) { return nmse(H, H_hat); }, py::arg("H_true"),
      py::arg("H_hat"));
  m.def(
      "greedy_floor_mse",
      [](double sigma_bar, double psi, double d_max, double exponent) {
        const GreedyFloor f = greedy_floor_mse(sigma_bar, psi, d_max, exponent);
        return py::make_tuple(f.floor, f.lower_bound);
      },
      py::arg("sigma_bar"), py::arg("psi"), py::arg("d_max") = 100.0, py::arg("exponent") = 2.0);

  m.def(
      "run_sweep",
      [](const std::string& config_json) {
        const ExperimentConfig c = config_from(config_json);
        ExperimentReport r;
        {
          py::gil_scoped_release release;
          r = c.sweep.values.empty() ? run_point(c) : run_sweep(c, c.sweep.axis, c.sweep.values);
        }
        return report_csv(r);
      },
      py::arg("config_json") = "", "Runs the configured point or sweep and returns the CSV report.");
}
