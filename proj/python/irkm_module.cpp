#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "irkm/experiments.hpp"
#include "irkm/verify.hpp"

namespace py = pybind11;
using namespace irkm;

namespace {

// Polynomials cross the boundary as {tuple of 0-based indices: coefficient}.
FourierPolynomial poly_from_dict(int dim, const std::map<std::vector<int>, double>& terms) {
  FourierPolynomial f(dim);
  for (const auto& [s, c] : terms) f.add_term(s, c);
  return f;
}

py::dict poly_to_dict(const FourierPolynomial& f) {
  py::dict out;
  for (const auto& [s, c] : f.terms()) out[py::tuple(py::cast(s))] = c;
  return out;
}

KernelSpec make_spec(const std::string& family, Eigen::Index dim, double bandwidth, double scale, int degree,
                     double offset) {
  KernelSpec spec;
  spec.family = kernel_family_from_string(family);
  spec.dim = dim;
  spec.bandwidth = bandwidth;
  spec.scale = scale;
  spec.degree = degree;
  spec.offset = offset;
  spec.validate();
  return spec;
}

// TrainConfig and sources assembled from in-memory arrays.
py::dict train(const std::string& method, const Matrix& x, const Vector& y, const Matrix& x_test,
               const Vector& y_test, double alpha, int steps, double lambda, const std::string& family,
               std::optional<double> sigma, std::optional<double> eps_s, int patience) {
  if (method != "rfm" && method != "irkm") throw ConfigError("method", "expected irkm or rfm");
  TrainConfig config;
  config.alpha = alpha;
  config.steps = steps;
  config.lambda = lambda;
  config.eps_s = eps_s;
  config.kernel.family = kernel_family_from_string(family);
  config.kernel.dim = x.cols();
  config.kernel.bandwidth = sigma.value_or(1.0);
  config.auto_bandwidth = !sigma;
  config.n_per_step = x.rows();
  config.resample = false;
  config.early_stop_patience = patience;
  FixedSource source(Dataset{x, y, "python"});
  const Dataset test{x_test, y_test, "python-test"};
  TrainResult result = method == "rfm" ? rfm_run(config, source, test) : irkm_run(config, source, test);
  py::list steps_out;
  for (const StepRecord& s : result.trace.steps) {
    py::dict d;
    d["step"] = s.step;
    d["test_mse"] = s.test_mse;
    d["weights"] = s.weights;
    d["w1_raw"] = s.w1_raw;
    d["w2_raw"] = s.w2_raw;
    d["sigma"] = s.sigma;
    steps_out.append(d);
  }
  py::dict out;
  out["best_step"] = result.trace.best_step;
  out["best_test_mse"] = result.trace.best_test_mse;
  out["trace"] = steps_out;
  out["predict"] = py::cpp_function([model = result.model](const Matrix& z) { return predict(model, z); });
  return out;
}

}  // namespace

PYBIND11_MODULE(_irkm, m) {
  m.doc() = "Kernel feature learning: IRKM/RFM trainers, estimators and Fourier-Walsh tools.";

  // Later registrations are tried first, so the base class goes first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("version", &version_string);

  m.def("parse_target", [](const std::string& text, std::optional<int> dim) {
    const FourierPolynomial f = parse_target(text, dim);
    return py::make_tuple(f.dim(), poly_to_dict(f));
  }, py::arg("text"), py::arg("dim") = py::none(),
        "Returns (dim, {indices: coefficient}) with 0-based indices.");
  m.def("coordinate_weight", [](int dim, const std::map<std::vector<int>, double>& terms, int j,
                                std::optional<int> p) { return coordinate_weight(poly_from_dict(dim, terms), j, p); },
        py::arg("dim"), py::arg("terms"), py::arg("j"), py::arg("p") = py::none());
  m.def("leap_complexity", [](int dim, const std::map<std::vector<int>, double>& terms) {
    return leap_complexity(poly_from_dict(dim, terms));
  });
  m.def("max_leap_component", [](int dim, const std::map<std::vector<int>, double>& terms, int k) {
    return poly_to_dict(max_leap_component(poly_from_dict(dim, terms), k));
  });
  m.def("hermite_eval", &hermite_eval, py::arg("k"), py::arg("x"));

  m.def("gram", [](const std::string& family, const Matrix& x, const Matrix& z, const Vector& w, double bandwidth,
                   double scale, int degree, double offset) {
    return gram(make_spec(family, x.cols(), bandwidth, scale, degree, offset), x, z, WeightVector(w));
  }, py::arg("family"), py::arg("x"), py::arg("z"), py::arg("w"), py::arg("bandwidth") = 1.0,
        py::arg("scale") = 1.0, py::arg("degree") = 2, py::arg("offset") = 1.0);

  m.def("krr_fit", [](const std::string& family, const Matrix& x, const Vector& y, const Vector& w, double lambda,
                      double bandwidth) {
    const KrrModel model = fit(make_spec(family, x.cols(), bandwidth, 1.0, 2, 1.0), WeightVector(w), x, y, lambda);
    py::dict out;
    out["beta"] = model.beta();
    out["jitter"] = model.jitter_used();
    out["predict"] = py::cpp_function([model](const Matrix& z) { return predict(model, z); });
    out["gradient"] = py::cpp_function([model](const Matrix& z) { return predict_gradient(model, z); });
    out["dn"] = dn_vector(model);
    return out;
  }, py::arg("family"), py::arg("x"), py::arg("y"), py::arg("w"), py::arg("lambda_") = 1e-3,
        py::arg("bandwidth") = 1.0);

  m.def("median_bandwidth", [](const Matrix& x, const Vector& w) { return median_bandwidth(x, WeightVector(w)); });

  m.def("train", &train, py::arg("method"), py::arg("x"), py::arg("y"), py::arg("x_test"), py::arg("y_test"),
        py::arg("alpha") = 0.5, py::arg("steps") = 10, py::arg("lambda_") = 1e-3,
        py::arg("family") = "laplacian_radial", py::arg("sigma") = py::none(), py::arg("eps_s") = py::none(),
        py::arg("patience") = 3, "IRKM or RFM on a fixed training set.");

  m.def("run_config", [](const std::string& config_json) {
    const ExperimentConfig config = config_from_json(nlohmann::json::parse(config_json));
    const auto sizes = config.sample_sizes();
    const RunOutcome o = run_experiment(config, sizes.empty() ? 0 : sizes.front(), config.seeds.front());
    return summary_json(config, o).dump();
  }, py::arg("config_json"), "Runs the first (n, seed) of a JSON config; returns summary JSON text.");

  m.def("verify", [] {
    py::list out;
    for (const VerifyCheck& c : run_verification()) out.append(py::make_tuple(c.name, c.passed, c.detail));
    return out;
  });
}
