#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "perfou/asymptotics.hpp"
#include "perfou/errors.hpp"
#include "perfou/estimator.hpp"
#include "perfou/fgn.hpp"
#include "perfou/model.hpp"

namespace py = pybind11;
using namespace perfou;

namespace {

BasisFunction basis_from(const std::string& kind, int k) {
    if (kind == "const") return constant_basis();
    if (kind == "sin") return sine_basis(k);
    if (kind == "cos") return cosine_basis(k);
    throw std::invalid_argument("unknown basis kind " + kind);
}

FouModel make_model(double hurst, double alpha, std::vector<double> mu, double sigma,
                    const std::vector<std::pair<std::string, int>>& basis, double xi0) {
    std::vector<BasisFunction> fs;
    for (const auto& [kind, k] : basis) fs.push_back(basis_from(kind, k));
    FouModel m{.hurst = HurstExponent(hurst),
               .alpha = alpha,
               .mu = std::move(mu),
               .sigma = sigma,
               .basis = BasisSet(std::move(fs)),
               .xi0 = xi0};
    m.validate();
    return m;
}

}  // namespace

PYBIND11_MODULE(_perfou, m) {
    m.doc() = "Periodic-mean fractional OU simulation and drift estimation";

    py::register_exception<DegenerateDesign>(m, "DegenerateDesign", PyExc_RuntimeError);
    py::register_exception<NonnegativeEmbeddingFailure>(m, "NonnegativeEmbeddingFailure", PyExc_RuntimeError);

    m.def("fgn_autocovariance",
          [](double h, std::size_t lag) { return fgn_autocovariance(HurstExponent(h), lag); },
          py::arg("hurst"), py::arg("lag"));
    m.def(
        "generate_fgn",
        [](double h, double step, std::size_t count, std::uint64_t seed) {
            return generate_fgn(FgnSpec{HurstExponent(h), step, count, seed});
        },
        py::arg("hurst"), py::arg("step"), py::arg("count"), py::arg("seed"));

    py::class_<FouModel>(m, "FouModel")
        .def(py::init(&make_model), py::arg("hurst"), py::arg("alpha"), py::arg("mu"), py::arg("sigma"),
             py::arg("basis"), py::arg("xi0") = 0.0)
        .def_property_readonly("hurst", [](const FouModel& f) { return f.hurst.value(); })
        .def_readonly("alpha", &FouModel::alpha)
        .def_readonly("mu", &FouModel::mu)
        .def_readonly("sigma", &FouModel::sigma)
        .def("theta", &FouModel::theta);

    py::class_<SamplePath>(m, "SamplePath")
        .def_readonly("x", &SamplePath::x)
        .def_readonly("driver_increments", &SamplePath::driver_increments)
        .def_readonly("n_periods", &SamplePath::n_periods)
        .def_readonly("steps_per_period", &SamplePath::steps_per_period)
        .def_readonly("burn_in_steps", &SamplePath::burn_in_steps)
        .def("grid", &SamplePath::grid);

    m.def(
        "simulate_path",
        [](const FouModel& model, std::size_t n_periods, std::size_t steps_per_period, std::uint64_t seed,
           bool stationary_start) {
            return simulate_path(model, SimulationOptions{.n_periods = n_periods,
                                                          .steps_per_period = steps_per_period,
                                                          .seed = seed,
                                                          .stationary_start = stationary_start});
        },
        py::arg("model"), py::arg("n_periods"), py::arg("steps_per_period") = 256, py::arg("seed") = 0,
        py::arg("stationary_start") = true);

    py::class_<EstimateResult>(m, "EstimateResult")
        .def_readonly("theta_hat", &EstimateResult::theta_hat)
        .def_readonly("P", &EstimateResult::P)
        .def_readonly("Q_inverse", &EstimateResult::Q_inverse)
        .def_readonly("R_n", &EstimateResult::R_n)
        .def_readonly("trace_correction", &EstimateResult::trace_correction)
        .def_property_readonly("gamma_n", [](const EstimateResult& r) { return r.design.gamma_n; })
        .def_property_readonly("lambda_n", [](const EstimateResult& r) { return r.design.lambda_n; })
        .def_property_readonly("Q", [](const EstimateResult& r) { return r.design.Q(); });

    m.def(
        "estimate",
        [](const SamplePath& path, const std::string& mode, std::optional<double> alpha_for_correction) {
            EstimateOptions o;
            if (mode == "naive") {
                o.mode = EstimatorMode::naive_pathwise;
            } else if (mode == "oracle") {
                o.mode = EstimatorMode::oracle_divergence;
            } else {
                throw std::invalid_argument("mode must be 'naive' or 'oracle'");
            }
            o.alpha_for_correction = alpha_for_correction;
            return estimate(path, o);
        },
        py::arg("path"), py::arg("mode") = "oracle", py::arg("alpha_for_correction") = py::none());

    m.def(
        "malliavin_trace_correction",
        [](double alpha, double h, double horizon) {
            return malliavin_trace_correction(alpha, HurstExponent(h), horizon);
        },
        py::arg("alpha"), py::arg("hurst"), py::arg("horizon"));

    m.def(
        "singular_pair_integral",
        [](const std::function<double(double)>& f, const std::function<double(double)>& g, double h,
           std::size_t nodes) { return singular_pair_integral(f, g, HurstExponent(h), nodes); },
        py::arg("f"), py::arg("g"), py::arg("hurst"), py::arg("nodes") = 64);

    m.def("stationary_variance",
          [](double alpha, double sigma, double h) { return stationary_variance(alpha, sigma, HurstExponent(h)); },
          py::arg("alpha"), py::arg("sigma"), py::arg("hurst"));

    py::class_<LimitMatrices>(m, "LimitMatrices")
        .def_readonly("Lambda", &LimitMatrices::Lambda)
        .def_readonly("gamma", &LimitMatrices::gamma)
        .def_readonly("C", &LimitMatrices::C)
        .def_readonly("Sigma0", &LimitMatrices::Sigma0)
        .def_readonly("asym_cov", &LimitMatrices::asym_cov)
        .def_readonly("alpha_H", &LimitMatrices::alpha_H)
        .def_readonly("clt_valid", &LimitMatrices::clt_valid)
        .def_readonly("degenerate_limit", &LimitMatrices::degenerate_limit);
    m.def("limit_matrices", &limit_matrices, py::arg("model"));
}
