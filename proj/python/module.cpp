#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "dwg/analysis.hpp"
#include "dwg/cli.hpp"
#include "dwg/graph_io.hpp"
#include "dwg/report.hpp"

namespace py = pybind11;
using namespace dwg;

namespace {

CoupledGraph parse_graph(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("graph JSON: ") + e.what());
    }
    CoupledGraph g = graph_from_json(doc);
    require_valid(g);
    return g;
}

}  // namespace

PYBIND11_MODULE(_dwgraph, m) {
    m.doc() = "Spectra of damped wave operators on metric graphs";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<IncommensurateError>(m, "IncommensurateError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

    m.def("lambda_tilde", &lambda_tilde, py::arg("lam"), py::arg("a"), py::arg("b") = 0.0);
    m.def("vertex_coefficient", &vertex_coefficient, py::arg("degree"), py::arg("v"));

    m.def(
        "secular_determinant",
        [](const std::string& graph, Complex lam, const std::string& backend) {
            const SecularSystem s(parse_graph(graph), backend == "scattering" ? Backend::scattering : Backend::flower);
            const ScaledComplex d = s.determinant(lam);
            return py::make_tuple(d.mantissa, d.log_scale);
        },
        py::arg("graph"), py::arg("lam"), py::arg("backend") = "flower",
        "(mantissa, log_scale) of the secular determinant; graph is a JSON document");

    m.def(
        "spectrum_json",
        [](const std::string& graph, double re_min, double re_max, double im_min, double im_max, double tol) {
            const SecularSystem s(parse_graph(graph), Backend::flower);
            RootOptions opt;
            opt.tol = tol;
            EigenvalueSet set;
            {
                py::gil_scoped_release release;
                set = find_roots(s, {re_min, re_max, im_min, im_max}, opt);
            }
            return to_json(set).dump();
        },
        py::arg("graph"), py::arg("re_min"), py::arg("re_max"), py::arg("im_min"), py::arg("im_max"),
        py::arg("tol") = 1e-8);

    m.def(
        "abscissas_json",
        [](const std::string& graph) {
            const auto eq = equilateral_version(parse_graph(graph));
            if (!eq) throw IncommensurateError("edge lengths are incommensurate");
            return to_json(abscissa_report(characteristic_polynomial(*eq))).dump();
        },
        py::arg("graph"));

    m.def(
        "verify_json",
        [](const std::string& graph, int strips) {
            nlohmann::json doc = nlohmann::json::parse(graph);
            const CoupledGraph g = graph_from_json(doc);
            VerifyOptions opt;
            opt.strips = strips;
            VerificationReport rep;
            {
                py::gil_scoped_release release;
                rep = verify_graph(g, opt);
            }
            return to_json(rep).dump();
        },
        py::arg("graph"), py::arg("strips") = 3);

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::vector<const char*> argv{"dwgs"};
            for (const auto& a : args) argv.push_back(a.c_str());
            std::ostringstream out, err;
            const int code = dwg::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the dwgs command line; returns (exit code, stdout, stderr).");
}
