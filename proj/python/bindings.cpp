#include "rigidnf/germlang.hpp"
#include "rigidnf/report.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace rigidnf;

namespace {

// Same contract as the CLI: the report is always produced, failures carry
// their exit code and message instead of raising.
py::tuple run(const std::string& command, const std::string& text, const std::string& digest,
              std::optional<int> degree, std::optional<std::string> mode, const std::string& last_pass,
              std::optional<double> tol_coeff, std::optional<double> tol_res, std::optional<double> tol_eig,
              std::optional<double> tol_residual, std::optional<double> tol_series, bool timings) {
    auto cmd = parse_command(command);
    if (!cmd) throw py::value_error("unknown command '" + command + "'");
    CommandOptions o;
    o.degree = degree;
    if (mode) {
        if (*mode == "exact") o.mode = Mode::Exact;
        else if (*mode == "float") o.mode = Mode::Float;
        else throw py::value_error("mode must be 'exact' or 'float'");
    }
    auto pass = parse_pass(last_pass);
    if (!pass) throw py::value_error("unknown pass '" + last_pass + "'");
    o.pass = *pass;
    o.tol_coeff = tol_coeff;
    o.tol_res = tol_res;
    o.tol_eig = tol_eig;
    o.tol_residual = tol_residual;
    o.tol_series = tol_series;
    o.timings = timings;

    Report r;
    {
        py::gil_scoped_release nogil;
        r = run_command(*cmd, text, digest, o);
    }
    return py::make_tuple(r.exit_code, render_json(r), r.error_code, r.message);
}

std::string canonical_series(const std::string& expr, const std::vector<std::string>& variables, int trunc,
                             const std::string& mode) {
    if (mode != "exact" && mode != "float") throw py::value_error("mode must be 'exact' or 'float'");
    Ring ring{mode == "exact" ? Mode::Exact : Mode::Float, 1e-12};
    try {
        return series_to_text(parse_expr(expr, variables, trunc, ring), variables);
    } catch (const ParseError& e) {
        throw py::value_error(e.what());
    }
}

}  // namespace

PYBIND11_MODULE(_rigidnf, m) {
    m.doc() = "Normal forms of contracting rigid germs: native core.";
    m.def("run", &run, py::arg("command"), py::arg("text"), py::arg("digest") = "", py::arg("degree") = py::none(),
          py::arg("mode") = py::none(), py::arg("last_pass") = "all", py::arg("tol_coeff") = py::none(),
          py::arg("tol_res") = py::none(), py::arg("tol_eig") = py::none(), py::arg("tol_residual") = py::none(),
          py::arg("tol_series") = py::none(), py::arg("timings") = false,
          "Run check/resonances/normalize/classify on germ-file text. Returns (exit_code, json, error_code, message).");
    m.def("canonical_series", &canonical_series, py::arg("expr"), py::arg("variables"), py::arg("trunc") = 8,
          py::arg("mode") = "exact", "Parse an expression and print it back in canonical form.");
}
