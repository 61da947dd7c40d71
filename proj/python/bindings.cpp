#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>

#include "oscint/decay.hpp"
#include "oscint/engine.hpp"
#include "oscint/finite_part.hpp"
#include "oscint/parallel.hpp"
#include "oscint/phase.hpp"
#include "oscint/runner.hpp"
#include "oscint/scattering.hpp"
#include "oscint/symbol.hpp"

namespace py = pybind11;
using namespace oscint;

namespace {

Point to_point(const std::vector<double>& v)
{
    if (v.empty() || v.size() > 2) throw std::invalid_argument("a point has 1 or 2 coordinates");
    return {v[0], v.size() == 2 ? v[1] : 0.0};
}

py::array_t<cplx> field_values(const SampledField& f)
{
    std::vector<py::ssize_t> shape;
    if (f.grid.d == 1) shape = {static_cast<py::ssize_t>(f.grid.n)};
    else shape = {static_cast<py::ssize_t>(f.grid.n), static_cast<py::ssize_t>(f.grid.n)};
    py::array_t<cplx> out(shape);
    std::copy(f.values.begin(), f.values.end(), out.mutable_data());
    return out;
}

SampledField field_from_array(const GridSpec& g, py::array_t<cplx, py::array::c_style | py::array::forcecast> a, Space s)
{
    if (static_cast<std::size_t>(a.size()) != g.size())
        throw std::invalid_argument("array has " + std::to_string(a.size()) + " entries, grid needs " + std::to_string(g.size()));
    return SampledField(g, s, std::vector<cplx>(a.data(), a.data() + a.size()));
}

py::array_t<double> axis(const GridSpec& g, Space s)
{
    py::array_t<double> out(static_cast<py::ssize_t>(g.n));
    for (std::size_t j = 0; j < g.n; ++j) out.mutable_at(j) = g.coord(j, s);
    return out;
}

py::dict fit_dict(const DecayFit& f)
{
    py::dict d;
    d["lambdas"] = f.lambdas;
    d["ratios"] = f.ratios;
    d["slope"] = f.slope;
    d["intercept"] = f.intercept;
    d["residual"] = f.residual;
    d["fit_points"] = f.fit_points;
    d["predicted"] = f.predicted ? py::cast(*f.predicted) : py::none();
    return d;
}

py::dict run_dict(const RunResult& r)
{
    py::dict d;
    d["exit_code"] = r.exit_code;
    d["passed"] = r.passed;
    d["report"] = r.report.dump();
    d["csv"] = r.csv.str();
    d["error"] = r.error;
    return d;
}

}

PYBIND11_MODULE(_oscint, m)
{
    m.doc() = "Bilinear oscillatory integrals on periodic grids";

    py::enum_<Space>(m, "Space").value("Physical", Space::Physical).value("Frequency", Space::Frequency);

    py::class_<GridSpec>(m, "GridSpec")
        .def(py::init<int, std::size_t, double>(), py::arg("d"), py::arg("n"), py::arg("half_width"))
        .def_readonly("d", &GridSpec::d)
        .def_readonly("n", &GridSpec::n)
        .def_readonly("half_width", &GridSpec::half_width)
        .def_property_readonly("spacing", &GridSpec::spacing)
        .def_property_readonly("freq_extent", &GridSpec::freq_extent)
        .def("x", [](const GridSpec& g) { return axis(g, Space::Physical); })
        .def("xi", [](const GridSpec& g) { return axis(g, Space::Frequency); })
        .def("__repr__", [](const GridSpec& g) {
            return "GridSpec(d=" + std::to_string(g.d) + ", n=" + std::to_string(g.n) + ", half_width=" + format_number(g.half_width) + ")";
        });

    py::class_<SampledField>(m, "SampledField")
        .def(py::init(&field_from_array), py::arg("grid"), py::arg("values"), py::arg("space") = Space::Physical)
        .def_readonly("grid", &SampledField::grid)
        .def_readonly("space", &SampledField::space)
        .def_property_readonly("values", &field_values)
        .def("__add__", [](const SampledField& a, const SampledField& b) { return a + b; })
        .def("__sub__", [](const SampledField& a, const SampledField& b) { return a - b; })
        .def("__rmul__", [](const SampledField& a, cplx s) { return s * a; })
        .def("__mul__", [](const SampledField& a, cplx s) { return s * a; });

    m.def("gaussian", [](const GridSpec& g, double sigma, std::vector<double> c) { return gaussian(g, sigma, to_point(c)); },
          py::arg("grid"), py::arg("sigma") = 1.0, py::arg("center") = std::vector<double>{0.0});
    m.def("random_bandlimited", &random_bandlimited, py::arg("grid"), py::arg("seed"), py::arg("band") = 0.5);
    m.def("forward_transform", &forward_transform);
    m.def("inverse_transform", &inverse_transform);
    m.def("free_propagator", py::overload_cast<const SampledField&, double>(&free_propagator), py::arg("f"), py::arg("t"));
    m.def("lp_norm", &lp_norm, py::arg("f"), py::arg("p"));
    m.def("relative_l2_error", &relative_l2_error);

    py::class_<Phase>(m, "Phase")
        .def_static("scalar", &Phase::scalar, py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d") = 1)
        .def_static("quadratic", &Phase::quadratic, py::arg("A"), py::arg("B"), py::arg("C"))
        .def_property_readonly("dim", &Phase::dim)
        .def("__call__", [](const Phase& p, std::vector<double> e, std::vector<double> x) { return p(to_point(e), to_point(x)); });

    py::class_<NondegeneracyReport>(m, "NondegeneracyReport")
        .def_readonly("min_abs_det", &NondegeneracyReport::min_abs_det)
        .def_readonly("degenerate", &NondegeneracyReport::degenerate)
        .def_readonly("sample_count", &NondegeneracyReport::sample_count)
        .def("all_pass", &NondegeneracyReport::all_pass);

    py::class_<Symbol>(m, "Symbol")
        .def_static("constant", &Symbol::constant, py::arg("value"), py::arg("d") = 1)
        .def_static(
            "bump",
            [](std::vector<double> ec, std::vector<double> xc, double r, double amp, int d) {
                return Symbol::bump(to_point(ec), to_point(xc), r, amp, d);
            },
            py::arg("eta_center"), py::arg("xi_center"), py::arg("radius"), py::arg("amplitude") = 1.0, py::arg("d") = 1)
        .def("__call__", [](const Symbol& s, std::vector<double> e, std::vector<double> x) { return s(to_point(e), to_point(x)); });

    m.def(
        "check_phase",
        [](const Phase& phi, const Symbol& support, int per_axis, double tol) {
            return nondegeneracy_report(phi, support_samples(support, per_axis), tol);
        },
        py::arg("phase"), py::arg("support"), py::arg("per_axis") = 9, py::arg("tol") = 1e-8);

    py::class_<OscillatoryOp>(m, "OscillatoryOp")
        .def(py::init([](Phase p, Symbol s, double lambda, GridSpec g) { return OscillatoryOp{p, s, lambda, g}; }), py::arg("phase"),
             py::arg("symbol"), py::arg("lam"), py::arg("grid"))
        .def_readwrite("lam", &OscillatoryOp::lambda);

    m.def("apply_direct", &apply_direct, py::call_guard<py::gil_scoped_release>());
    m.def("apply_factored", &apply_factored, py::call_guard<py::gil_scoped_release>());
    m.def("set_direct_budget", &set_direct_budget);
    m.def("set_num_threads", &set_num_threads);

    py::class_<ExponentTriple>(m, "ExponentTriple")
        .def(py::init<double, double, double>(), py::arg("p"), py::arg("q"), py::arg("r"))
        .def_readonly("p", &ExponentTriple::p)
        .def_readonly("q", &ExponentTriple::q)
        .def_readonly("r", &ExponentTriple::r)
        .def("__repr__", &ExponentTriple::str);
    m.def("admissible", &admissible);
    m.def("predicted_exponent", &predicted_exponent, py::arg("triple"), py::arg("d"));
    m.def(
        "lambda_sweep",
        [](const Phase& phi, const Symbol& s, const SampledField& f, const SampledField& g, const ExponentTriple& t,
           const std::vector<double>& lambdas) {
            DecayFit fit;
            {
                py::gil_scoped_release release;
                fit = lambda_sweep(phi, s, f, g, t, lambdas);
            }
            return fit_dict(fit);
        },
        py::arg("phase"), py::arg("symbol"), py::arg("f"), py::arg("g"), py::arg("triple"), py::arg("lambdas"));

    m.def(
        "dt_extrapolate",
        [](const std::vector<double>& coefficients, const SampledField& f, const std::vector<double>& T_list) {
            ScalarPhase phi = [coefficients](const Point& x) {
                double s = 0;
                for (std::size_t k = coefficients.size(); k-- > 0;) s = s * x[0] + coefficients[k];
                return s;
            };
            FpExtrapolation e;
            {
                py::gil_scoped_release release;
                e = dt_extrapolate(phi, f, T_list);
            }
            py::dict d;
            d["values"] = e.values;
            d["decrements"] = e.decrements;
            d["delta"] = e.delta ? py::cast(*e.delta) : py::none();
            d["at_roundoff"] = e.at_roundoff;
            d["extrapolated"] = e.extrapolated;
            return d;
        },
        py::arg("coefficients"), py::arg("f"), py::arg("T_list"),
        "Truncated pairings <D_T, f> for the polynomial phase sum_k c_k x^k (d = 1) and their limit in T.");

    m.def(
        "fp_bilinear_apply",
        [](const Phase& phi, const Symbol& s, const SampledField& f, const SampledField& g, double lambda_max,
           const ExponentTriple& t) {
            FinitePartConfig cfg;
            cfg.lambda_max = lambda_max;
            FpBilinearResult r;
            {
                py::gil_scoped_release release;
                r = fp_bilinear_apply(phi, s, f, g, cfg, t);
            }
            py::dict d;
            d["field"] = r.field;
            d["rho"] = r.rho;
            d["tail_estimate"] = r.tail_estimate;
            d["evaluations"] = r.evaluations;
            return d;
        },
        py::arg("phase"), py::arg("symbol"), py::arg("f"), py::arg("g"), py::arg("lambda_max") = 8.0,
        py::arg("triple") = ExponentTriple(1.0, 1.0, INFINITY));

    m.def(
        "second_born",
        [](const SampledField& u0, double t_max, double dt, const std::string& path) {
            ScatterConfig cfg;
            cfg.u0 = u0;
            cfg.m = Symbol::constant(1.0, u0.grid.d);
            cfg.t_max = t_max;
            cfg.dt = dt;
            cfg.fp.lambda_max = t_max;
            if (path != "lambda" && path != "time") throw std::invalid_argument("path is 'lambda' or 'time'");
            ScatterResult r;
            {
                py::gil_scoped_release release;
                r = path == "lambda" ? second_born_lambda(cfg) : second_born_time(cfg);
            }
            py::dict d;
            d["field"] = r.field;
            d["truncated"] = r.truncated;
            d["exponent"] = r.exponent;
            d["tail_fraction"] = r.tail_fraction;
            return d;
        },
        py::arg("u0"), py::arg("t_max") = 8.0, py::arg("dt") = 0.05, py::arg("path") = "lambda",
        "Second Born term for P = |xi|^2 and m = 1.");

    m.def("list_experiments", &list_experiments);
    m.def(
        "run_experiment",
        [](const std::string& text) {
            RunResult r;
            try {
                Json cfg = parse_config_text(text);
                py::gil_scoped_release release;
                r = run_experiment(cfg);
            } catch (const ConfigError& e) {
                r.error = e.what();
            }
            return run_dict(r);
        },
        py::arg("config_json"));
}
