#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "varsens/errors.hpp"
#include "varsens/expression.hpp"
#include "varsens/request.hpp"
#include "varsens/sampling.hpp"
#include "varsens/sensitivity.hpp"

namespace py = pybind11;
using namespace varsens;

namespace {

py::object to_python(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

Expression as_expression(const py::object& obj) {
    if (py::isinstance<py::str>(obj)) return parse(obj.cast<std::string>());
    return obj.cast<Expression>();
}

ParameterSpec as_spec(const py::handle& item) {
    if (py::isinstance<ParameterSpec>(item)) return item.cast<ParameterSpec>();
    if (!py::isinstance<py::dict>(item)) {
        throw InvalidArgument("parameters must be ParameterSpec objects or dicts");
    }
    const auto d = item.cast<py::dict>();
    for (const auto& kv : d) {
        const auto key = kv.first.cast<std::string>();
        if (key != "param" && key != "min" && key != "max" && key != "fixed") {
            throw InvalidArgument("unknown parameter field '" + key + "'");
        }
    }
    if (!d.contains("param") || !d.contains("min") || !d.contains("max")) {
        throw InvalidArgument("parameter dict needs 'param', 'min' and 'max'");
    }
    ParameterSpec p;
    p.param = d["param"].cast<std::string>();
    p.min = d["min"].cast<double>();
    p.max = d["max"].cast<double>();
    if (d.contains("fixed") && !d["fixed"].is_none()) p.fixed = d["fixed"].cast<double>();
    return p;
}

std::vector<ParameterSpec> as_specs(const py::iterable& items) {
    std::vector<ParameterSpec> out;
    for (const auto& item : items) out.push_back(as_spec(item));
    return out;
}

QuadratureConfig quadrature_or_default(const std::optional<QuadratureConfig>& c) {
    return c.value_or(QuadratureConfig{});
}

template <class F>
py::object report_call(F&& f) {
    SensitivityReport r;
    {
        py::gil_scoped_release release;
        r = f();
    }
    return to_python(report_to_json(r));
}

// Python exception classes, one per error category, under a common base.
PyObject* g_base = nullptr;
PyObject* g_input = nullptr;
PyObject* g_numerical = nullptr;
PyObject* g_budget = nullptr;

PyObject* new_exception(py::module_& m, const char* name, PyObject* base, const char* doc) {
    const std::string qualified = std::string("varsens.") + name;
    PyObject* cls = PyErr_NewExceptionWithDoc(qualified.c_str(), doc, base, nullptr);
    m.add_object(name, py::reinterpret_borrow<py::object>(cls));
    return cls;
}

}  // namespace

PYBIND11_MODULE(_varsens, m) {
    m.doc() = "Variance-based sensitivity analysis by numerical quadrature";

    g_base = new_exception(m, "Error", PyExc_Exception, "Base class of varsens errors.");
    g_input = new_exception(m, "InputError", g_base, "Malformed expression or parameters.");
    g_numerical = new_exception(m, "NumericalError", g_base,
                                "Non-finite values, negative variances or no variation.");
    g_budget = new_exception(m, "BudgetExceeded", g_base, "Grid larger than the evaluation budget.");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            PyObject* cls = g_input;
            if (e.category() == ErrorCategory::numerical) cls = g_numerical;
            if (e.category() == ErrorCategory::budget) cls = g_budget;
            PyErr_SetString(cls, (e.kind() + ": " + e.what()).c_str());
        }
    });

    py::class_<Expression>(m, "Expression")
        .def("__str__", [](const Expression& e) { return to_string(e); })
        .def("__repr__", [](const Expression& e) { return "Expression('" + to_string(e) + "')"; })
        .def("__eq__", [](const Expression& a, const Expression& b) { return a == b; })
        .def("free_variables", [](const Expression& e) { return free_variables(e); })
        .def(
            "evaluate",
            [](const Expression& e, const std::map<std::string, double>& at) {
                return evaluate(e, Binding(at.begin(), at.end()));
            },
            py::arg("binding"));

    m.def("parse", [](const std::string& s) { return parse(s); }, py::arg("source"));
    m.def(
        "evaluate",
        [](const py::object& expr, const std::map<std::string, double>& at) {
            return evaluate(as_expression(expr), Binding(at.begin(), at.end()));
        },
        py::arg("expression"), py::arg("binding"));
    m.def(
        "free_variables", [](const py::object& expr) { return free_variables(as_expression(expr)); },
        py::arg("expression"));

    py::class_<ParameterSpec>(m, "ParameterSpec")
        .def(py::init([](std::string param, double min, double max, std::optional<double> fixed) {
                 ParameterSpec p{std::move(param), min, max, fixed};
                 p.validate();
                 return p;
             }),
             py::arg("param"), py::arg("min"), py::arg("max"), py::arg("fixed") = py::none())
        .def_readonly("param", &ParameterSpec::param)
        .def_readonly("min", &ParameterSpec::min)
        .def_readonly("max", &ParameterSpec::max)
        .def_readonly("fixed", &ParameterSpec::fixed)
        .def("__eq__", [](const ParameterSpec& a, const ParameterSpec& b) { return a == b; })
        .def("__repr__", [](const ParameterSpec& p) {
            return "ParameterSpec('" + p.param + "', " + py::repr(py::float_(p.min)).cast<std::string>() +
                   ", " + py::repr(py::float_(p.max)).cast<std::string>() +
                   (p.fixed ? ", fixed=" + py::repr(py::float_(*p.fixed)).cast<std::string>() : "") +
                   ")";
        });

    py::class_<QuadratureConfig>(m, "QuadratureConfig")
        .def(py::init([](double delta_1d, double delta_base, std::optional<double> delta_outer,
                         std::uint64_t max_evaluations, unsigned threads) {
                 QuadratureConfig c;
                 c.delta_1d = delta_1d;
                 c.delta_base_nd = delta_base;
                 c.delta_outer = delta_outer;
                 c.max_evaluations = max_evaluations;
                 c.threads = threads;
                 c.validate();
                 return c;
             }),
             py::arg("delta_1d") = 1e-5, py::arg("delta_base") = 1e-3,
             py::arg("delta_outer") = py::none(), py::arg("max_evaluations") = 100'000'000,
             py::arg("threads") = 0)
        .def_readonly("delta_1d", &QuadratureConfig::delta_1d)
        .def_readonly("delta_base", &QuadratureConfig::delta_base_nd)
        .def_readonly("delta_outer", &QuadratureConfig::delta_outer)
        .def_readonly("max_evaluations", &QuadratureConfig::max_evaluations)
        .def_readonly("threads", &QuadratureConfig::threads);

    py::class_<SampleConfig>(m, "SampleConfig")
        .def(py::init([](std::uint64_t seed, std::size_t outer, std::size_t inner, unsigned threads) {
                 SampleConfig c{seed, outer, inner, threads};
                 c.validate();
                 return c;
             }),
             py::arg("seed") = 42, py::arg("samples_outer") = 10'000,
             py::arg("samples_inner") = 1'000, py::arg("threads") = 0)
        .def_readonly("seed", &SampleConfig::seed)
        .def_readonly("samples_outer", &SampleConfig::samples_outer)
        .def_readonly("samples_inner", &SampleConfig::samples_inner)
        .def_readonly("threads", &SampleConfig::threads);

    m.def(
        "parse_legacy_params", [](const std::string& text) { return parse_legacy_params(text); },
        py::arg("text"));

    m.def(
        "variance_contributions",
        [](const py::object& expr, const py::iterable& params,
           const std::optional<QuadratureConfig>& cfg) {
            const Expression e = as_expression(expr);
            const auto p = as_specs(params);
            return report_call(
                [&] { return first_order_variance_contributions(e, p, quadrature_or_default(cfg)); });
        },
        py::arg("expression"), py::arg("params"), py::arg("config") = py::none());

    m.def(
        "sobol_first_order",
        [](const py::object& expr, const py::iterable& params,
           const std::optional<QuadratureConfig>& cfg) {
            const Expression e = as_expression(expr);
            const auto p = as_specs(params);
            return report_call([&] { return sobol_first_order(e, p, quadrature_or_default(cfg)); });
        },
        py::arg("expression"), py::arg("params"), py::arg("config") = py::none());

    m.def(
        "total_variance",
        [](const py::object& expr, const py::iterable& params,
           const std::optional<QuadratureConfig>& cfg) {
            const Expression e = as_expression(expr);
            const auto p = as_specs(params);
            py::gil_scoped_release release;
            return total_variance(e, p, quadrature_or_default(cfg));
        },
        py::arg("expression"), py::arg("params"), py::arg("config") = py::none());

    m.def(
        "grouped_variance",
        [](const py::object& expr, const py::iterable& params, const std::vector<std::string>& subset,
           const std::optional<QuadratureConfig>& cfg) {
            const Expression e = as_expression(expr);
            const auto p = as_specs(params);
            py::gil_scoped_release release;
            return grouped_variance_contribution(e, p, subset, quadrature_or_default(cfg));
        },
        py::arg("expression"), py::arg("params"), py::arg("subset"), py::arg("config") = py::none());

    m.def(
        "pair_interaction",
        [](const py::object& expr, const py::iterable& params, const std::string& first,
           const std::string& second, const std::optional<QuadratureConfig>& cfg) {
            const Expression e = as_expression(expr);
            const auto p = as_specs(params);
            PairInteraction r;
            {
                py::gil_scoped_release release;
                r = sobol_pair_interaction(e, p, first, second, quadrature_or_default(cfg));
            }
            py::dict d;
            d["params"] = py::make_tuple(r.first, r.second);
            d["joint_variance"] = r.joint_variance;
            d["first_variance"] = r.first_variance;
            d["second_variance"] = r.second_variance;
            d["value"] = r.value;
            return d;
        },
        py::arg("expression"), py::arg("params"), py::arg("first"), py::arg("second"),
        py::arg("config") = py::none());

    m.def(
        "mc_variance_contribution",
        [](const py::object& expr, const py::iterable& params,
           const std::optional<SampleConfig>& cfg) {
            const Expression e = as_expression(expr);
            const auto p = as_specs(params);
            return report_call(
                [&] { return mc_variance_contribution(e, p, cfg.value_or(SampleConfig{})); });
        },
        py::arg("expression"), py::arg("params"), py::arg("config") = py::none());

    m.def(
        "mc_sobol_first_order",
        [](const py::object& expr, const py::iterable& params,
           const std::optional<SampleConfig>& cfg) {
            const Expression e = as_expression(expr);
            const auto p = as_specs(params);
            return report_call(
                [&] { return mc_sobol_first_order(e, p, cfg.value_or(SampleConfig{})); });
        },
        py::arg("expression"), py::arg("params"), py::arg("config") = py::none());

    m.def(
        "analyze",
        [](const std::string& equation, const py::iterable& params,
           const std::vector<std::string>& methods, const std::optional<QuadratureConfig>& quadrature,
           const std::optional<SampleConfig>& sampling) {
            AnalysisRequest req;
            req.equation = equation;
            req.parameters = as_specs(params);
            for (const auto& name : methods) {
                const auto method = parse_analysis_method(name);
                if (!method) throw InvalidArgument("unknown method '" + name + "'");
                req.methods.push_back(*method);
            }
            req.quadrature = quadrature_or_default(quadrature);
            req.sampling = sampling;
            nlohmann::json j;
            {
                py::gil_scoped_release release;
                j = analyze(req);
            }
            return to_python(j);
        },
        py::arg("equation"), py::arg("params"), py::arg("methods") = std::vector<std::string>{"variance"},
        py::arg("quadrature") = py::none(), py::arg("sampling") = py::none());
}
