#include "varsens/request.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

namespace varsens {

using nlohmann::json;

namespace {

constexpr std::string_view kMethodNames[] = {"variance", "sobol", "variance-mc",
                                             "sobol-mc", "total-variance", "pair-interactions"};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

/// Splits at '&' outside of JSON string literals.
std::vector<std::string_view> split_entries(std::string_view text) {
    std::vector<std::string_view> out;
    bool in_string = false;
    bool escaped = false;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
        } else if (c == '"') {
            in_string = true;
        } else if (c == '&') {
            out.push_back(text.substr(start, i - start));
            start = i + 1;
        }
    }
    out.push_back(text.substr(start));
    return out;
}

std::optional<double> parse_real(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

double legacy_number(const json& obj, const char* key, std::size_t index) {
    const json& v = obj.at(key);
    if (v.is_string()) {
        const auto parsed = parse_real(v.get_ref<const std::string&>());
        if (!parsed) {
            throw MalformedLegacyEntry(index, std::string("field '") + key + "' value \"" +
                                                  v.get<std::string>() + "\" is not a number");
        }
        return *parsed;
    }
    if (v.is_number()) {
        const double d = v.get<double>();
        if (std::isfinite(d)) return d;
    }
    throw MalformedLegacyEntry(index, std::string("field '") + key + "' must be a number");
}

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

json spec_json(const ParameterSpec& p) {
    json j{{"param", p.param}, {"min", p.min}, {"max", p.max}};
    if (p.fixed) j["fixed"] = *p.fixed;
    return j;
}

template <class F>
auto attributed(AnalysisMethod m, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        throw MethodError(std::string(analysis_method_name(m)), e);
    }
}

}  // namespace

std::string_view analysis_method_name(AnalysisMethod m) noexcept {
    return kMethodNames[static_cast<std::size_t>(m)];
}

std::optional<AnalysisMethod> parse_analysis_method(std::string_view name) noexcept {
    for (std::size_t i = 0; i < std::size(kMethodNames); ++i) {
        if (kMethodNames[i] == name) return static_cast<AnalysisMethod>(i);
    }
    return std::nullopt;
}

json report_to_json(const SensitivityReport& r, bool timing) {
    const bool fixed_values = r.method == Method::variance || r.method == Method::variance_mc;
    json entries = json::array();
    for (const auto& e : r.entries) {
        json j{{"param", e.param},
               {"raw_variance", e.raw_variance},
               {"mean", e.mean},
               {"mean_square", e.mean_square}};
        if (e.percentage) j["percentage"] = *e.percentage;
        if (e.absolute_index) j["absolute_index"] = *e.absolute_index;
        if (e.standard_error) j["standard_error"] = *e.standard_error;
        entries.push_back(std::move(j));
    }
    json out{{"method", method_name(r.method)}, {"entries", std::move(entries)}};
    json diag{{"clamped_negative", r.diagnostics.clamped_negative},
              {"evaluations", r.diagnostics.evaluations}};
    if (timing) diag["wall_time_seconds"] = r.diagnostics.wall_time_seconds;
    out["diagnostics"] = std::move(diag);
    if (r.total_variance) out["total_variance"] = *r.total_variance;
    if (fixed_values) {
        json fixed = json::object();
        for (const auto& p : r.settings.parameters) fixed[p.param] = p.fixed_or_midpoint();
        out["fixed_values"] = std::move(fixed);
    }
    return out;
}

std::vector<ParameterSpec> parse_legacy_params(std::string_view text) {
    if (trim(text).empty()) throw MalformedLegacyEntry(0, "no parameter entries");
    std::vector<ParameterSpec> out;
    std::set<std::string, std::less<>> seen;
    const auto pieces = split_entries(text);
    for (std::size_t index = 0; index < pieces.size(); ++index) {
        const std::string_view piece = trim(pieces[index]);
        if (piece.empty()) throw MalformedLegacyEntry(index, "empty entry");
        json obj;
        try {
            obj = json::parse(piece);
        } catch (const json::parse_error& e) {
            throw MalformedLegacyEntry(index, std::string("invalid JSON: ") + e.what());
        }
        if (!obj.is_object()) throw MalformedLegacyEntry(index, "entry must be a JSON object");
        for (const auto& [key, value] : obj.items()) {
            if (key != "param" && key != "min" && key != "max" && key != "fixed") {
                throw MalformedLegacyEntry(index, "unknown field '" + key + "'");
            }
        }
        for (const char* key : {"param", "min", "max"}) {
            if (!obj.contains(key)) {
                throw MalformedLegacyEntry(index, std::string("missing field '") + key + "'");
            }
        }
        if (!obj["param"].is_string() || obj["param"].get_ref<const std::string&>().empty()) {
            throw MalformedLegacyEntry(index, "field 'param' must be a non-empty string");
        }
        ParameterSpec spec;
        spec.param = obj["param"].get<std::string>();
        spec.min = legacy_number(obj, "min", index);
        spec.max = legacy_number(obj, "max", index);
        if (obj.contains("fixed")) spec.fixed = legacy_number(obj, "fixed", index);
        if (!(spec.max > spec.min)) {
            throw MalformedLegacyEntry(index, "parameter '" + spec.param +
                                                  "': max must be greater than min");
        }
        if (spec.fixed && !(*spec.fixed >= spec.min && *spec.fixed <= spec.max)) {
            throw MalformedLegacyEntry(index, "parameter '" + spec.param +
                                                  "': fixed value lies outside [min, max]");
        }
        if (!seen.insert(spec.param).second) throw DuplicateParam(spec.param);
        out.push_back(std::move(spec));
    }
    return out;
}

NativeDocument parse_native_document(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw InvalidArgument(std::string("parameter document is not valid JSON: ") + e.what());
    }
    NativeDocument out;
    const json* list = &doc;
    if (doc.is_object()) {
        if (doc.contains("equation")) {
            if (!doc["equation"].is_string()) throw InvalidArgument("'equation' must be a string");
            out.equation = doc["equation"].get<std::string>();
        }
        if (!doc.contains("parameters")) throw InvalidArgument("missing 'parameters' array");
        list = &doc["parameters"];
    }
    if (!list->is_array()) throw InvalidArgument("'parameters' must be an array");
    std::set<std::string, std::less<>> seen;
    for (const json& p : *list) {
        if (!p.is_object()) throw InvalidArgument("each parameter must be a JSON object");
        if (!p.contains("param") || !p["param"].is_string()) {
            throw InvalidArgument("parameter entry needs a string 'param'");
        }
        ParameterSpec spec;
        spec.param = p["param"].get<std::string>();
        const auto number = [&](const char* key) {
            if (!p.contains(key) || !p[key].is_number()) {
                throw InvalidArgument("parameter '" + spec.param + "': '" + key +
                                      "' must be a JSON number");
            }
            return p[key].get<double>();
        };
        spec.min = number("min");
        spec.max = number("max");
        if (p.contains("fixed") && !p["fixed"].is_null()) spec.fixed = number("fixed");
        for (const auto& [key, value] : p.items()) {
            if (key != "param" && key != "min" && key != "max" && key != "fixed") {
                throw InvalidArgument("parameter '" + spec.param + "': unknown field '" + key + "'");
            }
        }
        spec.validate();
        if (!seen.insert(spec.param).second) throw DuplicateParam(spec.param);
        out.parameters.push_back(std::move(spec));
    }
    return out;
}

MethodError::MethodError(std::string method, const Error& cause)
    : Error(cause.category(), cause.kind(), "[" + method + "] " + cause.kind() + ": " + cause.what()),
      method_(std::move(method)),
      cause_message_(cause.what()) {}

Expression validate_request(const AnalysisRequest& request) {
    if (request.methods.empty()) throw InvalidArgument("no analysis method requested");
    if (request.parameters.empty()) throw InvalidArgument("no parameters given");
    Expression expr = parse(request.equation);
    const auto vars = free_variables(expr);
    std::set<std::string, std::less<>> seen;
    for (const auto& p : request.parameters) {
        p.validate();
        if (!seen.insert(p.param).second) throw DuplicateParam(p.param);
        if (std::find(vars.begin(), vars.end(), p.param) == vars.end()) {
            throw InvalidArgument("parameter '" + p.param + "' does not appear in the equation");
        }
    }
    for (const auto& v : vars) {
        if (!seen.contains(v)) throw UncoveredVariable(v);
    }
    request.quadrature.validate();
    if (request.sampling) request.sampling->validate();
    return expr;
}

json analyze(const AnalysisRequest& request) {
    const Expression expr = validate_request(request);
    const auto& params = request.parameters;
    const QuadratureConfig& qcfg = request.quadrature;
    const SampleConfig scfg = request.sampling.value_or(SampleConfig{});

    std::vector<AnalysisMethod> methods;
    for (AnalysisMethod m : request.methods) {
        if (std::find(methods.begin(), methods.end(), m) == methods.end()) methods.push_back(m);
    }
    const auto wants = [&](AnalysisMethod m) {
        return std::find(methods.begin(), methods.end(), m) != methods.end();
    };
    const bool any_mc = wants(AnalysisMethod::variance_mc) || wants(AnalysisMethod::sobol_mc);

    json settings{{"delta_1d", qcfg.delta_1d},
                  {"delta_base", qcfg.delta_base_nd},
                  {"delta_outer", qcfg.outer_resolution()},
                  {"max_evaluations", qcfg.max_evaluations}};
    if (any_mc) {
        settings["seed"] = scfg.seed;
        settings["samples_outer"] = scfg.samples_outer;
        settings["samples_inner"] = scfg.samples_inner;
    }
    json method_list = json::array();
    for (AnalysisMethod m : methods) method_list.push_back(analysis_method_name(m));
    settings["methods"] = std::move(method_list);

    json params_json = json::array();
    for (const auto& p : params) params_json.push_back(spec_json(p));

    json report{{"equation", request.equation},
                {"canonical_equation", to_string(expr)},
                {"input_form", request.input_form == InputForm::legacy ? "legacy" : "native"},
                {"settings", std::move(settings)},
                {"parameters", std::move(params_json)}};
    json results = json::object();

    std::optional<double> total;
    if (wants(AnalysisMethod::total_variance)) {
        total = attributed(AnalysisMethod::total_variance,
                           [&] { return total_variance(expr, params, qcfg); });
        results["total_variance"] = *total;
    }
    const auto with_total = [&](SensitivityReport r) {
        if (total && *total > kNoVariationThreshold) return absolute_indices(std::move(r), *total);
        return r;
    };

    for (AnalysisMethod m : methods) {
        const std::string key(analysis_method_name(m));
        switch (m) {
            case AnalysisMethod::variance:
                results[key] = attributed(m, [&] {
                    return report_to_json(
                        with_total(first_order_variance_contributions(expr, params, qcfg)),
                        request.timing);
                });
                break;
            case AnalysisMethod::sobol:
                results[key] = attributed(m, [&] {
                    return report_to_json(with_total(sobol_first_order(expr, params, qcfg)),
                                          request.timing);
                });
                break;
            case AnalysisMethod::variance_mc:
                results[key] = attributed(m, [&] {
                    return report_to_json(mc_variance_contribution(expr, params, scfg),
                                          request.timing);
                });
                break;
            case AnalysisMethod::sobol_mc:
                results[key] = attributed(m, [&] {
                    return report_to_json(mc_sobol_first_order(expr, params, scfg),
                                          request.timing);
                });
                break;
            case AnalysisMethod::total_variance: break;
            case AnalysisMethod::pair_interactions:
                results[key] = attributed(m, [&] {
                    json pairs = json::array();
                    for (std::size_t i = 0; i < params.size(); ++i) {
                        for (std::size_t j = i + 1; j < params.size(); ++j) {
                            const auto p = sobol_pair_interaction(expr, params, params[i].param,
                                                                  params[j].param, qcfg);
                            json pj{{"params", {p.first, p.second}},
                                    {"joint_variance", p.joint_variance},
                                    {"value", p.value}};
                            if (total && *total > kNoVariationThreshold) {
                                pj["index"] = p.value / *total;
                            }
                            pairs.push_back(std::move(pj));
                        }
                    }
                    return pairs;
                });
                break;
        }
    }
    report["results"] = std::move(results);
    return report;
}

std::string format_table(const json& report) {
    std::ostringstream os;
    os << "equation: " << report.at("equation").get<std::string>() << '\n';
    const json& settings = report.at("settings");
    os << "delta_1d = " << format_real(settings.at("delta_1d").get<double>())
       << ", delta_base = " << format_real(settings.at("delta_base").get<double>())
       << ", delta_outer = " << format_real(settings.at("delta_outer").get<double>()) << '\n';
    if (settings.contains("seed")) {
        os << "seed = " << settings.at("seed").get<std::uint64_t>()
           << ", samples = " << settings.at("samples_outer").get<std::size_t>() << " x "
           << settings.at("samples_inner").get<std::size_t>() << '\n';
    }
    const json& results = report.at("results");

    std::vector<std::string> methods;
    for (const char* m : {"variance", "sobol", "variance-mc", "sobol-mc"}) {
        if (results.contains(m)) methods.emplace_back(m);
    }
    if (!methods.empty()) {
        os << '\n' << std::left << std::setw(12) << "param";
        for (const auto& m : methods) {
            os << std::right << std::setw(16) << (m + " raw") << std::setw(12) << (m + " %");
        }
        os << '\n';
        const json& params = report.at("parameters");
        for (std::size_t i = 0; i < params.size(); ++i) {
            os << std::left << std::setw(12) << params[i].at("param").get<std::string>();
            for (const auto& m : methods) {
                const json& e = results.at(m).at("entries").at(i);
                char raw[32];
                std::snprintf(raw, sizeof raw, "%.7g", e.at("raw_variance").get<double>());
                char pct[32] = "-";
                if (e.contains("percentage")) {
                    std::snprintf(pct, sizeof pct, "%.2f", e.at("percentage").get<double>());
                }
                os << std::right << std::setw(16) << raw << std::setw(12) << pct;
            }
            os << '\n';
        }
    }
    if (results.contains("total_variance")) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.7g", results.at("total_variance").get<double>());
        os << "\ntotal variance: " << buf << '\n';
    }
    if (results.contains("pair-interactions")) {
        os << "\npair interactions:\n";
        for (const json& p : results.at("pair-interactions")) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.7g", p.at("value").get<double>());
            os << "  " << p.at("params").at(0).get<std::string>() << ", "
               << p.at("params").at(1).get<std::string>() << ": " << buf << '\n';
        }
    }
    return os.str();
}

int run(const AnalysisRequest& request, std::ostream& out, std::ostream& err) {
    try {
        const json report = analyze(request);
        if (request.output == OutputFormat::json) {
            out << report.dump(2) << '\n';
        } else {
            out << format_table(report);
        }
        return 0;
    } catch (const MethodError& e) {
        err << "error [" << e.method() << "]: " << e.kind() << ": " << e.cause_message() << '\n';
        return exit_code(e.category());
    } catch (const Error& e) {
        err << "error: " << e.kind() << ": " << e.what() << '\n';
        return exit_code(e.category());
    }
}

}  // namespace varsens
