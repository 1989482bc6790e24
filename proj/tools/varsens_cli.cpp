// varsens: variance-based sensitivity indices of an expression.
//
//   varsens --equation "sin(x) + 7*sin(y)^2 + 0.1*z^4*sin(x)" \
//           --params params.json --method variance --method sobol

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "varsens/request.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw varsens::InvalidArgument("cannot open parameter file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool looks_inline(const std::string& s) {
    const auto pos = s.find_first_not_of(" \t\r\n");
    return pos != std::string::npos && (s[pos] == '{' || s[pos] == '[');
}

/// "N" sets both loops, "NxM" sets outer N and inner M.
std::pair<std::size_t, std::size_t> parse_samples(const std::string& s) {
    const auto x = s.find('x');
    try {
        std::size_t used = 0;
        if (x == std::string::npos) {
            const auto n = std::stoull(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return {n, n};
        }
        const auto outer = std::stoull(s.substr(0, x), &used);
        if (used != x) throw std::invalid_argument(s);
        const std::string rest = s.substr(x + 1);
        const auto inner = std::stoull(rest, &used);
        if (used != rest.size()) throw std::invalid_argument(s);
        return {outer, inner};
    } catch (const std::exception&) {
        throw varsens::InvalidArgument("--samples expects N or NxM, got '" + s + "'");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variance-based sensitivity analysis by numerical quadrature"};
    app.set_version_flag("--version", "varsens 0.1.0");

    std::string equation;
    std::string params;
    std::string legacy;
    std::vector<std::string> methods;
    double delta = 1e-5;
    double delta_base = 1e-3;
    double delta_outer = 0.0;
    std::uint64_t budget = 100'000'000;
    std::uint64_t seed = 42;
    std::string samples;
    unsigned threads = 0;
    std::string output = "table";
    bool timing = false;

    app.add_option("--equation,-e", equation, "Expression (plain or Math.* syntax)");
    app.add_option("--params,-p", params,
                   "Native parameter JSON: a file path or an inline document");
    app.add_option("--legacy-params", legacy,
                   "Legacy parameters: {\"param\":\"x\",\"min\":\"1\",\"max\":\"10\"}&{...}");
    app.add_option("--method,-m", methods,
                   "variance, sobol, variance-mc, sobol-mc, total-variance, pair-interactions "
                   "(repeatable; default variance)")
        ->delimiter(',');
    app.add_option("--delta", delta, "1-D trapezoid resolution")->capture_default_str();
    app.add_option("--delta-base", delta_base, "n-D grid resolution")->capture_default_str();
    app.add_option("--delta-outer", delta_outer,
                   "Sobol conditioning-grid resolution (default: --delta-base)");
    app.add_option("--budget", budget, "Maximum grid evaluations per integral")
        ->capture_default_str();
    app.add_option("--seed", seed, "Seed for the sampling methods")->capture_default_str();
    app.add_option("--samples", samples, "Sample counts: N or NxM (outer x inner)");
    app.add_option("--threads", threads, "Worker threads (0 = hardware)")->capture_default_str();
    app.add_option("--output,-o", output, "Report format")
        ->check(CLI::IsMember({"table", "json"}))
        ->capture_default_str();
    app.add_flag("--timing", timing, "Include wall-clock times in the report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    varsens::AnalysisRequest request;
    try {
        if (!params.empty() && !legacy.empty()) {
            throw varsens::InvalidArgument("use either --params or --legacy-params, not both");
        }
        if (!legacy.empty()) {
            request.parameters = varsens::parse_legacy_params(legacy);
            request.input_form = varsens::InputForm::legacy;
        } else if (!params.empty()) {
            auto doc = varsens::parse_native_document(looks_inline(params) ? params
                                                                           : read_file(params));
            request.parameters = std::move(doc.parameters);
            if (equation.empty() && doc.equation) equation = *doc.equation;
        } else {
            throw varsens::InvalidArgument("no parameters: pass --params or --legacy-params");
        }
        if (equation.empty()) throw varsens::InvalidArgument("no equation given");
        request.equation = equation;

        if (methods.empty()) methods.emplace_back("variance");
        for (const auto& m : methods) {
            const auto parsed = varsens::parse_analysis_method(m);
            if (!parsed) throw varsens::InvalidArgument("unknown method '" + m + "'");
            request.methods.push_back(*parsed);
        }

        request.quadrature.delta_1d = delta;
        request.quadrature.delta_base_nd = delta_base;
        if (delta_outer > 0.0) request.quadrature.delta_outer = delta_outer;
        request.quadrature.max_evaluations = budget;
        request.quadrature.threads = threads;

        varsens::SampleConfig sampling;
        sampling.seed = seed;
        sampling.threads = threads;
        if (!samples.empty()) {
            std::tie(sampling.samples_outer, sampling.samples_inner) = parse_samples(samples);
        }
        request.sampling = sampling;
        request.output = output == "json" ? varsens::OutputFormat::json
                                          : varsens::OutputFormat::table;
        request.timing = timing;
    } catch (const varsens::Error& e) {
        std::cerr << "error: " << e.kind() << ": " << e.what() << '\n';
        return varsens::exit_code(e.category());
    }

    return varsens::run(request, std::cout, std::cerr);
}
