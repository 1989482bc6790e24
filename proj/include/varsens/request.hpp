#pragma once

// Analysis requests: parameter ingestion (native JSON and the legacy
// '&'-joined format), method orchestration and report rendering. The CLI and
// the Python module are thin layers over this.

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "varsens/quadrature.hpp"
#include "varsens/sampling.hpp"
#include "varsens/sensitivity.hpp"

namespace varsens {

enum class AnalysisMethod { variance, sobol, variance_mc, sobol_mc, total_variance, pair_interactions };

std::string_view analysis_method_name(AnalysisMethod m) noexcept;
/// Accepts the CLI spellings: variance, sobol, variance-mc, sobol-mc,
/// total-variance, pair-interactions.
std::optional<AnalysisMethod> parse_analysis_method(std::string_view name) noexcept;

enum class OutputFormat { table, json };
enum class InputForm { native, legacy };

struct AnalysisRequest {
    std::string equation;
    std::vector<ParameterSpec> parameters;
    std::vector<AnalysisMethod> methods;
    QuadratureConfig quadrature;
    std::optional<SampleConfig> sampling;
    OutputFormat output = OutputFormat::table;
    InputForm input_form = InputForm::native;
    /// Adds wall-clock times to the report, which makes it non-reproducible.
    bool timing = false;
};

/// Parses `{"param":"x","min":"1","max":"10","fixed":"5"}&{...}`. Numbers may
/// be given as strings (the legacy form) or as JSON numbers; `fixed` is
/// optional. Throws MalformedLegacyEntry or DuplicateParam.
std::vector<ParameterSpec> parse_legacy_params(std::string_view text);

struct NativeDocument {
    std::optional<std::string> equation;
    std::vector<ParameterSpec> parameters;
};

/// Parses `{"equation": ..., "parameters": [{"param","min","max","fixed"?}]}`
/// or a bare parameter array. Fields are JSON numbers.
NativeDocument parse_native_document(std::string_view json_text);

/// An error raised while running one method, tagged with that method.
class MethodError : public Error {
public:
    MethodError(std::string method, const Error& cause);
    const std::string& method() const noexcept { return method_; }
    const std::string& cause_message() const noexcept { return cause_message_; }

private:
    std::string method_;
    std::string cause_message_;
};

/// Checks that the equation parses, every free variable has exactly one
/// parameter and no parameter is unused. Returns the parsed expression.
Expression validate_request(const AnalysisRequest& request);

/// JSON form of one method's report, as embedded under "results". Wall time
/// is included only when `timing` is set.
nlohmann::json report_to_json(const SensitivityReport& report, bool timing = false);

/// Runs every requested method; throws MethodError on the first failure.
nlohmann::json analyze(const AnalysisRequest& request);

/// Human-readable rendering of a report produced by analyze().
std::string format_table(const nlohmann::json& report);

/// Runs the request and writes the report to `out`, diagnostics to `err`.
/// Returns the process exit code: 0 success, 2 input error, 3 numerical
/// error, 4 budget exceeded.
int run(const AnalysisRequest& request, std::ostream& out, std::ostream& err);

}  // namespace varsens
