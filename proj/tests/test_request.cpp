#include <gtest/gtest.h>

#include <sstream>

#include "varsens/errors.hpp"
#include "varsens/request.hpp"

using namespace varsens;
using nlohmann::json;

namespace {

constexpr double kA = 0.31415926535897932384626433;

const std::string kVarianceBlock =
    "{\"param\":\"x\",\"min\":\"-0.31415926535897932384626433\",\n"
    "\"max\":\"0.31415926535897932384626433\",\"fixed\":\"0.0\"} &\n"
    "{\"param\":\"y\",\"min\":\"-0.31415926535897932384626433\",\n"
    "\"max\":\"0.31415926535897932384626433\",\"fixed\":\"0.0\"} &\n"
    "{\"param\":\"z\",\"min\":\"-0.31415926535897932384626433\",\n"
    "\"max\":\"0.31415926535897932384626433\",\"fixed\":\"0.0\"}";

const std::string kSobolBlock =
    "{\"param\":\"x\",\"min\":\"-0.31415926535897932384626433\",\n"
    "\"max\":\"0.31415926535897932384626433\"} &\n"
    "{\"param\":\"y\",\"min\":\"-0.31415926535897932384626433\",\n"
    "\"max\":\"0.31415926535897932384626433\"} &\n"
    "{\"param\":\"z\",\"min\":\"-0.31415926535897932384626433\",\n"
    "\"max\":\"0.31415926535897932384626433\"}";

constexpr const char* kIshigamiJs =
    "Math.sin(x) + 7*Math.pow(Math.sin(y),2) + 0.1*(Math.pow(z,4))*Math.sin(x)";

AnalysisRequest request(std::string eq, std::vector<ParameterSpec> params,
                        std::vector<AnalysisMethod> methods) {
    AnalysisRequest r;
    r.equation = std::move(eq);
    r.parameters = std::move(params);
    r.methods = std::move(methods);
    r.quadrature.delta_base_nd = 0.02;
    r.output = OutputFormat::json;
    return r;
}

int run_capture(const AnalysisRequest& r, std::string& out, std::string& err) {
    std::ostringstream o, e;
    const int code = run(r, o, e);
    out = o.str();
    err = e.str();
    return code;
}

}  // namespace

TEST(Legacy, TwoEntryExample) {
    const auto specs = parse_legacy_params(
        R"({"param":"x","min":"1","max":"10","fixed":"5"}&{"param":"y","min":"2","max":"5","fixed":"3"})");
    ASSERT_EQ(specs.size(), 2u);
    EXPECT_EQ(specs[0], (ParameterSpec{"x", 1, 10, 5.0}));
    EXPECT_EQ(specs[1], (ParameterSpec{"y", 2, 5, 3.0}));
    // spacing as typed into the original text area
    EXPECT_EQ(parse_legacy_params(
                  R"({ "param": "x", "min": "1", "max": "10", "fixed": "5" } & {"param": "y", "min": "2", "max": "5", "fixed": "3" })"),
              specs);
}

TEST(Legacy, VarianceAndSobolBlocks) {
    const auto v = parse_legacy_params(kVarianceBlock);
    const auto s = parse_legacy_params(kSobolBlock);
    ASSERT_EQ(v.size(), 3u);
    ASSERT_EQ(s.size(), 3u);
    const char* names[] = {"x", "y", "z"};
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(v[i], (ParameterSpec{names[i], -kA, kA, 0.0}));
        EXPECT_EQ(s[i], (ParameterSpec{names[i], -kA, kA, std::nullopt}));
        EXPECT_EQ(s[i].fixed_or_midpoint(), 0.0);
    }
}

TEST(Legacy, SingleEntryWithoutFixed) {
    const auto s = parse_legacy_params(
        R"({"param":"x","min":"-0.31415926535897932384626433","max":"0.31415926535897932384626433"})");
    ASSERT_EQ(s.size(), 1u);
    EXPECT_FALSE(s[0].fixed);
    EXPECT_EQ(s[0].fixed_or_midpoint(), 0.0);
}

TEST(Legacy, NumericFieldsAlsoAccepted) {
    const auto s = parse_legacy_params(R"({"param":"x","min":0,"max":2.5})");
    EXPECT_EQ(s[0], (ParameterSpec{"x", 0, 2.5, std::nullopt}));
}

TEST(Legacy, Errors) {
    try {
        parse_legacy_params(R"({"param":"x","min":"5","max":"1"})");
        FAIL();
    } catch (const MalformedLegacyEntry& e) {
        EXPECT_EQ(e.index(), 0u);
        EXPECT_EQ(e.category(), ErrorCategory::input);
    }
    try {
        parse_legacy_params(R"({"param":"x","min":"0","max":"1"}&{"param":"y","min":"a","max":"1"})");
        FAIL();
    } catch (const MalformedLegacyEntry& e) {
        EXPECT_EQ(e.index(), 1u);
    }
    EXPECT_THROW(parse_legacy_params(R"({"param":"x","min":"0","max":"1"}&)"), MalformedLegacyEntry);
    EXPECT_THROW(parse_legacy_params(R"({"param":"x","max":"1"})"), MalformedLegacyEntry);
    EXPECT_THROW(parse_legacy_params(R"({"param":"x","min":"0","max":"1","step":"2"})"),
                 MalformedLegacyEntry);
    EXPECT_THROW(parse_legacy_params(R"({"param":"x","min":"0","max":"1","fixed":"3"})"),
                 MalformedLegacyEntry);
    EXPECT_THROW(parse_legacy_params(R"({"param":"x","min":"0x1","max":"1"})"), MalformedLegacyEntry);
    EXPECT_THROW(parse_legacy_params(R"(["x"])"), MalformedLegacyEntry);
    EXPECT_THROW(parse_legacy_params(""), MalformedLegacyEntry);
    EXPECT_THROW(parse_legacy_params(
                     R"({"param":"x","min":"0","max":"1"}&{"param":"x","min":"0","max":"2"})"),
                 DuplicateParam);
    // '&' inside a string does not split
    EXPECT_EQ(parse_legacy_params(R"({"param":"a&b","min":"0","max":"1"})").size(), 1u);
}

TEST(Native, Document) {
    const auto doc = parse_native_document(
        R"({"equation":"x + y","parameters":[{"param":"x","min":0,"max":1},{"param":"y","min":-1,"max":1,"fixed":0.25}]})");
    EXPECT_EQ(*doc.equation, "x + y");
    ASSERT_EQ(doc.parameters.size(), 2u);
    EXPECT_EQ(doc.parameters[1], (ParameterSpec{"y", -1, 1, 0.25}));
    const auto bare = parse_native_document(R"([{"param":"x","min":0,"max":1}])");
    EXPECT_FALSE(bare.equation);
    EXPECT_EQ(bare.parameters.size(), 1u);
}

TEST(Native, Errors) {
    EXPECT_THROW(parse_native_document("{"), InvalidArgument);
    EXPECT_THROW(parse_native_document(R"({"equation":"x"})"), InvalidArgument);
    EXPECT_THROW(parse_native_document(R"([{"param":"x","min":"0","max":1}])"), InvalidArgument);
    EXPECT_THROW(parse_native_document(R"([{"param":"x","min":1,"max":0}])"), InvalidArgument);
    EXPECT_THROW(parse_native_document(R"([{"param":"x","min":0,"max":1,"foo":1}])"),
                 InvalidArgument);
    EXPECT_THROW(parse_native_document(
                     R"([{"param":"x","min":0,"max":1},{"param":"x","min":0,"max":1}])"),
                 DuplicateParam);
}

TEST(Methods, Names) {
    for (auto m : {AnalysisMethod::variance, AnalysisMethod::sobol, AnalysisMethod::variance_mc,
                   AnalysisMethod::sobol_mc, AnalysisMethod::total_variance,
                   AnalysisMethod::pair_interactions}) {
        EXPECT_EQ(parse_analysis_method(analysis_method_name(m)), m);
    }
    EXPECT_FALSE(parse_analysis_method("anova"));
}

TEST(Validate, Coverage) {
    auto r = request("x + w", {{"x", 0, 1, {}}}, {AnalysisMethod::variance});
    try {
        validate_request(r);
        FAIL();
    } catch (const UncoveredVariable& e) {
        EXPECT_EQ(e.name(), "w");
    }
    r = request("x", {{"x", 0, 1, {}}, {"y", 0, 1, {}}}, {AnalysisMethod::variance});
    EXPECT_THROW(validate_request(r), InvalidArgument);
    r = request("x", {{"x", 0, 1, {}}}, {});
    EXPECT_THROW(validate_request(r), InvalidArgument);
    r = request("x +", {{"x", 0, 1, {}}}, {AnalysisMethod::variance});
    EXPECT_THROW(validate_request(r), SyntaxError);
}

TEST(Analyze, TotalVarianceOfX) {
    const json j = analyze(request("x", {{"x", 0, 1, {}}}, {AnalysisMethod::total_variance}));
    EXPECT_NEAR(j["results"]["total_variance"].get<double>(), 1.0 / 12, 1e-9);
    EXPECT_EQ(j["settings"]["methods"], json::array({"total-variance"}));
    EXPECT_FALSE(j["settings"].contains("seed"));
}

TEST(Analyze, IshigamiVarianceAndSobol) {
    auto r = request(kIshigamiJs, parse_legacy_params(kSobolBlock),
                     {AnalysisMethod::variance, AnalysisMethod::sobol});
    r.quadrature.delta_base_nd = 0.01;
    const json j = analyze(r);
    const json& v = j["results"]["variance"]["entries"];
    const json& s = j["results"]["sobol"]["entries"];
    EXPECT_NEAR(v[0]["percentage"].get<double>(), 44.58, 0.02);
    EXPECT_NEAR(v[1]["percentage"].get<double>(), 55.42, 0.02);
    EXPECT_NEAR(v[2]["percentage"].get<double>(), 0.0, 0.02);
    EXPECT_NEAR(s[0]["percentage"].get<double>(), 44.59, 0.02);
    EXPECT_NEAR(s[1]["percentage"].get<double>(), 55.41, 0.02);
    EXPECT_NEAR(s[2]["percentage"].get<double>(), 0.0, 0.02);
    EXPECT_EQ(j["results"]["variance"]["fixed_values"]["x"], 0.0);
    EXPECT_EQ(j["canonical_equation"],
              "((sin(x)+(7*pow(sin(y),2)))+((0.10000000000000001*pow(z,4))*sin(x)))");

    r.output = OutputFormat::table;
    std::string out, err;
    ASSERT_EQ(run_capture(r, out, err), 0) << err;
    EXPECT_NE(out.find("44.58"), std::string::npos);
    EXPECT_NE(out.find("55.42"), std::string::npos);
    EXPECT_NE(out.find("sobol"), std::string::npos);
}

TEST(Analyze, AbsoluteIndicesWhenTotalRequested) {
    const json j = analyze(request("x + y", {{"x", 0, 1, {}}, {"y", 0, 1, {}}},
                                   {AnalysisMethod::sobol, AnalysisMethod::total_variance,
                                    AnalysisMethod::pair_interactions}));
    const json& s = j["results"]["sobol"];
    EXPECT_NEAR(s["entries"][0]["absolute_index"].get<double>(), 0.5, 1e-3);
    EXPECT_EQ(s["total_variance"], j["results"]["total_variance"]);
    EXPECT_NEAR(j["results"]["pair-interactions"][0]["value"].get<double>(), 0.0, 1e-6);
    EXPECT_EQ(j["results"]["pair-interactions"][0]["params"], json::array({"x", "y"}));
    EXPECT_TRUE(j["results"]["pair-interactions"][0].contains("index"));
}

TEST(Analyze, MonteCarloSettingsEcho) {
    auto r = request("x + 2*y", {{"x", 0, 1, 0.5}, {"y", 0, 1, 0.5}},
                     {AnalysisMethod::variance_mc, AnalysisMethod::sobol_mc});
    r.sampling = SampleConfig{};
    r.sampling->seed = 9;
    r.sampling->samples_outer = 200;
    r.sampling->samples_inner = 20;
    const json j = analyze(r);
    EXPECT_EQ(j["settings"]["seed"], 9);
    EXPECT_EQ(j["settings"]["samples_outer"], 200);
    EXPECT_TRUE(j["results"]["variance-mc"]["entries"][0].contains("standard_error"));
    EXPECT_EQ(analyze(r).dump(), j.dump());
}

TEST(Analyze, LegacyAndNativeMatch) {
    const std::string native_text =
        R"({"parameters":[{"param":"x","min":-0.31415926535897932384626433,"max":0.31415926535897932384626433,"fixed":0.0},)"
        R"({"param":"y","min":-0.31415926535897932384626433,"max":0.31415926535897932384626433,"fixed":0.0},)"
        R"({"param":"z","min":-0.31415926535897932384626433,"max":0.31415926535897932384626433,"fixed":0.0}]})";
    const std::vector<AnalysisMethod> methods{AnalysisMethod::variance, AnalysisMethod::sobol,
                                              AnalysisMethod::total_variance};
    auto legacy = request(kIshigamiJs, parse_legacy_params(kVarianceBlock), methods);
    legacy.input_form = InputForm::legacy;
    auto native = request(kIshigamiJs, parse_native_document(native_text).parameters, methods);
    EXPECT_EQ(legacy.parameters, native.parameters);
    json a = analyze(legacy);
    json b = analyze(native);
    EXPECT_EQ(a["input_form"], "legacy");
    EXPECT_EQ(b["input_form"], "native");
    a.erase("input_form");
    b.erase("input_form");
    EXPECT_EQ(a.dump(2), b.dump(2));
}

TEST(Analyze, Idempotent) {
    const auto r = request("exp(x)*y", {{"x", 0, 1, {}}, {"y", 1, 2, {}}},
                           {AnalysisMethod::variance, AnalysisMethod::sobol,
                            AnalysisMethod::pair_interactions});
    std::string o1, o2, err;
    ASSERT_EQ(run_capture(r, o1, err), 0);
    ASSERT_EQ(run_capture(r, o2, err), 0);
    EXPECT_EQ(o1, o2);
    EXPECT_EQ(o1.find("wall_time"), std::string::npos);
}

TEST(Analyze, TimingOptIn) {
    auto r = request("x", {{"x", 0, 1, {}}}, {AnalysisMethod::variance});
    r.timing = true;
    const json j = analyze(r);
    EXPECT_TRUE(j["results"]["variance"]["diagnostics"].contains("wall_time_seconds"));
}

TEST(Run, ExitCodes) {
    std::string out, err;
    EXPECT_EQ(run_capture(request("x + w", {{"x", 0, 1, {}}}, {AnalysisMethod::variance}), out, err),
              2);
    EXPECT_NE(err.find("UncoveredVariable"), std::string::npos);
    EXPECT_NE(err.find("'w'"), std::string::npos);

    EXPECT_EQ(run_capture(request("x*y", {{"x", -1, 1, 0.0}, {"y", -1, 1, 0.0}},
                                  {AnalysisMethod::variance}),
                          out, err),
              3);
    EXPECT_NE(err.find("[variance]"), std::string::npos);
    EXPECT_NE(err.find("NoVariation"), std::string::npos);

    auto big = request("x+y+z", {{"x", 0, 1, {}}, {"y", 0, 1, {}}, {"z", 0, 1, {}}},
                       {AnalysisMethod::total_variance});
    big.quadrature.delta_base_nd = 1e-3;
    EXPECT_EQ(run_capture(big, out, err), 4);
    EXPECT_NE(err.find("[total-variance]"), std::string::npos);
    EXPECT_NE(err.find("BudgetExceeded"), std::string::npos);

    EXPECT_EQ(run_capture(request("1/(x-0.5)", {{"x", 0, 1, {}}}, {AnalysisMethod::variance}),
                          out, err),
              3);
    EXPECT_NE(err.find("NonFiniteIntegrand"), std::string::npos);
}
