#pragma once

// Variance-based sensitivity indices computed by deterministic quadrature.
//
// Two first-order measures are provided:
//
//  * variance contribution: Var(f) along a 1-D slice through x_i with every
//    other parameter held at its fixed value;
//  * Sobol main effect: Var_{x_i}(E_{-x_i}[f | x_i]), the variance over x_i of
//    the mean of f over all the other parameters.
//
// Inputs are independent and uniform on their ranges. Percentages normalize
// each raw variance by the sum over parameters, which avoids the full
// n-dimensional total variance.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "varsens/errors.hpp"
#include "varsens/expression.hpp"
#include "varsens/quadrature.hpp"

namespace varsens {

struct ParameterSpec {
    std::string param;
    double min = 0.0;
    double max = 0.0;
    std::optional<double> fixed;

    Interval interval() const { return Interval(min, max); }
    /// The fixed value, or the range midpoint when none was given.
    double fixed_or_midpoint() const noexcept;
    /// Throws InvalidArgument on an empty/inverted range or out-of-range fixed value.
    void validate() const;

    friend bool operator==(const ParameterSpec&, const ParameterSpec&) = default;
};

/// An expression bound to an ordered parameter list.
///
/// Every free variable must be covered by exactly one spec. Specs naming
/// variables the expression does not use are allowed; such parameters have
/// zero variance.
class Model {
public:
    Model(const Expression& expr, std::vector<ParameterSpec> params);

    const Expression& expression() const noexcept { return expr_; }
    std::span<const ParameterSpec> parameters() const noexcept { return params_; }
    std::size_t size() const noexcept { return params_.size(); }
    /// Position of a parameter; throws InvalidArgument when unknown.
    std::size_t index_of(std::string_view name) const;

    /// Values are given in parameter order.
    double operator()(std::span<const double> values) const noexcept { return program_(values); }

    /// Fixed values (midpoint defaults applied) in parameter order.
    std::vector<double> fixed_point() const;

private:
    Expression expr_;
    std::vector<ParameterSpec> params_;
    CompiledExpression program_;
};

enum class Method { variance, sobol, variance_mc, sobol_mc };

std::string_view method_name(Method m) noexcept;

struct ParameterResult {
    std::string param;
    double raw_variance = 0.0;
    std::optional<double> percentage;
    std::optional<double> absolute_index;
    /// Sampling methods only.
    std::optional<double> standard_error;
    /// E[f] and E[f^2] of the slice (variance method) or E[g] and E[g^2] of
    /// the conditional mean g(x_i) (Sobol method).
    double mean = 0.0;
    double mean_square = 0.0;
};

struct ReportSettings {
    double delta_1d = 0.0;
    double delta_base = 0.0;
    double delta_outer = 0.0;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> samples_outer;
    std::optional<std::size_t> samples_inner;
    /// Parameters as analyzed; fixed values are resolved for slice methods.
    std::vector<ParameterSpec> parameters;
};

struct Diagnostics {
    std::size_t clamped_negative = 0;
    std::uint64_t evaluations = 0;
    double wall_time_seconds = 0.0;
};

struct SensitivityReport {
    Method method = Method::variance;
    std::vector<ParameterResult> entries;
    std::optional<double> total_variance;
    ReportSettings settings;
    Diagnostics diagnostics;

    /// Throws InvalidArgument when the parameter is not in the report.
    const ParameterResult& entry(std::string_view param) const;
};

/// Raised when the raw variances sum to (numerically) zero so percentages are
/// undefined. The raw part of the report is still available.
class PercentagesUndefined : public NoVariation {
public:
    explicit PercentagesUndefined(SensitivityReport report);
    const SensitivityReport& report() const noexcept { return report_; }

private:
    SensitivityReport report_;
};

/// Variance sums at or below this are treated as no variation at all.
inline constexpr double kNoVariationThreshold = 1e-14;
/// Moment-formula variances in [-kVarianceClampTolerance, 0) are rounding
/// noise and clamp to 0; anything lower is an error.
inline constexpr double kVarianceClampTolerance = 1e-10;
/// Same for pair interactions, which subtract three variances.
inline constexpr double kInteractionClampTolerance = 1e-8;

/// Clamps small negatives to zero (counting them) and throws
/// NegativeVariance below -tolerance.
double clamp_variance(double value, double tolerance, Diagnostics* diagnostics = nullptr);

/// Fills percentage_i = 100 * raw_i / sum_k raw_k. Throws PercentagesUndefined
/// when the sum is at most kNoVariationThreshold.
void assign_percentages(SensitivityReport& report);

/// E[f^2] - E[f]^2 under the uniform density on `iv`, trapezoid rule.
double variance_of(const std::function<double(double)>& f, const Interval& iv,
                   double resolution);

SensitivityReport first_order_variance_contributions(const Expression& expr,
                                                     std::span<const ParameterSpec> params,
                                                     const QuadratureConfig& cfg = {});

/// Outer midpoint rule over x_i at the outer resolution, inner tensor
/// trapezoid over the remaining parameters at delta_base_nd.
SensitivityReport sobol_first_order(const Expression& expr, std::span<const ParameterSpec> params,
                                    const QuadratureConfig& cfg = {});

/// Variance over the full box. A single parameter is integrated at delta_1d,
/// several at delta_base_nd.
double total_variance(const Expression& expr, std::span<const ParameterSpec> params,
                      const QuadratureConfig& cfg = {});

/// Adds S_i = raw_i / total to every entry; throws NoVariation when
/// total <= kNoVariationThreshold.
SensitivityReport absolute_indices(SensitivityReport report, double total);

/// Variance when the parameters in `subset` vary jointly and the rest stay
/// at their fixed values.
double grouped_variance_contribution(const Expression& expr, std::span<const ParameterSpec> params,
                                     std::span<const std::string> subset,
                                     const QuadratureConfig& cfg = {});

struct PairInteraction {
    std::string first;
    std::string second;
    /// Var_{x_i,x_j}(E[f | x_i, x_j])
    double joint_variance = 0.0;
    double first_variance = 0.0;
    double second_variance = 0.0;
    /// joint minus both main effects, clamped at zero within tolerance
    double value = 0.0;
};

/// Second-order Sobol numerator for the pair (i, j).
PairInteraction sobol_pair_interaction(const Expression& expr,
                                       std::span<const ParameterSpec> params,
                                       std::string_view first, std::string_view second,
                                       const QuadratureConfig& cfg = {});

}  // namespace varsens
