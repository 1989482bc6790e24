#pragma once

// Monte Carlo estimators of the first-order indices, kept as an independent
// cross-check of the quadrature engine.
//
// Random streams: a SplitMix64 mix of (seed, parameter index) seeds one
// std::mt19937_64 per parameter, and uniforms are (u >> 11) * 2^-53 mapped
// onto the range. A seed therefore fixes every report bit for bit regardless
// of thread count.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

#include "varsens/expression.hpp"
#include "varsens/sensitivity.hpp"

namespace varsens {

struct SampleConfig {
    std::uint64_t seed = 42;
    std::size_t samples_outer = 10'000;
    std::size_t samples_inner = 1'000;
    unsigned threads = 0;

    /// Both sample counts must be at least 2.
    void validate() const;
};

/// SplitMix64 finalizer, used to derive independent substream seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Generator for parameter `index` under `seed`.
std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index);

/// Uniform double in [0, 1) with 53 random bits.
inline double unit_uniform(std::mt19937_64& rng) noexcept {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Mean, unbiased variance and the standard error of that variance, the
/// latter from the fourth central moment.
struct SampleVariance {
    double mean = 0.0;
    double variance = 0.0;
    double standard_error = 0.0;
};

SampleVariance sample_variance(std::span<const double> values);

/// Per parameter: samples_outer draws of x_i with the others fixed; the raw
/// variance is the unbiased sample variance of f.
SensitivityReport mc_variance_contribution(const Expression& expr,
                                           std::span<const ParameterSpec> params,
                                           const SampleConfig& cfg = {});

/// Double-loop estimator: samples_outer draws of x_i, each averaged over
/// samples_inner draws of the complement. The sample variance of those means
/// is corrected by mean_j(s_j^2) / samples_inner, the inner-noise bias.
SensitivityReport mc_sobol_first_order(const Expression& expr,
                                       std::span<const ParameterSpec> params,
                                       const SampleConfig& cfg = {});

}  // namespace varsens
