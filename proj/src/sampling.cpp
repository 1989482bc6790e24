#include "varsens/sampling.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <vector>

#include "varsens/detail/parallel.hpp"
#include "varsens/summation.hpp"

namespace varsens {

namespace {

double draw(std::mt19937_64& rng, const ParameterSpec& p) {
    return p.min + (p.max - p.min) * unit_uniform(rng);
}

double checked(const Model& model, std::span<const double> point) {
    const double v = model(point);
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os.precision(17);
        os << "sample at (";
        for (std::size_t k = 0; k < point.size(); ++k) {
            if (k) os << ", ";
            os << model.parameters()[k].param << " = " << point[k];
        }
        os << ") is not finite";
        throw NonFiniteResult(os.str());
    }
    return v;
}

ReportSettings settings_for(const Model& model, const SampleConfig& cfg, bool resolve_fixed,
                            bool inner) {
    ReportSettings s;
    s.seed = cfg.seed;
    s.samples_outer = cfg.samples_outer;
    if (inner) s.samples_inner = cfg.samples_inner;
    s.parameters.assign(model.parameters().begin(), model.parameters().end());
    if (resolve_fixed) {
        for (auto& p : s.parameters) p.fixed = p.fixed_or_midpoint();
    }
    return s;
}

/// MC estimates are noisy around zero; negatives clamp regardless of size.
double clamp_estimate(double v, Diagnostics& diag) {
    if (v < 0.0) {
        ++diag.clamped_negative;
        return 0.0;
    }
    return v;
}

double biased_second_moment(const SampleVariance& s, std::size_t n) {
    const double nn = static_cast<double>(n);
    return s.variance * (nn - 1.0) / nn + s.mean * s.mean;
}

}  // namespace

void SampleConfig::validate() const {
    if (samples_outer < 2) throw InvalidArgument("samples_outer must be at least 2");
    if (samples_inner < 2) throw InvalidArgument("samples_inner must be at least 2");
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(index + 1)));
}

SampleVariance sample_variance(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 2) throw InvalidArgument("sample variance needs at least two values");
    CompensatedSum s;
    for (double v : values) s.add(v);
    SampleVariance out;
    out.mean = s.value() / static_cast<double>(n);
    CompensatedSum c2;
    CompensatedSum c4;
    for (double v : values) {
        const double d = v - out.mean;
        const double d2 = d * d;
        c2.add(d2);
        c4.add(d2 * d2);
    }
    const double nn = static_cast<double>(n);
    out.variance = c2.value() / (nn - 1.0);
    const double m4 = c4.value() / nn;
    // Var(s^2) ~ (mu4 - sigma^4 (n-3)/(n-1)) / n
    const double var_of_var = (m4 - out.variance * out.variance * (nn - 3.0) / (nn - 1.0)) / nn;
    out.standard_error = std::sqrt(std::max(var_of_var, 0.0));
    return out;
}

SensitivityReport mc_variance_contribution(const Expression& expr,
                                           std::span<const ParameterSpec> params,
                                           const SampleConfig& cfg) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    const Model model(expr, {params.begin(), params.end()});

    SensitivityReport report;
    report.method = Method::variance_mc;
    report.settings = settings_for(model, cfg, true, false);
    std::vector<SampleVariance> stats(model.size());
    detail::parallel_for(model.size(), cfg.threads, [&](std::size_t i) {
        auto rng = substream(cfg.seed, i);
        std::vector<double> point = model.fixed_point();
        std::vector<double> values(cfg.samples_outer);
        for (auto& v : values) {
            point[i] = draw(rng, model.parameters()[i]);
            v = checked(model, point);
        }
        stats[i] = sample_variance(values);
    });
    for (std::size_t i = 0; i < model.size(); ++i) {
        ParameterResult r;
        r.param = model.parameters()[i].param;
        r.mean = stats[i].mean;
        r.mean_square = biased_second_moment(stats[i], cfg.samples_outer);
        r.raw_variance = clamp_estimate(stats[i].variance, report.diagnostics);
        r.standard_error = stats[i].standard_error;
        report.entries.push_back(std::move(r));
    }
    report.diagnostics.evaluations =
        static_cast<std::uint64_t>(model.size()) * cfg.samples_outer;
    report.diagnostics.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    assign_percentages(report);
    return report;
}

SensitivityReport mc_sobol_first_order(const Expression& expr,
                                       std::span<const ParameterSpec> params,
                                       const SampleConfig& cfg) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    const Model model(expr, {params.begin(), params.end()});
    const std::size_t n = model.size();
    const double m = static_cast<double>(cfg.samples_inner);

    struct Estimate {
        SampleVariance outer;
        double correction = 0.0;
        double correction_se = 0.0;
    };
    std::vector<Estimate> est(n);
    detail::parallel_for(n, cfg.threads, [&](std::size_t i) {
        auto rng = substream(cfg.seed, i);
        std::vector<double> point(n);
        std::vector<double> means(cfg.samples_outer);
        std::vector<double> noise(cfg.samples_outer);  // s_j^2 / m
        for (std::size_t j = 0; j < cfg.samples_outer; ++j) {
            point[i] = draw(rng, model.parameters()[i]);
            CompensatedSum s1;
            CompensatedSum s2;
            for (std::size_t k = 0; k < cfg.samples_inner; ++k) {
                for (std::size_t c = 0; c < n; ++c) {
                    if (c != i) point[c] = draw(rng, model.parameters()[c]);
                }
                const double v = checked(model, point);
                s1.add(v);
                s2.add(v * v);
            }
            const double mean = s1.value() / m;
            means[j] = mean;
            noise[j] = std::max(s2.value() - m * mean * mean, 0.0) / (m - 1.0) / m;
        }
        est[i].outer = sample_variance(means);
        const SampleVariance nz = sample_variance(noise);
        est[i].correction = nz.mean;
        est[i].correction_se = std::sqrt(nz.variance / static_cast<double>(cfg.samples_outer));
    });

    SensitivityReport report;
    report.method = Method::sobol_mc;
    report.settings = settings_for(model, cfg, false, true);
    for (std::size_t i = 0; i < n; ++i) {
        ParameterResult r;
        r.param = model.parameters()[i].param;
        r.mean = est[i].outer.mean;
        r.mean_square = biased_second_moment(est[i].outer, cfg.samples_outer);
        r.raw_variance =
            clamp_estimate(est[i].outer.variance - est[i].correction, report.diagnostics);
        r.standard_error = std::hypot(est[i].outer.standard_error, est[i].correction_se);
        report.entries.push_back(std::move(r));
    }
    report.diagnostics.evaluations = static_cast<std::uint64_t>(n) * cfg.samples_outer *
                                     cfg.samples_inner;
    report.diagnostics.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    assign_percentages(report);
    return report;
}

}  // namespace varsens
