#include "varsens/sensitivity.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>
#include <utility>

#include "varsens/detail/parallel.hpp"
#include "varsens/summation.hpp"

namespace varsens {

namespace {

std::vector<std::string> names_of(const std::vector<ParameterSpec>& params) {
    std::vector<std::string> names;
    names.reserve(params.size());
    for (const auto& p : params) names.push_back(p.param);
    return names;
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

ReportSettings settings_for(const Model& model, const QuadratureConfig& cfg, bool resolve_fixed) {
    ReportSettings s;
    s.delta_1d = cfg.delta_1d;
    s.delta_base = cfg.delta_base_nd;
    s.delta_outer = cfg.outer_resolution();
    s.parameters.assign(model.parameters().begin(), model.parameters().end());
    if (resolve_fixed) {
        for (auto& p : s.parameters) p.fixed = p.fixed_or_midpoint();
    }
    return s;
}

/// Moments over x_i of f along the slice through the fixed point.
Moments slice_moments(const Model& model, std::size_t i, double resolution) {
    std::vector<double> point = model.fixed_point();
    const auto& spec = model.parameters()[i];
    return moments(
        [&](double x) {
            point[i] = x;
            return model(point);
        },
        spec.interval(), resolution);
}

/// Conditional mean g = E[f | subset] on the midpoint grid over the subset
/// (outer resolution), each value averaged over the complement with the
/// tensor trapezoid at delta_base_nd. Nodes are in odometer order, last
/// subset axis fastest.
struct ConditionalGrid {
    std::vector<double> g;
    std::vector<double> weights;
    std::size_t per_axis = 0;
    double volume = 1.0;
};

ConditionalGrid conditional_grid(const Model& model, std::span<const std::size_t> subset,
                                 const QuadratureConfig& cfg, Diagnostics& diag) {
    const auto params = model.parameters();
    std::vector<Axis> outer_axes;
    for (std::size_t i : subset) outer_axes.push_back({params[i].param, params[i].interval()});
    std::vector<std::size_t> complement;
    std::vector<Axis> inner_axes;
    for (std::size_t k = 0; k < params.size(); ++k) {
        if (std::find(subset.begin(), subset.end(), k) == subset.end()) {
            complement.push_back(k);
            inner_axes.push_back({params[k].param, params[k].interval()});
        }
    }

    const Box outer_box(std::move(outer_axes));
    const std::size_t outer_panels = panel_count(cfg.outer_resolution());
    check_budget(outer_panels, outer_box.dimension(), cfg.max_evaluations);

    std::optional<Box> inner_box;
    std::size_t inner_panels = 0;
    std::uint64_t inner_nodes = 1;
    if (!complement.empty()) {
        inner_box.emplace(std::move(inner_axes));
        inner_panels = panel_count(cfg.delta_base_nd);
        check_budget(inner_panels, inner_box->dimension(), cfg.max_evaluations);
        inner_nodes = static_cast<std::uint64_t>(std::pow(
            static_cast<double>(node_count(inner_panels, Rule::trapezoid)),
            static_cast<double>(complement.size())));
    }

    ConditionalGrid out;
    out.per_axis = node_count(outer_panels, Rule::midpoint);
    out.volume = outer_box.volume();
    std::vector<double> nodes;  // flattened outer points
    for_each_node(outer_box, outer_panels, Rule::midpoint,
                  [&](std::span<const double> p, double w) {
                      nodes.insert(nodes.end(), p.begin(), p.end());
                      out.weights.push_back(w);
                  });
    const std::size_t dim = subset.size();
    out.g.resize(out.weights.size());

    detail::parallel_for(out.g.size(), cfg.threads, [&](std::size_t j) {
        std::vector<double> point(params.size());
        for (std::size_t a = 0; a < dim; ++a) point[subset[a]] = nodes[j * dim + a];
        if (!inner_box) {
            const double v = model(point);
            if (!std::isfinite(v)) detail::throw_non_finite(std::span(point), outer_box);
            out.g[j] = v;
            return;
        }
        CompensatedSum acc;
        for_each_node(*inner_box, inner_panels, Rule::trapezoid,
                      [&](std::span<const double> q, double w) {
                          for (std::size_t c = 0; c < complement.size(); ++c) {
                              point[complement[c]] = q[c];
                          }
                          const double v = model(point);
                          if (!std::isfinite(v)) {
                              std::vector<Axis> all;
                              for (const auto& p : params) all.push_back({p.param, p.interval()});
                              detail::throw_non_finite(std::span(point), Box(std::move(all)));
                          }
                          acc.add(w * v);
                      });
        out.g[j] = acc.value() / inner_box->volume();
    });
    diag.evaluations += static_cast<std::uint64_t>(out.g.size()) * inner_nodes;
    return out;
}

Moments weighted_moments(std::span<const double> g, std::span<const double> w, double volume) {
    CompensatedSum s1;
    CompensatedSum s2;
    for (std::size_t j = 0; j < g.size(); ++j) {
        s1.add(w[j] * g[j]);
        s2.add(w[j] * g[j] * g[j]);
    }
    Moments m;
    m.mean = s1.value() / volume;
    m.mean_square = s2.value() / volume;
    m.evaluations = g.size();
    return m;
}

Moments conditional_moments(const Model& model, std::span<const std::size_t> subset,
                            const QuadratureConfig& cfg, Diagnostics& diag) {
    const ConditionalGrid grid = conditional_grid(model, subset, cfg, diag);
    return weighted_moments(grid.g, grid.weights, grid.volume);
}

std::vector<std::size_t> subset_indices(const Model& model, std::span<const std::string> subset) {
    if (subset.empty()) throw InvalidArgument("parameter subset must not be empty");
    std::vector<std::size_t> idx;
    for (const auto& name : subset) {
        const std::size_t i = model.index_of(name);
        if (std::find(idx.begin(), idx.end(), i) != idx.end()) throw DuplicateParam(name);
        idx.push_back(i);
    }
    return idx;
}

}  // namespace

// ---- ParameterSpec / Model ----------------------------------------------------

double ParameterSpec::fixed_or_midpoint() const noexcept {
    return fixed.value_or(0.5 * (min + max));
}

void ParameterSpec::validate() const {
    if (param.empty()) throw InvalidArgument("parameter name must not be empty");
    try {
        (void)interval();
    } catch (const InvalidArgument& e) {
        throw InvalidArgument("parameter '" + param + "': " + e.what());
    }
    if (fixed && !(*fixed >= min && *fixed <= max)) {
        std::ostringstream os;
        os.precision(17);
        os << "parameter '" << param << "': fixed value " << *fixed << " lies outside [" << min
           << ", " << max << "]";
        throw InvalidArgument(os.str());
    }
}

Model::Model(const Expression& expr, std::vector<ParameterSpec> params)
    : expr_(expr),
      params_([&] {
          std::set<std::string, std::less<>> seen;
          for (const auto& p : params) {
              p.validate();
              if (!seen.insert(p.param).second) throw DuplicateParam(p.param);
          }
          for (const auto& v : free_variables(expr)) {
              if (!seen.contains(v)) throw UncoveredVariable(v);
          }
          return std::move(params);
      }()),
      program_(expr_, names_of(params_)) {}

std::size_t Model::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < params_.size(); ++i) {
        if (params_[i].param == name) return i;
    }
    throw InvalidArgument("unknown parameter '" + std::string(name) + "'");
}

std::vector<double> Model::fixed_point() const {
    std::vector<double> v;
    v.reserve(params_.size());
    for (const auto& p : params_) v.push_back(p.fixed_or_midpoint());
    return v;
}

// ---- reports ------------------------------------------------------------------

std::string_view method_name(Method m) noexcept {
    switch (m) {
        case Method::variance: return "variance";
        case Method::sobol: return "sobol";
        case Method::variance_mc: return "variance-mc";
        case Method::sobol_mc: return "sobol-mc";
    }
    return "unknown";
}

const ParameterResult& SensitivityReport::entry(std::string_view param) const {
    for (const auto& e : entries) {
        if (e.param == param) return e;
    }
    throw InvalidArgument("parameter '" + std::string(param) + "' is not in the report");
}

PercentagesUndefined::PercentagesUndefined(SensitivityReport report)
    : NoVariation("raw variances sum to zero; percentage contributions are undefined for " +
                  std::string(method_name(report.method))),
      report_(std::move(report)) {}

double clamp_variance(double value, double tolerance, Diagnostics* diagnostics) {
    if (!std::isfinite(value)) throw NonFiniteResult("variance is not finite");
    if (value >= 0.0) return value;
    if (value >= -tolerance) {
        if (diagnostics) ++diagnostics->clamped_negative;
        return 0.0;
    }
    throw NegativeVariance(value);
}

void assign_percentages(SensitivityReport& report) {
    CompensatedSum total;
    for (const auto& e : report.entries) total.add(e.raw_variance);
    const double sum = total.value();
    if (!(sum > kNoVariationThreshold)) {
        for (auto& e : report.entries) e.percentage.reset();
        throw PercentagesUndefined(report);
    }
    for (auto& e : report.entries) e.percentage = 100.0 * e.raw_variance / sum;
}

// ---- operations ---------------------------------------------------------------

double variance_of(const std::function<double(double)>& f, const Interval& iv,
                   double resolution) {
    return clamp_variance(moments(f, iv, resolution).variance(), kVarianceClampTolerance);
}

SensitivityReport first_order_variance_contributions(const Expression& expr,
                                                     std::span<const ParameterSpec> params,
                                                     const QuadratureConfig& cfg) {
    cfg.validate();
    const Stopwatch clock;
    const Model model(expr, {params.begin(), params.end()});

    SensitivityReport report;
    report.method = Method::variance;
    report.settings = settings_for(model, cfg, true);
    std::vector<Moments> m(model.size());
    detail::parallel_for(model.size(), cfg.threads,
                         [&](std::size_t i) { m[i] = slice_moments(model, i, cfg.delta_1d); });
    for (std::size_t i = 0; i < model.size(); ++i) {
        ParameterResult r;
        r.param = model.parameters()[i].param;
        r.mean = m[i].mean;
        r.mean_square = m[i].mean_square;
        r.raw_variance =
            clamp_variance(m[i].variance(), kVarianceClampTolerance, &report.diagnostics);
        report.diagnostics.evaluations += m[i].evaluations;
        report.entries.push_back(std::move(r));
    }
    report.diagnostics.wall_time_seconds = clock.seconds();
    assign_percentages(report);
    return report;
}

SensitivityReport sobol_first_order(const Expression& expr, std::span<const ParameterSpec> params,
                                    const QuadratureConfig& cfg) {
    cfg.validate();
    const Stopwatch clock;
    const Model model(expr, {params.begin(), params.end()});

    SensitivityReport report;
    report.method = Method::sobol;
    report.settings = settings_for(model, cfg, false);
    for (std::size_t i = 0; i < model.size(); ++i) {
        const std::size_t subset[] = {i};
        const Moments m = conditional_moments(model, subset, cfg, report.diagnostics);
        ParameterResult r;
        r.param = model.parameters()[i].param;
        r.mean = m.mean;
        r.mean_square = m.mean_square;
        r.raw_variance = clamp_variance(m.variance(), kVarianceClampTolerance, &report.diagnostics);
        report.entries.push_back(std::move(r));
    }
    report.diagnostics.wall_time_seconds = clock.seconds();
    assign_percentages(report);
    return report;
}

double total_variance(const Expression& expr, std::span<const ParameterSpec> params,
                      const QuadratureConfig& cfg) {
    cfg.validate();
    const Model model(expr, {params.begin(), params.end()});
    if (model.size() == 1) {
        return clamp_variance(slice_moments(model, 0, cfg.delta_1d).variance(),
                              kVarianceClampTolerance);
    }
    std::vector<Axis> axes;
    for (const auto& p : model.parameters()) axes.push_back({p.param, p.interval()});
    const Moments m = moments([&](std::span<const double> x) { return model(x); },
                              Box(std::move(axes)), cfg.delta_base_nd, cfg.max_evaluations);
    return clamp_variance(m.variance(), kVarianceClampTolerance);
}

SensitivityReport absolute_indices(SensitivityReport report, double total) {
    if (!(total > kNoVariationThreshold)) {
        throw NoVariation("total variance is zero; absolute indices are undefined");
    }
    report.total_variance = total;
    for (auto& e : report.entries) e.absolute_index = e.raw_variance / total;
    return report;
}

double grouped_variance_contribution(const Expression& expr, std::span<const ParameterSpec> params,
                                     std::span<const std::string> subset,
                                     const QuadratureConfig& cfg) {
    cfg.validate();
    const Model model(expr, {params.begin(), params.end()});
    const std::vector<std::size_t> idx = subset_indices(model, subset);
    if (idx.size() == 1) {
        return clamp_variance(slice_moments(model, idx[0], cfg.delta_1d).variance(),
                              kVarianceClampTolerance);
    }
    std::vector<Axis> axes;
    for (std::size_t i : idx) axes.push_back({model.parameters()[i].param,
                                              model.parameters()[i].interval()});
    std::vector<double> point = model.fixed_point();
    const Moments m = moments(
        [&](std::span<const double> x) {
            for (std::size_t a = 0; a < idx.size(); ++a) point[idx[a]] = x[a];
            return model(point);
        },
        Box(std::move(axes)), cfg.delta_base_nd, cfg.max_evaluations);
    return clamp_variance(m.variance(), kVarianceClampTolerance);
}

PairInteraction sobol_pair_interaction(const Expression& expr,
                                       std::span<const ParameterSpec> params,
                                       std::string_view first, std::string_view second,
                                       const QuadratureConfig& cfg) {
    cfg.validate();
    const Model model(expr, {params.begin(), params.end()});
    const std::size_t i = model.index_of(first);
    const std::size_t j = model.index_of(second);
    if (i == j) throw InvalidArgument("pair interaction needs two distinct parameters");

    // Both main effects come from marginal means of the joint grid, so the
    // three variances share one quadrature rule and the interaction is the
    // grid's ANOVA residual.
    Diagnostics diag;
    const std::size_t pair[] = {i, j};
    const ConditionalGrid grid = conditional_grid(model, pair, cfg, diag);
    const std::size_t m = grid.per_axis;
    std::vector<double> row(m);
    std::vector<double> col(m);
    std::vector<double> row_w(m);
    std::vector<double> col_w(m);
    for (std::size_t a = 0; a < m; ++a) {
        CompensatedSum rs;
        CompensatedSum rw;
        CompensatedSum cs;
        CompensatedSum cw;
        for (std::size_t b = 0; b < m; ++b) {
            rs.add(grid.weights[a * m + b] * grid.g[a * m + b]);
            rw.add(grid.weights[a * m + b]);
            cs.add(grid.weights[b * m + a] * grid.g[b * m + a]);
            cw.add(grid.weights[b * m + a]);
        }
        row[a] = rs.value() / rw.value();
        col[a] = cs.value() / cw.value();
        row_w[a] = rw.value();
        col_w[a] = cw.value();
    }

    PairInteraction out;
    out.first = std::string(first);
    out.second = std::string(second);
    out.joint_variance = clamp_variance(weighted_moments(grid.g, grid.weights, grid.volume).variance(),
                                        kVarianceClampTolerance);
    out.first_variance = clamp_variance(weighted_moments(row, row_w, grid.volume).variance(),
                                        kVarianceClampTolerance);
    out.second_variance = clamp_variance(weighted_moments(col, col_w, grid.volume).variance(),
                                         kVarianceClampTolerance);
    out.value = clamp_variance(out.joint_variance - out.first_variance - out.second_variance,
                               kInteractionClampTolerance);
    return out;
}

}  // namespace varsens
