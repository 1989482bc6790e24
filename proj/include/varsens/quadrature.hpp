#pragma once

// Composite trapezoid and midpoint quadrature on uniform grids.
//
// A resolution r means N = round(1/r) equal panels per axis. Trapezoid nodes
// are a + k*h for k = 0..N with the last node pinned to b; midpoint nodes are
// a + (k + 1/2)*h for k = 0..N-1. The n-dimensional rules are tensor products
// of the 1-D ones, which for the trapezoid is the same as averaging the 2^n
// corners of every cell and weighting by cell volume.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "varsens/errors.hpp"
#include "varsens/summation.hpp"

namespace varsens {

class Interval {
public:
    /// Requires finite bounds with max > min.
    Interval(double min, double max);

    double min() const noexcept { return min_; }
    double max() const noexcept { return max_; }
    double length() const noexcept { return max_ - min_; }

    friend bool operator==(const Interval&, const Interval&) = default;

private:
    double min_;
    double max_;
};

struct Axis {
    std::string name;
    Interval interval;
};

/// Axis-aligned integration domain; axes keep their given order.
class Box {
public:
    /// Requires at least one axis and unique names.
    explicit Box(std::vector<Axis> axes);

    std::span<const Axis> axes() const noexcept { return axes_; }
    std::size_t dimension() const noexcept { return axes_.size(); }
    double volume() const noexcept;

private:
    std::vector<Axis> axes_;
};

struct QuadratureConfig {
    double delta_1d = 1e-5;
    double delta_base_nd = 1e-3;
    /// Resolution of the conditioning (outer) grid of the Sobol routes;
    /// defaults to delta_base_nd.
    std::optional<double> delta_outer;
    std::uint64_t max_evaluations = 100'000'000;
    /// Worker threads for independent grid nodes; 0 picks the hardware count.
    unsigned threads = 0;

    /// Throws InvalidArgument when a resolution is outside (0, 0.5] or the
    /// budget is zero.
    void validate() const;

    double outer_resolution() const noexcept { return delta_outer.value_or(delta_base_nd); }
};

enum class Rule { trapezoid, midpoint };

/// round(1/resolution); throws InvalidArgument unless 0 < resolution <= 0.5.
std::size_t panel_count(double resolution);

std::size_t node_count(std::size_t panels, Rule rule) noexcept;

/// Throws BudgetExceeded when panels^dimension exceeds the budget.
void check_budget(std::size_t panels, std::size_t dimension, std::uint64_t max_evaluations);

/// Accumulated E[f] and E[f^2] from one grid pass.
struct Moments {
    double mean = 0.0;
    double mean_square = 0.0;
    std::uint64_t evaluations = 0;

    double variance() const noexcept { return mean_square - mean * mean; }
};

namespace detail {

[[noreturn]] void throw_non_finite(double x);
[[noreturn]] void throw_non_finite(std::span<const double> point, const Box& box);

struct AxisGrid {
    std::vector<double> nodes;
    std::vector<double> weights;
};

AxisGrid axis_grid(const Interval& iv, std::size_t panels, Rule rule);

}  // namespace detail

/// Calls visit(x, weight) for every node of the 1-D rule. Weights sum to the
/// interval length.
template <class Visit>
void for_each_node(const Interval& iv, std::size_t panels, Rule rule, Visit&& visit) {
    const double h = iv.length() / static_cast<double>(panels);
    if (rule == Rule::midpoint) {
        for (std::size_t k = 0; k < panels; ++k) {
            visit(iv.min() + (static_cast<double>(k) + 0.5) * h, h);
        }
        return;
    }
    visit(iv.min(), 0.5 * h);
    for (std::size_t k = 1; k < panels; ++k) visit(iv.min() + static_cast<double>(k) * h, h);
    visit(iv.max(), 0.5 * h);
}

/// Calls visit(point, weight) for every node of the tensor rule, walking the
/// grid like an odometer with the last axis fastest. Weights sum to the box
/// volume.
template <class Visit>
void for_each_node(const Box& box, std::size_t panels, Rule rule, Visit&& visit) {
    const std::size_t dim = box.dimension();
    std::vector<detail::AxisGrid> grids;
    grids.reserve(dim);
    for (const Axis& a : box.axes()) grids.push_back(detail::axis_grid(a.interval, panels, rule));

    const std::size_t inner = dim - 1;
    const std::size_t count = grids.front().nodes.size();
    std::vector<std::size_t> digit(dim, 0);
    std::vector<double> point(dim);
    // prefix[k] = product of the weights of axes 0..k-1 at the current digits
    std::vector<double> prefix(dim, 1.0);
    for (std::size_t k = 0; k < inner; ++k) {
        point[k] = grids[k].nodes[0];
        prefix[k + 1] = prefix[k] * grids[k].weights[0];
    }
    const detail::AxisGrid& last = grids[inner];
    for (;;) {
        const double outer_weight = prefix[inner];
        for (std::size_t j = 0; j < count; ++j) {
            point[inner] = last.nodes[j];
            visit(std::span<const double>(point), outer_weight * last.weights[j]);
        }
        // advance the outer digits
        std::size_t k = inner;
        while (k > 0) {
            --k;
            if (++digit[k] < count) break;
            digit[k] = 0;
            if (k == 0) return;
        }
        if (inner == 0) return;
        for (std::size_t m = k; m < inner; ++m) {
            point[m] = grids[m].nodes[digit[m]];
            prefix[m + 1] = prefix[m] * grids[m].weights[digit[m]];
        }
    }
}

template <class F>
double integrate_1d(F&& f, const Interval& iv, double resolution, Rule rule = Rule::trapezoid) {
    CompensatedSum area;
    for_each_node(iv, panel_count(resolution), rule, [&](double x, double w) {
        const double v = f(x);
        if (!std::isfinite(v)) detail::throw_non_finite(x);
        area.add(w * v);
    });
    return area.value();
}

template <class F>
double integrate_nd(F&& f, const Box& box, double resolution, std::uint64_t max_evaluations,
                    Rule rule = Rule::trapezoid) {
    const std::size_t panels = panel_count(resolution);
    check_budget(panels, box.dimension(), max_evaluations);
    CompensatedSum volume;
    for_each_node(box, panels, rule, [&](std::span<const double> p, double w) {
        const double v = f(p);
        if (!std::isfinite(v)) detail::throw_non_finite(p, box);
        volume.add(w * v);
    });
    return volume.value();
}

template <class F>
double mean_value(F&& f, const Interval& iv, double resolution, Rule rule = Rule::trapezoid) {
    return integrate_1d(std::forward<F>(f), iv, resolution, rule) / iv.length();
}

template <class F>
double mean_value(F&& f, const Box& box, double resolution, std::uint64_t max_evaluations,
                  Rule rule = Rule::trapezoid) {
    return integrate_nd(std::forward<F>(f), box, resolution, max_evaluations, rule) /
           box.volume();
}

/// E[f] and E[f^2] over an interval in one pass.
template <class F>
Moments moments(F&& f, const Interval& iv, double resolution, Rule rule = Rule::trapezoid) {
    CompensatedSum s1;
    CompensatedSum s2;
    Moments m;
    for_each_node(iv, panel_count(resolution), rule, [&](double x, double w) {
        const double v = f(x);
        if (!std::isfinite(v)) detail::throw_non_finite(x);
        s1.add(w * v);
        s2.add(w * v * v);
        ++m.evaluations;
    });
    m.mean = s1.value() / iv.length();
    m.mean_square = s2.value() / iv.length();
    return m;
}

/// E[f] and E[f^2] over a box in one pass.
template <class F>
Moments moments(F&& f, const Box& box, double resolution, std::uint64_t max_evaluations,
                Rule rule = Rule::trapezoid) {
    const std::size_t panels = panel_count(resolution);
    check_budget(panels, box.dimension(), max_evaluations);
    CompensatedSum s1;
    CompensatedSum s2;
    Moments m;
    for_each_node(box, panels, rule, [&](std::span<const double> p, double w) {
        const double v = f(p);
        if (!std::isfinite(v)) detail::throw_non_finite(p, box);
        s1.add(w * v);
        s2.add(w * v * v);
        ++m.evaluations;
    });
    const double vol = box.volume();
    m.mean = s1.value() / vol;
    m.mean_square = s2.value() / vol;
    return m;
}

}  // namespace varsens
