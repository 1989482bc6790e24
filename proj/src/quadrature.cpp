#include "varsens/quadrature.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace varsens {

Interval::Interval(double min, double max) : min_(min), max_(max) {
    if (!std::isfinite(min) || !std::isfinite(max)) {
        throw InvalidArgument("interval bounds must be finite");
    }
    if (!(max > min)) {
        std::ostringstream os;
        os.precision(17);
        os << "interval [" << min << ", " << max << "] must satisfy max > min";
        throw InvalidArgument(os.str());
    }
}

Box::Box(std::vector<Axis> axes) : axes_(std::move(axes)) {
    if (axes_.empty()) throw InvalidArgument("a box needs at least one axis");
    std::set<std::string, std::less<>> seen;
    for (const Axis& a : axes_) {
        if (!seen.insert(a.name).second) {
            throw InvalidArgument("axis '" + a.name + "' appears twice in the box");
        }
    }
}

double Box::volume() const noexcept {
    double v = 1.0;
    for (const Axis& a : axes_) v *= a.interval.length();
    return v;
}

void QuadratureConfig::validate() const {
    panel_count(delta_1d);
    panel_count(delta_base_nd);
    if (delta_outer) panel_count(*delta_outer);
    if (max_evaluations == 0) throw InvalidArgument("evaluation budget must be positive");
}

std::size_t panel_count(double resolution) {
    if (!(resolution > 0.0) || !(resolution <= 0.5)) {
        std::ostringstream os;
        os << "resolution " << resolution << " must lie in (0, 0.5]";
        throw InvalidArgument(os.str());
    }
    const double n = std::round(1.0 / resolution);
    if (n > 1e15) throw InvalidArgument("resolution is too fine");
    return static_cast<std::size_t>(n);
}

std::size_t node_count(std::size_t panels, Rule rule) noexcept {
    return rule == Rule::trapezoid ? panels + 1 : panels;
}

void check_budget(std::size_t panels, std::size_t dimension, std::uint64_t max_evaluations) {
    const double required = std::pow(static_cast<double>(panels), static_cast<double>(dimension));
    if (required > static_cast<double>(max_evaluations)) {
        throw BudgetExceeded(required, max_evaluations);
    }
}

namespace detail {

void throw_non_finite(double x) {
    std::ostringstream os;
    os.precision(17);
    os << "x = " << x;
    throw NonFiniteIntegrand(os.str());
}

void throw_non_finite(std::span<const double> point, const Box& box) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (std::size_t k = 0; k < point.size(); ++k) {
        if (k) os << ", ";
        os << box.axes()[k].name << " = " << point[k];
    }
    os << ')';
    throw NonFiniteIntegrand(os.str());
}

AxisGrid axis_grid(const Interval& iv, std::size_t panels, Rule rule) {
    AxisGrid g;
    g.nodes.reserve(node_count(panels, rule));
    g.weights.reserve(node_count(panels, rule));
    for_each_node(iv, panels, rule, [&](double x, double w) {
        g.nodes.push_back(x);
        g.weights.push_back(w);
    });
    return g;
}

}  // namespace detail

}  // namespace varsens
