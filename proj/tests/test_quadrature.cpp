#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "varsens/errors.hpp"
#include "varsens/expression.hpp"
#include "varsens/quadrature.hpp"

using namespace varsens;

namespace {

constexpr double kPi = std::numbers::pi;
const Interval kIshigamiRange(-kPi / 10, kPi / 10);

double ishigami(double x, double y, double z) {
    return std::sin(x) + 7 * std::pow(std::sin(y), 2) + 0.1 * std::pow(z, 4) * std::sin(x);
}

Box box2(Interval a, Interval b) { return Box({{"x", a}, {"y", b}}); }

}  // namespace

TEST(Interval, Validates) {
    EXPECT_THROW(Interval(1, 1), InvalidArgument);
    EXPECT_THROW(Interval(2, 1), InvalidArgument);
    EXPECT_THROW(Interval(0, INFINITY), InvalidArgument);
    EXPECT_THROW(Interval(NAN, 1), InvalidArgument);
    EXPECT_EQ(Interval(-1, 3).length(), 4.0);
}

TEST(Box, Validates) {
    EXPECT_THROW(Box({}), InvalidArgument);
    EXPECT_THROW(Box({{"x", Interval(0, 1)}, {"x", Interval(0, 2)}}), InvalidArgument);
    EXPECT_DOUBLE_EQ(box2(Interval(0, 2), Interval(1, 4)).volume(), 6.0);
}

TEST(Config, Validates) {
    QuadratureConfig c;
    EXPECT_NO_THROW(c.validate());
    c.delta_1d = 0.6;
    EXPECT_THROW(c.validate(), InvalidArgument);
    c = {};
    c.delta_base_nd = 0.0;
    EXPECT_THROW(c.validate(), InvalidArgument);
    c = {};
    c.delta_outer = -1.0;
    EXPECT_THROW(c.validate(), InvalidArgument);
    c = {};
    c.max_evaluations = 0;
    EXPECT_THROW(c.validate(), InvalidArgument);
    EXPECT_EQ(panel_count(1e-5), 100000u);
    EXPECT_EQ(panel_count(0.5), 2u);
    EXPECT_EQ(panel_count(0.3), 3u);
}

TEST(Integrate1d, AffineExact) {
    for (double res : {0.5, 0.1, 1e-3, 1e-5}) {
        EXPECT_NEAR(integrate_1d([](double x) { return x; }, Interval(0, 1), res), 0.5, 1e-14);
        EXPECT_NEAR(integrate_1d([](double x) { return 3 - 2 * x; }, Interval(-1, 4), res), 0.0,
                    1e-12);
        EXPECT_NEAR(integrate_1d([](double x) { return 3 - 2 * x; }, Interval(0, 4), res), -4.0,
                    1e-12);
    }
}

TEST(Integrate1d, SineOnHalfPeriod) {
    EXPECT_NEAR(integrate_1d([](double x) { return std::sin(x); }, Interval(0, kPi), 1e-5), 2.0,
                1e-8);
}

TEST(Integrate1d, IshigamiYSliceMean) {
    const double mean =
        integrate_1d([](double y) { return 7 * std::pow(std::sin(y), 2); }, kIshigamiRange, 1e-5) /
        (kPi / 5);
    EXPECT_NEAR(mean, 0.2258, 1e-3);
    EXPECT_NEAR(mean * mean, 0.05098, 1e-4);
}

TEST(Integrate1d, NonFiniteIntegrand) {
    EXPECT_THROW(integrate_1d([](double x) { return 1.0 / x; }, Interval(0, 1), 0.1),
                 NonFiniteIntegrand);
}

TEST(IntegrateNd, Examples) {
    auto one = [](std::span<const double>) { return 1.0; };
    EXPECT_EQ(integrate_nd(one, box2(Interval(0, 1), Interval(0, 1)), 1e-2, 100'000'000), 1.0);
    auto xy = [](std::span<const double> p) { return p[0] * p[1]; };
    EXPECT_NEAR(integrate_nd(xy, box2(Interval(0, 1), Interval(0, 1)), 1e-3, 100'000'000), 0.25,
                1e-6);
}

TEST(IntegrateNd, IshigamiHeldY) {
    const Box b({{"x", kIshigamiRange}, {"z", kIshigamiRange}});
    for (double v : {0.0, 0.1, 0.3}) {
        auto f = [v](std::span<const double> p) { return ishigami(p[0], v, p[1]); };
        const double mean = integrate_nd(f, b, 1e-3, 100'000'000) / std::pow(kPi / 5, 2);
        EXPECT_NEAR(mean, 7 * std::pow(std::sin(v), 2), 1e-4) << v;
    }
}

TEST(IntegrateNd, MultilinearExact) {
    const Box b({{"a", Interval(-1, 2)}, {"b", Interval(0, 3)}, {"c", Interval(1, 2)}});
    auto f = [](std::span<const double> p) { return 1 + p[0] * p[1] * p[2] - 2 * p[1]; };
    // exact: vol*(1 + E[a]E[b]E[c] - 2E[b]) = 9*(1 + 0.5*1.5*1.5 - 3)
    const double exact = 9.0 * (1 + 0.5 * 1.5 * 1.5 - 3);
    EXPECT_NEAR(integrate_nd(f, b, 0.1, 100'000'000), exact, 1e-12 * std::abs(exact));
}

TEST(IntegrateNd, CornerAverageEquivalence) {
    // the node-weight tensor rule equals averaging the 2^n corners of every cell
    const Box b = box2(Interval(0, 1), Interval(-1, 2));
    auto f = [](double x, double y) { return std::exp(x) * std::cos(y) + x * x * y; };
    const std::size_t n = 7;
    const double hx = 1.0 / n;
    const double hy = 3.0 / n;
    CompensatedSum corners;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double x0 = i * hx, x1 = (i + 1) * hx;
            const double y0 = -1 + j * hy, y1 = -1 + (j + 1) * hy;
            corners.add((f(x0, y0) + f(x0, y1) + f(x1, y0) + f(x1, y1)) / 4 * hx * hy);
        }
    }
    auto g = [&](std::span<const double> p) { return f(p[0], p[1]); };
    EXPECT_NEAR(integrate_nd(g, b, 1.0 / 7, 1000), corners.value(), 1e-13);
}

TEST(IntegrateNd, OdometerVisitsEveryNodeOnce) {
    const Box b({{"a", Interval(0, 1)}, {"b", Interval(0, 1)}, {"c", Interval(0, 1)}});
    std::size_t count = 0;
    double weight = 0.0;
    std::vector<double> previous;
    bool ordered = true;
    for_each_node(b, 4, Rule::trapezoid, [&](std::span<const double> p, double w) {
        std::vector<double> cur(p.begin(), p.end());
        if (!previous.empty() && !(previous < cur)) ordered = false;
        previous = cur;
        ++count;
        weight += w;
    });
    EXPECT_EQ(count, 125u);
    EXPECT_NEAR(weight, 1.0, 1e-15);
    EXPECT_TRUE(ordered);
    count = 0;
    for_each_node(b, 4, Rule::midpoint, [&](std::span<const double>, double) { ++count; });
    EXPECT_EQ(count, 64u);
}

TEST(IntegrateNd, Budget) {
    const Box b({{"a", Interval(0, 1)}, {"b", Interval(0, 1)}, {"c", Interval(0, 1)}});
    auto one = [](std::span<const double>) { return 1.0; };
    try {
        integrate_nd(one, b, 1e-3, 100'000'000);
        FAIL();
    } catch (const BudgetExceeded& e) {
        EXPECT_EQ(e.required(), 1e9);
        EXPECT_EQ(e.allowed(), 100'000'000u);
        EXPECT_EQ(e.category(), ErrorCategory::budget);
    }
    EXPECT_NO_THROW(integrate_nd(one, b, 1e-2, 1'000'000));
}

TEST(IntegrateNd, NonFinite) {
    auto f = [](std::span<const double> p) { return std::log(p[0] * p[1]); };
    EXPECT_THROW(integrate_nd(f, box2(Interval(0, 1), Interval(0, 1)), 0.1, 1000),
                 NonFiniteIntegrand);
}

TEST(MeanValue, Examples) {
    EXPECT_NEAR(mean_value([](double x) { return x; }, Interval(0, 2), 1e-3), 1.0, 1e-14);
    auto c = [](std::span<const double>) { return 4.25; };
    const Box b = box2(Interval(-3, 1), Interval(2, 7));
    EXPECT_NEAR(mean_value(c, b, 0.1, 1000), 4.25, 1e-14);
    EXPECT_EQ(mean_value([](double) { return 4.25; }, Interval(0, 1), 0.5), 4.25);
}

TEST(MeanValue, IshigamiFullBox) {
    const Box b({{"x", kIshigamiRange}, {"y", kIshigamiRange}, {"z", kIshigamiRange}});
    auto f = [](std::span<const double> p) { return ishigami(p[0], p[1], p[2]); };
    const double mean = mean_value(f, b, 1e-2, 100'000'000);
    EXPECT_NEAR(mean, 0.2258, 1e-3);
    EXPECT_NEAR(mean * mean, 0.05098, 1e-4);
}

TEST(Properties, Linearity) {
    auto f = [](double x) { return std::exp(x); };
    auto g = [](double x) { return std::sin(3 * x); };
    const Interval iv(-1, 2);
    const double a = 2.5, b = -0.75;
    const double lhs = integrate_1d([&](double x) { return a * f(x) + b * g(x); }, iv, 1e-4);
    const double rhs = a * integrate_1d(f, iv, 1e-4) + b * integrate_1d(g, iv, 1e-4);
    EXPECT_NEAR(lhs, rhs, 1e-12 * std::abs(rhs));
}

TEST(Properties, ConvergenceOrder) {
    auto f = [](double x) { return std::cos(x); };
    const Interval iv(0, 1);
    const double exact = std::sin(1.0);
    double prev = std::abs(integrate_1d(f, iv, 0.1) - exact);
    for (double res : {0.05, 0.025, 0.0125, 0.00625}) {
        const double err = std::abs(integrate_1d(f, iv, res) - exact);
        EXPECT_GE(prev / err, 3.5);
        EXPECT_LE(prev / err, 4.5);
        prev = err;
    }
}

TEST(Properties, Fubini) {
    auto f = [](double x, double y) { return std::exp(-x * y) + std::sin(x + 2 * y); };
    const Interval ix(0, 1.5), iy(-1, 1);
    const double res = 2e-3;
    const double nested = integrate_1d(
        [&](double x) { return integrate_1d([&](double y) { return f(x, y); }, iy, res); }, ix,
        res);
    const double tensor =
        integrate_nd([&](std::span<const double> p) { return f(p[0], p[1]); }, box2(ix, iy), res,
                     100'000'000);
    EXPECT_NEAR(tensor, nested, 1e-6 * std::abs(nested));
}

TEST(Properties, DomainAdditivity) {
    auto f = [](double x) { return x * x * std::exp(x); };
    // split [0, 2] at 0.8, a node of the 100-panel grid of [0, 2]
    const double whole = integrate_1d(f, Interval(0, 2), 0.01);
    const double left = integrate_1d(f, Interval(0, 0.8), 1.0 / 40);
    const double right = integrate_1d(f, Interval(0.8, 2), 1.0 / 60);
    EXPECT_NEAR(left + right, whole, 1e-12 * std::abs(whole));
}

TEST(Properties, MidpointRuleIsSecondOrder) {
    auto f = [](double x) { return std::exp(x); };
    const double exact = std::exp(1.0) - 1.0;
    const double e1 = std::abs(integrate_1d(f, Interval(0, 1), 0.02, Rule::midpoint) - exact);
    const double e2 = std::abs(integrate_1d(f, Interval(0, 1), 0.01, Rule::midpoint) - exact);
    EXPECT_NEAR(e1 / e2, 4.0, 0.1);
}

TEST(Summation, Compensated) {
    CompensatedSum s;
    s.add(1.0);
    for (int i = 0; i < 1'000'000; ++i) s.add(1e-16);
    s.add(-1.0);
    EXPECT_NEAR(s.value(), 1e-10, 1e-18);
}

TEST(Moments, MatchSeparatePasses) {
    const Interval iv(0, 1);
    const Moments m = moments([](double x) { return x; }, iv, 1e-3);
    EXPECT_NEAR(m.mean, 0.5, 1e-15);
    EXPECT_NEAR(m.variance(), 1.0 / 12, 1e-6);
    EXPECT_EQ(m.evaluations, 1001u);
}
