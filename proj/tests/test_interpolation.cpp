#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "relstring/interpolation.hpp"

using namespace relstring;

namespace {

double spline_error(std::size_t n)
{
    const double dx = oracle::kTwoPi / n;
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::sin(i * dx) + std::cos(2 * i * dx);
    const UniformSpline s(0.0, dx, v, Extension::periodic);
    double e = 0.0;
    for (int k = 0; k < 997; ++k) {
        const double x = -3.0 + 13.0 * k / 997.0;
        e = std::max(e, std::abs(s(x) - std::sin(x) - std::cos(2 * x)));
    }
    return e;
}

}  // namespace

TEST(UniformSpline, FourthOrderPeriodicInterpolation)
{
    const double order = std::log2(spline_error(32) / spline_error(64));
    EXPECT_GT(order, 3.6);
    EXPECT_LT(spline_error(128), 1e-6);
}

TEST(UniformSpline, PeriodicIncrementAndNodeExactness)
{
    const std::size_t n = 50;
    const double dx = oracle::kTwoPi / n;
    std::vector<double> v(n), d(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = i * dx + 0.3 * std::sin(i * dx);
        d[i] = 1.0 + 0.3 * std::cos(i * dx);
    }
    const UniformSpline s(0.0, dx, v, Extension::periodic, oracle::kTwoPi, d);
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(s(i * dx), v[i]);
    EXPECT_NEAR(s(0.37 + oracle::kTwoPi) - s(0.37), oracle::kTwoPi, 1e-12);
    EXPECT_NEAR(s.derivative(0.37 - 2 * oracle::kTwoPi), s.derivative(0.37), 1e-12);
}

TEST(UniformSpline, ClampAndLinearExtension)
{
    std::vector<double> v{0.0, 1.0, 4.0, 9.0, 16.0};
    const UniformSpline c(0.0, 1.0, v, Extension::clamp);
    EXPECT_EQ(c(-3.0), 0.0);
    EXPECT_EQ(c(10.0), 16.0);
    const UniformSpline l(0.0, 1.0, v, Extension::linear, 0.0, {0.0, 2.0, 4.0, 6.0, 8.0});
    EXPECT_NEAR(l(5.0), 24.0, 1e-12);
    EXPECT_NEAR(l.derivative(-1.0), 0.0, 1e-12);
}

TEST(MonotoneCubic, StaysMonotoneAndInvertsItsTable)
{
    std::vector<double> x, y;
    for (int i = 0; i <= 40; ++i) {
        x.push_back(0.1 * i);
        y.push_back(std::tanh(5.0 * (0.1 * i - 2.0)) + 0.01 * i);
    }
    const MonotoneCubic f(x, y);
    const MonotoneCubic g(y, x);
    double prev = -1e9;
    for (int k = 0; k <= 4000; ++k) {
        const double v = f(0.001 * k);
        EXPECT_GE(v, prev);
        prev = v;
    }
    for (int i = 0; i <= 40; ++i) EXPECT_NEAR(g(f(x[i])), x[i], 1e-12);
}

TEST(MonotoneCubic, PeriodicShifts)
{
    std::vector<double> x, y;
    for (int i = 0; i < 20; ++i) {
        x.push_back(0.1 * i);
        y.push_back(0.2 * i + 0.01 * std::sin(oracle::kTwoPi * i / 20.0));
    }
    const MonotoneCubic f(x, y, {}, true, 2.0, 4.0);
    EXPECT_NEAR(f(0.55 + 2.0), f(0.55) + 4.0, 1e-12);
    EXPECT_NEAR(f(0.55 - 4.0), f(0.55) - 8.0, 1e-12);
}

TEST(Quadrature, AdaptiveSimpsonAgainstPrimitive)
{
    const double v = adaptive_simpson([](double x) { return std::exp(-x * x) * std::cos(3 * x); }, -2.0, 1.5, 1e-12);
    const double ref = oracle::simpson([](double x) { return std::exp(-x * x) * std::cos(3 * x); }, -2.0, 1.5, 200000);
    EXPECT_NEAR(v, ref, 1e-11);
    EXPECT_NEAR(adaptive_simpson([](double x) { return x * x; }, 0.0, 3.0, 1e-14), 9.0, 1e-13);
}

TEST(Quadrature, CumulativeIntegralIsFourthOrder)
{
    auto err = [](std::size_t n, bool periodic) {
        const double L = oracle::kTwoPi;
        const double dx = periodic ? L / n : L / (n - 1);
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = std::cos(i * dx) + 0.5;
        const auto I = cumulative_integral(v, dx, periodic);
        double e = 0.0;
        for (std::size_t i = 0; i < I.size(); ++i) e = std::max(e, std::abs(I[i] - std::sin(i * dx) - 0.5 * i * dx));
        return std::pair{e, I.size()};
    };
    EXPECT_EQ(err(32, true).second, 33u);
    EXPECT_EQ(err(32, false).second, 32u);
    EXPECT_GT(std::log2(err(32, false).first / err(64, false).first), 3.6);
    EXPECT_GT(std::log2(err(32, true).first / err(64, true).first), 3.6);
}
