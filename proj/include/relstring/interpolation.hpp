#pragma once

#include <functional>
#include <span>
#include <vector>

namespace relstring {

/// How a one-dimensional table is continued past its nodes.
enum class Extension {
    periodic,  // f(x + period) = f(x) + increment
    clamp,     // constant continuation of the end values
    linear,    // straight-line continuation with the end slopes
};

/// Piecewise cubic Hermite interpolant on a uniform grid. With fourth-order slopes the
/// interpolation error is O(h^4).
class UniformSpline {
public:
    UniformSpline() = default;

    /// Slopes default to fourth-order differences of the values. For periodic tables the
    /// grid holds one period without the repeated endpoint and `increment` is f(x0 + period) - f(x0).
    UniformSpline(double x0, double dx, std::vector<double> values, Extension ext, double increment = 0.0,
                  std::vector<double> slopes = {});

    double operator()(double x) const;
    double derivative(double x) const;

    double x0() const { return x0_; }
    double dx() const { return dx_; }
    double x_end() const { return x0_ + dx_ * static_cast<double>(values_.size() - 1); }
    double period() const { return dx_ * static_cast<double>(values_.size()); }
    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& slopes() const { return slopes_; }

private:
    struct Located {
        std::size_t i;
        double s;       // local coordinate in [0, 1]
        double offset;  // periodic increment to add
        int outside;    // -1 left of the table, +1 right, 0 inside
    };
    Located locate(double x) const;

    double x0_ = 0.0;
    double dx_ = 1.0;
    std::vector<double> values_;
    std::vector<double> slopes_;
    Extension ext_ = Extension::clamp;
    double increment_ = 0.0;
};

/// Monotone piecewise cubic Hermite interpolant on strictly increasing nodes, with
/// Fritsch-Carlson limiting applied to the supplied (or estimated) slopes.
class MonotoneCubic {
public:
    MonotoneCubic() = default;

    /// `x` strictly increasing, `y` strictly increasing. Periodic tables omit the repeated endpoint;
    /// then x_period and y_period give the shifts of one full period. Non-periodic tables
    /// extend linearly.
    MonotoneCubic(std::vector<double> x, std::vector<double> y, std::vector<double> slopes = {},
                  bool periodic = false, double x_period = 0.0, double y_period = 0.0);

    double operator()(double x) const;
    double derivative(double x) const;

    double x_front() const { return x_.front(); }
    double x_back() const { return x_.back(); }
    bool periodic() const { return periodic_; }

private:
    std::vector<double> x_, y_, d_;
    bool periodic_ = false;
    double x_period_ = 0.0, y_period_ = 0.0;
};

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth = 40);

/// Cumulative integral of uniformly sampled values, I[k] = integral from x[anchor] to x[k],
/// using the fourth-order four-point rule on each interval (one-sided at line ends).
/// Periodic tables return n + 1 entries; the last one is at x[0] + period.
std::vector<double> cumulative_integral(std::span<const double> values, double dx, bool periodic,
                                        std::size_t anchor = 0);

}  // namespace relstring
