#include "relstring/interpolation.hpp"

#include <algorithm>
#include <cmath>

#include "relstring/errors.hpp"
#include "relstring/worldsheet.hpp"

namespace relstring {

namespace {

struct Hermite {
    double h00, h10, h01, h11;
    double d00, d10, d01, d11;  // derivatives with respect to the local coordinate
};

Hermite hermite(double s)
{
    const double s2 = s * s, s3 = s2 * s;
    return {2 * s3 - 3 * s2 + 1,    s3 - 2 * s2 + s,      -2 * s3 + 3 * s2,      s3 - s2,
            6 * s2 - 6 * s,         3 * s2 - 4 * s + 1,   -6 * s2 + 6 * s,       3 * s2 - 2 * s};
}

}  // namespace

UniformSpline::UniformSpline(double x0, double dx, std::vector<double> values, Extension ext, double increment,
                             std::vector<double> slopes)
    : x0_(x0), dx_(dx), values_(std::move(values)), slopes_(std::move(slopes)), ext_(ext), increment_(increment)
{
    if (!(dx_ > 0.0)) throw ArgumentError("spline spacing must be positive");
    if (values_.size() < 2) throw ArgumentError("spline needs at least two nodes");
    if (slopes_.empty()) {
        if (ext_ == Extension::periodic || values_.size() >= 5) {
            slopes_ = derivative4(values_, dx_, ext_ == Extension::periodic, increment_);
        } else {
            slopes_.resize(values_.size());
            for (std::size_t i = 0; i < values_.size(); ++i) {
                const std::size_t a = i == 0 ? 0 : i - 1;
                const std::size_t b = std::min(i + 1, values_.size() - 1);
                slopes_[i] = (values_[b] - values_[a]) / (dx_ * static_cast<double>(b - a));
            }
        }
    }
    if (slopes_.size() != values_.size()) throw ArgumentError("spline slopes and values differ in length");
}

UniformSpline::Located UniformSpline::locate(double x) const
{
    const std::size_t n = values_.size();
    double u = (x - x0_) / dx_;
    if (ext_ == Extension::periodic) {
        const double nn = static_cast<double>(n);
        const double wraps = std::floor(u / nn);
        u -= wraps * nn;
        std::size_t i = static_cast<std::size_t>(std::floor(u));
        if (i >= n) i = n - 1;
        return {i, u - static_cast<double>(i), wraps * increment_, 0};
    }
    const double last = static_cast<double>(n - 1);
    if (u < 0.0) return {0, 0.0, 0.0, -1};
    if (u > last) return {n - 2, 1.0, 0.0, +1};
    std::size_t i = static_cast<std::size_t>(std::floor(u));
    if (i >= n - 1) i = n - 2;
    return {i, u - static_cast<double>(i), 0.0, 0};
}

double UniformSpline::operator()(double x) const
{
    const Located at = locate(x);
    const std::size_t n = values_.size();
    if (at.outside != 0) {
        const std::size_t end = at.outside < 0 ? 0 : n - 1;
        if (ext_ == Extension::clamp) return values_[end];
        const double edge = at.outside < 0 ? x0_ : x_end();
        return values_[end] + slopes_[end] * (x - edge);
    }
    const std::size_t j = (at.i + 1) % n;
    const double wrap = (ext_ == Extension::periodic && j == 0) ? increment_ : 0.0;
    const Hermite b = hermite(at.s);
    return at.offset + b.h00 * values_[at.i] + b.h10 * dx_ * slopes_[at.i] + b.h01 * (values_[j] + wrap)
           + b.h11 * dx_ * slopes_[j];
}

double UniformSpline::derivative(double x) const
{
    const Located at = locate(x);
    const std::size_t n = values_.size();
    if (at.outside != 0) {
        if (ext_ == Extension::clamp) return 0.0;
        return slopes_[at.outside < 0 ? 0 : n - 1];
    }
    const std::size_t j = (at.i + 1) % n;
    const double wrap = (ext_ == Extension::periodic && j == 0) ? increment_ : 0.0;
    const Hermite b = hermite(at.s);
    return (b.d00 * values_[at.i] + b.d10 * dx_ * slopes_[at.i] + b.d01 * (values_[j] + wrap)
            + b.d11 * dx_ * slopes_[j])
           / dx_;
}

// ---------------------------------------------------------------------------

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y, std::vector<double> slopes,
                             bool periodic, double x_period, double y_period)
    : x_(std::move(x)), y_(std::move(y)), d_(std::move(slopes)), periodic_(periodic), x_period_(x_period),
      y_period_(y_period)
{
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw ArgumentError("monotone cubic needs matching node arrays of length >= 2");
    for (std::size_t i = 1; i < n; ++i) {
        if (!(x_[i] > x_[i - 1]) || !(y_[i] > y_[i - 1]))
            throw ArgumentError("monotone cubic needs strictly increasing nodes and values");
    }
    if (periodic_ && !(x_period_ > x_.back() - x_.front() && y_period_ > y_.back() - y_.front()))
        throw ArgumentError("monotone cubic: period shorter than the table");

    // secants, including the wrap-around interval for periodic tables
    const std::size_t intervals = periodic_ ? n : n - 1;
    std::vector<double> secant(intervals);
    for (std::size_t i = 0; i < intervals; ++i) {
        const double x1 = i + 1 < n ? x_[i + 1] : x_[0] + x_period_;
        const double y1 = i + 1 < n ? y_[i + 1] : y_[0] + y_period_;
        secant[i] = (y1 - y_[i]) / (x1 - x_[i]);
    }
    if (d_.empty()) {
        d_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (periodic_) {
                const double left = secant[(i + n - 1) % n];
                d_[i] = 0.5 * (left + secant[i]);
            } else if (i == 0) {
                d_[i] = secant[0];
            } else if (i == n - 1) {
                d_[i] = secant[n - 2];
            } else {
                d_[i] = 0.5 * (secant[i - 1] + secant[i]);
            }
        }
    }
    if (d_.size() != n) throw ArgumentError("monotone cubic slopes and nodes differ in length");
    for (std::size_t i = 0; i < intervals; ++i) {
        const std::size_t j = (i + 1) % n;
        const double alpha = d_[i] / secant[i];
        const double beta = d_[j] / secant[i];
        const double r = alpha * alpha + beta * beta;
        if (r > 9.0) {
            const double tau = 3.0 / std::sqrt(r);
            d_[i] = tau * alpha * secant[i];
            d_[j] = tau * beta * secant[i];
        }
    }
}

double MonotoneCubic::operator()(double x) const
{
    const std::size_t n = x_.size();
    double shift = 0.0;
    if (periodic_) {
        const double wraps = std::floor((x - x_.front()) / x_period_);
        x -= wraps * x_period_;
        shift = wraps * y_period_;
    } else {
        if (x <= x_.front()) return y_.front() + d_.front() * (x - x_.front());
        if (x >= x_.back()) return y_.back() + d_.back() * (x - x_.back());
    }
    std::size_t i = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin());
    i = i == 0 ? 0 : i - 1;
    const std::size_t j = (i + 1) % n;
    const double x1 = i + 1 < n ? x_[i + 1] : x_[0] + x_period_;
    const double y1 = i + 1 < n ? y_[i + 1] : y_[0] + y_period_;
    const double h = x1 - x_[i];
    const Hermite b = hermite((x - x_[i]) / h);
    return shift + b.h00 * y_[i] + b.h10 * h * d_[i] + b.h01 * y1 + b.h11 * h * d_[j];
}

double MonotoneCubic::derivative(double x) const
{
    const std::size_t n = x_.size();
    if (periodic_) {
        x -= std::floor((x - x_.front()) / x_period_) * x_period_;
    } else {
        if (x <= x_.front()) return d_.front();
        if (x >= x_.back()) return d_.back();
    }
    std::size_t i = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin());
    i = i == 0 ? 0 : i - 1;
    const std::size_t j = (i + 1) % n;
    const double x1 = i + 1 < n ? x_[i + 1] : x_[0] + x_period_;
    const double y1 = i + 1 < n ? y_[i + 1] : y_[0] + y_period_;
    const double h = x1 - x_[i];
    const Hermite b = hermite((x - x_[i]) / h);
    return (b.d00 * y_[i] + b.d10 * h * d_[i] + b.d01 * y1 + b.d11 * h * d_[j]) / h;
}

// ---------------------------------------------------------------------------

namespace {

double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth)
{
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
           + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol, int max_depth)
{
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

std::vector<double> cumulative_integral(std::span<const double> values, double dx, bool periodic,
                                        std::size_t anchor)
{
    const std::size_t n = values.size();
    if (n < 2) throw ArgumentError("cumulative integral needs at least two samples");
    if (!periodic && n < 4) throw ArgumentError("line tables need at least four samples");
    auto f = [&](std::ptrdiff_t i) {
        const auto nn = static_cast<std::ptrdiff_t>(n);
        return values[static_cast<std::size_t>(((i % nn) + nn) % nn)];
    };
    const std::size_t intervals = periodic ? n : n - 1;
    std::vector<double> piece(intervals);
    for (std::size_t k = 0; k < intervals; ++k) {
        const auto i = static_cast<std::ptrdiff_t>(k);
        if (periodic || (k >= 1 && k + 2 < n)) {
            piece[k] = dx / 24.0 * (-f(i - 1) + 13.0 * f(i) + 13.0 * f(i + 1) - f(i + 2));
        } else if (k == 0) {
            piece[k] = dx / 24.0 * (9.0 * f(0) + 19.0 * f(1) - 5.0 * f(2) + f(3));
        } else {
            const auto e = static_cast<std::ptrdiff_t>(n - 1);
            piece[k] = dx / 24.0 * (9.0 * f(e) + 19.0 * f(e - 1) - 5.0 * f(e - 2) + f(e - 3));
        }
    }
    std::vector<double> out(intervals + 1, 0.0);
    for (std::size_t k = 0; k < intervals; ++k) out[k + 1] = out[k] + piece[k];
    const double base = out[std::min(anchor, out.size() - 1)];
    for (double& v : out) v -= base;
    return out;
}

}  // namespace relstring
