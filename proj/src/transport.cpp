#include "relstring/transport.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "relstring/errors.hpp"

namespace relstring {

CoordinateMap CoordinateMap::build(const StringInitialData& data)
{
    const std::size_t n = data.size();
    if (n < 4) throw ArgumentError("coordinate map needs at least four data nodes");
    std::vector<double> integrand(n);
    std::vector<double> gap(n);
    for (std::size_t i = 0; i < n; ++i) {
        gap[i] = data.lambda_plus[i] - data.lambda_minus[i];
        if (!(gap[i] > 0.0)) {
            std::ostringstream os;
            os << "Lambda_- >= Lambda_+ at node " << i << " (theta=" << data.theta[i] << ")";
            throw CausalityError(os.str(), static_cast<int>(i));
        }
        integrand[i] = 2.0 / gap[i];
    }

    CoordinateMap map;
    map.periodic_ = data.domain.is_periodic();
    map.theta_front_ = data.theta.front();
    map.theta_back_ = data.theta.back();
    const double h = data.spacing();

    std::size_t anchor = 0;
    if (map.periodic_ || (data.theta.front() <= 0.0 && data.theta.back() >= 0.0)) {
        double best = std::abs(data.theta[0]);
        for (std::size_t i = 1; i < n; ++i) {
            if (std::abs(data.theta[i]) < best) {
                best = std::abs(data.theta[i]);
                anchor = i;
            }
        }
    }
    map.anchor_ = data.theta[anchor];

    const std::vector<double> cumulative = cumulative_integral(integrand, h, map.periodic_, anchor);
    map.vartheta_nodes_.assign(cumulative.begin(), cumulative.begin() + static_cast<std::ptrdiff_t>(n));

    std::vector<double> half_gap(n);
    for (std::size_t i = 0; i < n; ++i) half_gap[i] = 0.5 * gap[i];

    const Extension ext = map.periodic_ ? Extension::periodic : Extension::clamp;
    map.lambda_minus_ = UniformSpline(data.theta.front(), h, data.lambda_minus, ext);
    map.lambda_plus_ = UniformSpline(data.theta.front(), h, data.lambda_plus, ext);

    if (map.periodic_) {
        map.theta_period_ = data.domain.length;
        map.vartheta_period_ = cumulative.back() - cumulative.front();
        map.forward_ = MonotoneCubic(data.theta, map.vartheta_nodes_, integrand, true, map.theta_period_,
                                     map.vartheta_period_);
        map.inverse_ = MonotoneCubic(map.vartheta_nodes_, data.theta, half_gap, true, map.vartheta_period_,
                                     map.theta_period_);
    } else {
        map.forward_ = MonotoneCubic(data.theta, map.vartheta_nodes_, integrand);
        map.inverse_ = MonotoneCubic(map.vartheta_nodes_, data.theta, half_gap);
    }
    return map;
}

TransportGrid make_transport_grid(const CoordinateMap& map, double h, double t_max)
{
    if (!(h > 0.0) || !(t_max >= 0.0)) throw ArgumentError("grid step must be positive and t_max non-negative");
    TransportGrid grid;
    grid.periodic = map.periodic();
    grid.vartheta0 = map.vartheta_front();
    if (grid.periodic) {
        grid.period = map.vartheta_period();
        grid.nodes = static_cast<std::size_t>(std::max(4.0, std::round(grid.period / h)));
        grid.h = grid.period / static_cast<double>(grid.nodes);
    } else {
        const double range = map.vartheta_back() - map.vartheta_front();
        const auto intervals = static_cast<std::size_t>(std::max(2.0, std::round(range / h)));
        grid.nodes = intervals + 1;
        grid.h = range / static_cast<double>(intervals);
    }
    grid.levels = static_cast<std::size_t>(std::floor(t_max / grid.h + 1e-9));
    return grid;
}

VarthetaSpeedFields solve_riemann_invariants(const CoordinateMap& map, const TransportGrid& grid)
{
    VarthetaSpeedFields fields;
    fields.grid = grid;
    const std::size_t total = (grid.levels + 1) * grid.nodes;
    fields.minus.resize(total);
    fields.plus.resize(total);
    for (std::size_t level = 0; level <= grid.levels; ++level) {
        const double t = grid.t(level);
        for (std::size_t j = 0; j < grid.nodes; ++j) {
            const double s = grid.vartheta(j);
            const double foot_minus = s - t;
            const double foot_plus = s + t;
            if (!map.periodic() && (foot_minus < map.vartheta_front() || foot_plus > map.vartheta_back()))
                fields.left_window = true;
            const double lm = map.lambda_bar_minus(foot_minus);
            const double lp = map.lambda_bar_plus(foot_plus);
            fields.minus[level * grid.nodes + j] = lm;
            fields.plus[level * grid.nodes + j] = lp;
            if (!(lm < lp)) {
                BlowUpReport report;
                report.t = t;
                report.vartheta = s;
                report.quantity = "characteristic ordering lambda_- < lambda_+";
                report.value = lm - lp;
                throw BlowUpError(report);
            }
        }
    }
    return fields;
}

namespace {

// Cubic Hermite through (x0, y0, d0), (x1, y1, d1) evaluated at local coordinate s.
double hermite_value(double y0, double y1, double d0, double d1, double h, double s)
{
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h * d1;
}

double hermite_slope(double y0, double y1, double d0, double d1, double h, double s)
{
    const double s2 = s * s;
    return ((6 * s2 - 6 * s) * y0 + (3 * s2 - 4 * s + 1) * h * d0 + (-6 * s2 + 6 * s) * y1 + (3 * s2 - 2 * s) * h * d1)
           / h;
}

}  // namespace

double InverseMap::theta_at(std::size_t level, double vartheta) const
{
    const std::size_t n = grid_.nodes;
    const double* y = table_.data() + level * n;
    const double* d = slopes_.data() + level * n;
    double u = (vartheta - grid_.vartheta0) / grid_.h;
    double shift = 0.0;
    if (grid_.periodic) {
        const double wraps = std::floor(u / static_cast<double>(n));
        u -= wraps * static_cast<double>(n);
        shift = wraps * theta_period_;
    } else {
        if (u <= 0.0) return y[0] + d[0] * (vartheta - grid_.vartheta0);
        if (u >= static_cast<double>(n - 1)) return y[n - 1] + d[n - 1] * (vartheta - grid_.vartheta(n - 1));
    }
    std::size_t i = std::min(static_cast<std::size_t>(std::floor(u)), n - 1);
    if (!grid_.periodic && i >= n - 1) i = n - 2;
    const std::size_t j = (i + 1) % n;
    const double y1 = j == 0 ? y[0] + theta_period_ : y[j];
    return shift + hermite_value(y[i], y1, d[i], d[j], grid_.h, u - static_cast<double>(i));
}

double InverseMap::vartheta_at(std::size_t level, double theta) const
{
    const std::size_t n = grid_.nodes;
    const double* y = table_.data() + level * n;
    const double* d = slopes_.data() + level * n;
    double shift = 0.0;
    if (grid_.periodic) {
        const double wraps = std::floor((theta - y[0]) / theta_period_);
        theta -= wraps * theta_period_;
        shift = wraps * grid_.period;
    } else {
        if (theta <= y[0]) return grid_.vartheta0 + (theta - y[0]) / d[0];
        if (theta >= y[n - 1]) return grid_.vartheta(n - 1) + (theta - y[n - 1]) / d[n - 1];
    }
    // interval with y[i] <= theta < y[i+1] (the wrap interval for periodic rows)
    std::size_t i = static_cast<std::size_t>(std::upper_bound(y, y + n, theta) - y);
    i = i == 0 ? 0 : i - 1;
    const std::size_t j = (i + 1) % n;
    const double y1 = j == 0 ? y[0] + theta_period_ : y[j];
    // safeguarded Newton on the monotone cubic
    double lo = 0.0, hi = 1.0;
    double s = (theta - y[i]) / (y1 - y[i]);
    for (int iter = 0; iter < 60; ++iter) {
        const double f = hermite_value(y[i], y1, d[i], d[j], grid_.h, s) - theta;
        if (f > 0.0) hi = s; else lo = s;
        const double slope = hermite_slope(y[i], y1, d[i], d[j], grid_.h, s) * grid_.h;
        double next = slope > 0.0 ? s - f / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - s) < 1e-15) {
            s = next;
            break;
        }
        s = next;
    }
    return shift + grid_.vartheta(i) + s * grid_.h;
}

double integrate_theta_path(const CoordinateMap& map, const TransportGrid& grid, std::size_t level0,
                            std::size_t node0, std::size_t level1, std::size_t node1, bool vartheta_first)
{
    const double h = grid.h;
    auto half_gap = [&](double t, double s) { return 0.5 * (map.lambda_bar_plus(s + t) - map.lambda_bar_minus(s - t)); };
    auto half_sum = [&](double t, double s) { return 0.5 * (map.lambda_bar_plus(s + t) + map.lambda_bar_minus(s - t)); };

    auto along_vartheta = [&](double t, std::size_t from, std::size_t to) {
        double sum = 0.0;
        const double sign = to >= from ? 1.0 : -1.0;
        const std::size_t lo = std::min(from, to), hi = std::max(from, to);
        for (std::size_t k = lo; k < hi; ++k) sum += h * half_gap(t, grid.vartheta(k) + 0.5 * h);
        return sign * sum;
    };
    auto along_t = [&](double s, std::size_t from, std::size_t to) {
        double sum = 0.0;
        const double sign = to >= from ? 1.0 : -1.0;
        const std::size_t lo = std::min(from, to), hi = std::max(from, to);
        for (std::size_t k = lo; k < hi; ++k) sum += h * half_sum(grid.t(k) + 0.5 * h, s);
        return sign * sum;
    };

    if (vartheta_first)
        return along_vartheta(grid.t(level0), node0, node1) + along_t(grid.vartheta(node1), level0, level1);
    return along_t(grid.vartheta(node0), level0, level1) + along_vartheta(grid.t(level1), node0, node1);
}

InverseMap build_inverse_map(const CoordinateMap& map, const VarthetaSpeedFields& fields, std::uint64_t seed,
                             int rectangles)
{
    const TransportGrid& grid = fields.grid;
    InverseMap inv;
    inv.grid_ = grid;
    inv.theta_period_ = map.theta_period();
    const std::size_t n = grid.nodes;
    inv.table_.resize((grid.levels + 1) * n);
    inv.slopes_.resize((grid.levels + 1) * n);

    for (std::size_t j = 0; j < n; ++j) inv.table_[j] = map.theta0_inverse(grid.vartheta(j));
    for (std::size_t level = 0; level < grid.levels; ++level) {
        const double t_mid = grid.t(level) + 0.5 * grid.h;
        for (std::size_t j = 0; j < n; ++j) {
            const double s = grid.vartheta(j);
            const double rate = 0.5 * (map.lambda_bar_plus(s + t_mid) + map.lambda_bar_minus(s - t_mid));
            inv.table_[(level + 1) * n + j] = inv.table_[level * n + j] + grid.h * rate;
        }
    }
    for (std::size_t level = 0; level <= grid.levels; ++level) {
        for (std::size_t j = 0; j < n; ++j)
            inv.slopes_[level * n + j] = 0.5 * (fields.lambda_plus(level, j) - fields.lambda_minus(level, j));
    }

    if (grid.levels > 0 && n > 1 && rectangles > 0) {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<std::size_t> pick_level(0, grid.levels);
        std::uniform_int_distribution<std::size_t> pick_node(0, n - 1);
        for (int r = 0; r < rectangles; ++r) {
            std::size_t l0 = pick_level(rng), l1 = pick_level(rng);
            std::size_t j0 = pick_node(rng), j1 = pick_node(rng);
            if (l0 > l1) std::swap(l0, l1);
            if (j0 > j1) std::swap(j0, j1);
            const double a = integrate_theta_path(map, grid, l0, j0, l1, j1, true);
            const double b = integrate_theta_path(map, grid, l0, j0, l1, j1, false);
            inv.path_residual_ = std::max(inv.path_residual_, std::abs(a - b));
        }
        if (inv.path_residual_ > 10.0 * grid.h * grid.h) {
            std::ostringstream os;
            os << "inverse map is path dependent: residual " << inv.path_residual_ << " exceeds 10 h^2 = "
               << 10.0 * grid.h * grid.h;
            throw ConsistencyError(os.str());
        }
    }
    return inv;
}

ThetaSpeedFields to_theta_coordinates(const CoordinateMap& map, const InverseMap& inverse,
                                      std::span<const double> theta)
{
    const TransportGrid& grid = inverse.grid();
    ThetaSpeedFields out;
    out.theta.assign(theta.begin(), theta.end());
    out.dt = grid.h;
    out.levels = grid.levels;
    const std::size_t m = theta.size();
    out.minus.resize((grid.levels + 1) * m);
    out.plus.resize((grid.levels + 1) * m);
    for (std::size_t level = 0; level <= grid.levels; ++level) {
        const double t = grid.t(level);
        for (std::size_t i = 0; i < m; ++i) {
            const double s = inverse.vartheta_at(level, theta[i]);
            out.minus[level * m + i] = map.lambda_bar_minus(s - t);
            out.plus[level * m + i] = map.lambda_bar_plus(s + t);
        }
    }
    return out;
}

}  // namespace relstring
