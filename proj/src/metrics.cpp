#include "relstring/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "relstring/errors.hpp"

namespace relstring {

BlowUpError::BlowUpError(BlowUpReport report)
    : Error([&report] {
          std::ostringstream os;
          os << "blow-up of " << report.quantity << " at t=" << report.t << ", vartheta=" << report.vartheta;
          if (report.component >= 0) os << " (component " << report.component << ")";
          os << ", value=" << report.value;
          return os.str();
      }()),
      report_(std::move(report))
{
}

Vec ChristoffelTensor::contract(const Vec& p, const Vec& q) const
{
    Vec out = Vec::Zero(dim_);
    for (int c = 0; c < dim_; ++c) {
        double sum = 0.0;
        for (int a = 0; a < dim_; ++a) {
            if (p[a] == 0.0) continue;
            for (int b = 0; b < dim_; ++b) sum += (*this)(c, a, b) * p[a] * q[b];
        }
        out[c] = sum;
    }
    return out;
}

double ChristoffelTensor::max_abs_difference(const ChristoffelTensor& other) const
{
    if (other.dim_ != dim_) throw ArgumentError("Christoffel tensors of different dimension");
    double worst = 0.0;
    for (std::size_t i = 0; i < data_.size(); ++i) worst = std::max(worst, std::abs(data_[i] - other.data_[i]));
    return worst;
}

Vec MetricModel::contract(const SpacetimePoint& x, const Vec& p, const Vec& q) const
{
    return christoffels(x).contract(p, q);
}

double MetricModel::inner(const SpacetimePoint& x, const Vec& a, const Vec& b) const
{
    return a.dot(metric(x) * b);
}

void MetricModel::require_dimension(const SpacetimePoint& x) const
{
    if (x.size() != dimension()) {
        std::ostringstream os;
        os << tag() << ": point has " << x.size() << " coordinates, model dimension is " << dimension();
        throw ArgumentError(os.str());
    }
    for (int i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i])) throw ArgumentError(tag() + ": non-finite coordinate");
    }
}

// ---------------------------------------------------------------------------
// Minkowski

MinkowskiMetric::MinkowskiMetric(int n) : n_(n)
{
    if (n < 0 || n + 1 > kMaxDim) throw ArgumentError("minkowski: n must lie in [0, 7]");
}

std::string MinkowskiMetric::tag() const { return "minkowski(" + std::to_string(n_) + ")"; }

MetricTensor MinkowskiMetric::metric(const SpacetimePoint& x) const
{
    require_dimension(x);
    MetricTensor g = MetricTensor::Identity(n_ + 1, n_ + 1);
    g(0, 0) = -1.0;
    return g;
}

ChristoffelTensor MinkowskiMetric::christoffels(const SpacetimePoint& x) const
{
    require_dimension(x);
    return ChristoffelTensor(n_ + 1);
}

MetricTensor MinkowskiMetric::metric_derivative(const SpacetimePoint& x, int /*c*/) const
{
    require_dimension(x);
    return MetricTensor::Zero(n_ + 1, n_ + 1);
}

Vec MinkowskiMetric::contract(const SpacetimePoint& x, const Vec& /*p*/, const Vec& /*q*/) const
{
    return Vec::Zero(x.size());
}

// ---------------------------------------------------------------------------
// Ori

HarmonicProfile quadratic_profile(double a)
{
    HarmonicProfile p;
    p.name = "quadratic";
    p.f = [a](double x, double y, double) { return a * (x * x - y * y); };
    p.f_x = [a](double x, double, double) { return 2.0 * a * x; };
    p.f_y = [a](double, double y, double) { return -2.0 * a * y; };
    p.f_z = [](double, double, double) { return 0.0; };
    return p;
}

OriMetric::OriMetric(HarmonicProfile profile) : profile_(std::move(profile))
{
    if (!profile_.f || !profile_.f_x || !profile_.f_y || !profile_.f_z)
        throw ArgumentError("ori: profile needs f, f_x, f_y and f_z");
}

std::shared_ptr<const OriMetric> OriMetric::quadratic(double a)
{
    auto m = std::make_shared<OriMetric>(quadratic_profile(a));
    m->quadratic_ = true;
    m->a_ = a;
    return m;
}

std::string OriMetric::tag() const
{
    if (quadratic_) {
        std::ostringstream os;
        os << "ori_quadratic(a=" << a_ << ")";
        return os.str();
    }
    return "ori_general(" + profile_.name + ")";
}

OriMetric::Partials OriMetric::partials(const SpacetimePoint& x) const
{
    if (quadratic_) return {a_ * (x[1] * x[1] - x[2] * x[2]), 2.0 * a_ * x[1], -2.0 * a_ * x[2], 0.0};
    return {profile_.f(x[1], x[2], x[3]), profile_.f_x(x[1], x[2], x[3]), profile_.f_y(x[1], x[2], x[3]),
            profile_.f_z(x[1], x[2], x[3])};
}

MetricTensor OriMetric::metric(const SpacetimePoint& x) const
{
    require_dimension(x);
    const Partials d = partials(x);
    MetricTensor g = MetricTensor::Zero(4, 4);
    g(1, 1) = 1.0;
    g(2, 2) = 1.0;
    g(0, 3) = g(3, 0) = -1.0;
    g(3, 3) = d.f - x[0];
    return g;
}

ChristoffelTensor OriMetric::christoffels(const SpacetimePoint& x) const
{
    require_dimension(x);
    const Partials d = partials(x);
    const double t = x[0];
    ChristoffelTensor gamma(4);
    gamma.set_symmetric(0, 0, 3, 0.5);
    gamma.set_symmetric(0, 1, 3, -0.5 * d.fx);
    gamma.set_symmetric(0, 2, 3, -0.5 * d.fy);
    gamma(0, 3, 3) = 0.5 * (t - d.f - d.fz);
    gamma(1, 3, 3) = -0.5 * d.fx;
    gamma(2, 3, 3) = -0.5 * d.fy;
    gamma(3, 3, 3) = -0.5;
    return gamma;
}

MetricTensor OriMetric::metric_derivative(const SpacetimePoint& x, int c) const
{
    require_dimension(x);
    if (c < 0 || c > 3) throw ArgumentError("ori: derivative index out of range");
    const Partials d = partials(x);
    MetricTensor dg = MetricTensor::Zero(4, 4);
    const double values[4] = {-1.0, d.fx, d.fy, d.fz};
    dg(3, 3) = values[c];
    return dg;
}

Vec OriMetric::contract(const SpacetimePoint& x, const Vec& p, const Vec& q) const
{
    const Partials d = partials(x);
    const double t = x[0];
    Vec out(4);
    const double p3q3 = p[3] * q[3];
    out[0] = 0.5 * (p[0] * q[3] + p[3] * q[0]) - 0.5 * d.fx * (p[1] * q[3] + p[3] * q[1])
             - 0.5 * d.fy * (p[2] * q[3] + p[3] * q[2]) + 0.5 * (t - d.f - d.fz) * p3q3;
    out[1] = -0.5 * d.fx * p3q3;
    out[2] = -0.5 * d.fy * p3q3;
    out[3] = -0.5 * p3q3;
    return out;
}

// ---------------------------------------------------------------------------

MetricTensor evaluate_metric(const MetricModel& model, const SpacetimePoint& point)
{
    return model.metric(point);
}

ChristoffelTensor evaluate_christoffels(const MetricModel& model, const SpacetimePoint& point)
{
    return model.christoffels(point);
}

ChristoffelTensor christoffels_by_differences(const MetricModel& model, const SpacetimePoint& point, double h)
{
    if (!(h > 0.0)) throw ArgumentError("finite-difference step must be positive");
    const int n = model.dimension();
    const MetricTensor g = model.metric(point);
    const Eigen::MatrixXd gd = g;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gd);
    if (!lu.isInvertible() || std::abs(lu.determinant()) < 1e-14)
        throw DegeneracyError("metric is singular at the probe point");
    const Eigen::MatrixXd ginv = lu.inverse();

    // dg[c](a, b) = d_c g_ab
    std::vector<Eigen::MatrixXd> dg(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) {
        SpacetimePoint xp = point, xm = point;
        xp[c] += h;
        xm[c] -= h;
        dg[static_cast<std::size_t>(c)] = (Eigen::MatrixXd(model.metric(xp)) - Eigen::MatrixXd(model.metric(xm))) / (2.0 * h);
    }

    ChristoffelTensor gamma(n);
    for (int c = 0; c < n; ++c) {
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b) {
                double sum = 0.0;
                for (int d = 0; d < n; ++d) {
                    const double lowered = dg[static_cast<std::size_t>(a)](d, b) + dg[static_cast<std::size_t>(b)](d, a)
                                           - dg[static_cast<std::size_t>(d)](a, b);
                    sum += ginv(c, d) * lowered;
                }
                gamma(c, a, b) = 0.5 * sum;
            }
        }
    }
    return gamma;
}

double verify_christoffels_numerically(const MetricModel& model, const SpacetimePoint& point, double h)
{
    return model.christoffels(point).max_abs_difference(christoffels_by_differences(model, point, h));
}

namespace {

// Fourth-order second derivative along one axis.
double second_difference(const std::function<double(double, double, double)>& f, double x, double y, double z,
                         int axis, double h)
{
    auto at = [&](double s) { return axis == 0 ? f(x + s, y, z) : f(x, y + s, z); };
    return (-at(2 * h) + 16.0 * at(h) - 30.0 * at(0.0) + 16.0 * at(-h) - at(-2 * h)) / (12.0 * h * h);
}

}  // namespace

HarmonicCheck probe_harmonicity(const HarmonicProfile& profile, double half_width, int points_per_axis, double h)
{
    HarmonicCheck check;
    check.worst_point = SpacetimePoint::Zero(3);
    const int m = std::max(points_per_axis, 2);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            for (int k = 0; k < m; ++k) {
                const double x = -half_width + 2.0 * half_width * i / (m - 1);
                const double y = -half_width + 2.0 * half_width * j / (m - 1);
                const double z = -half_width + 2.0 * half_width * k / (m - 1);
                const double lap = second_difference(profile.f, x, y, z, 0, h) + second_difference(profile.f, x, y, z, 1, h);
                const double scale = std::max(1.0, std::abs(profile.f(x, y, z)));
                const double residual = std::abs(lap) / scale;
                if (residual > check.max_laplacian) {
                    check.max_laplacian = residual;
                    check.worst_point = SpacetimePoint(3);
                    check.worst_point << x, y, z;
                }
            }
        }
    }
    return check;
}

void require_harmonic(const HarmonicProfile& profile, double half_width, double tolerance)
{
    const HarmonicCheck check = probe_harmonicity(profile, half_width, 9, 1e-2);
    if (check.max_laplacian > tolerance) {
        std::ostringstream os;
        os << "ori profile '" << profile.name << "' is not harmonic: |f_xx + f_yy| = " << check.max_laplacian
           << " at (x, y, z) = (" << check.worst_point[0] << ", " << check.worst_point[1] << ", "
           << check.worst_point[2] << ")";
        throw ConfigError(os.str());
    }
}

int negative_eigenvalue_count(const MetricTensor& g)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(Eigen::MatrixXd(g), Eigen::EigenvaluesOnly);
    int count = 0;
    for (int i = 0; i < solver.eigenvalues().size(); ++i) {
        if (solver.eigenvalues()[i] < 0.0) ++count;
    }
    return count;
}

}  // namespace relstring
