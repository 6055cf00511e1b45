#include "relstring/worldsheet.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "relstring/errors.hpp"

namespace relstring {

double InducedMetric::scale() const
{
    const double m = std::max({std::abs(g00), std::abs(g01), std::abs(g11)});
    return m * m;
}

InducedMetric induced_metric(const MetricTensor& g, const Vec& v, const Vec& w)
{
    InducedMetric im;
    const Vec gv = g * v;
    const Vec gw = g * w;
    im.g00 = v.dot(gv);
    im.g01 = w.dot(gv);
    im.g11 = w.dot(gw);
    im.delta = im.g00 * im.g11 - im.g01 * im.g01;
    return im;
}

InducedMetric induced_metric(const MetricModel& model, const StateVector& state)
{
    const int n = model.dimension();
    if (state.u.size() != n || state.v.size() != n || state.w.size() != n)
        throw ArgumentError("state vector dimensions do not match the metric model");
    return induced_metric(model.metric(state.u), state.v, state.w);
}

CharSpeeds char_speeds(const InducedMetric& im, const WorldsheetTolerances& tol)
{
    if (std::abs(im.g11) < tol.g11) throw DegeneracyError("g11 vanishes: characteristic speeds are unbounded");
    if (!im.timelike(tol.timelike)) throw CausalityError("motion not time-like (Delta >= 0)");
    const double root = std::sqrt(im.g01 * im.g01 - im.g00 * im.g11);
    // Cancellation-free pair of roots; labels follow lambda_-+ = (-g01 -+ root) / g11.
    CharSpeeds s;
    if (im.g01 >= 0.0) {
        const double q = -(im.g01 + root);
        s.minus = q / im.g11;
        s.plus = im.g00 / q;
    } else {
        const double q = -im.g01 + root;
        s.plus = q / im.g11;
        s.minus = im.g00 / q;
    }
    return s;
}

Eigen::MatrixXd system_matrix(const InducedMetric& im, int dim, const WorldsheetTolerances& tol)
{
    if (dim < 1) throw ArgumentError("system_matrix: dimension must be positive");
    if (std::abs(im.g11) < tol.g11) throw DegeneracyError("g11 vanishes: system matrix undefined");
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(dim, dim);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3 * dim, 3 * dim);
    A.block(dim, dim, dim, dim) = -2.0 * im.g01 / im.g11 * I;
    A.block(dim, 2 * dim, dim, dim) = im.g00 / im.g11 * I;
    A.block(2 * dim, dim, dim, dim) = -I;
    return A;
}

Eigenbasis eigenvectors(const CharSpeeds& speeds, int dim)
{
    Eigenbasis basis;
    const int size = 3 * dim;
    auto push = [&](double value, Eigen::VectorXd r, Eigen::RowVectorXd l) {
        basis.values.push_back(value);
        basis.right.push_back(std::move(r));
        basis.left.push_back(std::move(l));
    };
    for (int i = 0; i < dim; ++i) {
        Eigen::VectorXd r = Eigen::VectorXd::Zero(size);
        r[i] = 1.0;
        push(0.0, r, r.transpose());
    }
    // family of lambda_-: r = (0, -lambda_- e, e), l = (0, e, lambda_+ e); and symmetrically for lambda_+
    for (const auto& [own, other] : {std::pair{speeds.minus, speeds.plus}, std::pair{speeds.plus, speeds.minus}}) {
        for (int i = 0; i < dim; ++i) {
            Eigen::VectorXd r = Eigen::VectorXd::Zero(size);
            r[dim + i] = -own;
            r[2 * dim + i] = 1.0;
            Eigen::RowVectorXd l = Eigen::RowVectorXd::Zero(size);
            l[dim + i] = 1.0;
            l[2 * dim + i] = other;
            push(own, r, l);
        }
    }
    return basis;
}

SpeedGradients speed_gradients(const MetricModel& model, const StateVector& state, const WorldsheetTolerances& tol)
{
    const int n = model.dimension();
    const MetricTensor g = model.metric(state.u);
    const InducedMetric im = induced_metric(g, state.v, state.w);
    const CharSpeeds s = char_speeds(im, tol);
    const double root = std::sqrt(im.g01 * im.g01 - im.g00 * im.g11);
    if (!(root > tol.timelike * std::sqrt(im.scale()))) throw DegeneracyError("discriminant vanishes");

    const Vec gv = g * state.v;
    const Vec gw = g * state.w;
    const Vec p = state.v + s.minus * state.w;
    const Vec q = state.v + s.plus * state.w;

    SpeedGradients out;
    out.minus.dv = (s.minus * gw + gv) / root;
    out.minus.dw = (s.minus * s.minus * gw + s.minus * gv) / root;
    out.plus.dv = -(s.plus * gw + gv) / root;
    out.plus.dw = -(s.plus * s.plus * gw + s.plus * gv) / root;
    out.minus.du = Vec(n);
    out.plus.du = Vec(n);
    for (int c = 0; c < n; ++c) {
        const MetricTensor dg = model.metric_derivative(state.u, c);
        out.minus.du[c] = p.dot(dg * p) / (2.0 * root);
        out.plus.du[c] = -q.dot(dg * q) / (2.0 * root);
    }
    return out;
}

SpeedGradients speed_gradients_fd(const MetricModel& model, const StateVector& state, double h,
                                  const WorldsheetTolerances& tol)
{
    const int n = model.dimension();
    auto speeds_at = [&](const StateVector& s) { return char_speeds(induced_metric(model, s), tol); };
    SpeedGradients out;
    out.minus = {Vec(n), Vec(n), Vec(n)};
    out.plus = {Vec(n), Vec(n), Vec(n)};
    for (int part = 0; part < 3; ++part) {
        for (int c = 0; c < n; ++c) {
            StateVector up = state, down = state;
            Vec& xp = part == 0 ? up.u : part == 1 ? up.v : up.w;
            Vec& xm = part == 0 ? down.u : part == 1 ? down.v : down.w;
            xp[c] += h;
            xm[c] -= h;
            const CharSpeeds sp = speeds_at(up);
            const CharSpeeds sm = speeds_at(down);
            Vec& gm = part == 0 ? out.minus.du : part == 1 ? out.minus.dv : out.minus.dw;
            Vec& gp = part == 0 ? out.plus.du : part == 1 ? out.plus.dv : out.plus.dw;
            gm[c] = (sp.minus - sm.minus) / (2.0 * h);
            gp[c] = (sp.plus - sm.plus) / (2.0 * h);
        }
    }
    return out;
}

DegeneracyResidual degeneracy_residual(const SpeedGradients& grads, const CharSpeeds& speeds)
{
    // r_{n+2+C} = (0, -lambda_- e_C, e_C) and r_{2n+3+C} = (0, -lambda_+ e_C, e_C)
    DegeneracyResidual res;
    const int n = static_cast<int>(grads.minus.dv.size());
    for (int c = 0; c < n; ++c) {
        res.minus = std::max(res.minus, std::abs(-speeds.minus * grads.minus.dv[c] + grads.minus.dw[c]));
        res.plus = std::max(res.plus, std::abs(-speeds.plus * grads.plus.dv[c] + grads.plus.dw[c]));
    }
    return res;
}

DegeneracyResidual linear_degeneracy_residual(const MetricModel& model, const StateVector& state,
                                              const WorldsheetTolerances& tol)
{
    return degeneracy_residual(speed_gradients(model, state, tol), char_speeds(induced_metric(model, state), tol));
}

DegeneracyResidual linear_degeneracy_residual_fd(const MetricModel& model, const StateVector& state, double h,
                                                 const WorldsheetTolerances& tol)
{
    return degeneracy_residual(speed_gradients_fd(model, state, h, tol),
                               char_speeds(induced_metric(model, state), tol));
}

NullPair null_pair(const StateVector& state, const CharSpeeds& speeds)
{
    return {state.v + speeds.minus * state.w, state.v + speeds.plus * state.w};
}

std::pair<double, double> null_residuals(const MetricModel& model, const Vec& u, const NullPair& pair)
{
    const MetricTensor g = model.metric(u);
    return {std::abs(pair.p.dot(g * pair.p)), std::abs(pair.q.dot(g * pair.q))};
}

// ---------------------------------------------------------------------------

std::vector<double> derivative4(std::span<const double> values, double spacing, bool periodic,
                                double period_increment)
{
    const auto n = static_cast<std::ptrdiff_t>(values.size());
    std::vector<double> out(values.size());
    if (periodic) {
        if (n < 1) return out;
        auto at = [&](std::ptrdiff_t i) {
            std::ptrdiff_t wraps = i >= 0 ? i / n : -((-i + n - 1) / n);
            return values[static_cast<std::size_t>(i - wraps * n)] + static_cast<double>(wraps) * period_increment;
        };
        for (std::ptrdiff_t i = 0; i < n; ++i)
            out[static_cast<std::size_t>(i)] = (-at(i + 2) + 8.0 * at(i + 1) - 8.0 * at(i - 1) + at(i - 2)) / (12.0 * spacing);
        return out;
    }
    if (n < 5) throw ArgumentError("line grids need at least 5 nodes for fourth-order differences");
    auto f = [&](std::ptrdiff_t i) { return values[static_cast<std::size_t>(i)]; };
    const double s = 12.0 * spacing;
    out[0] = (-25.0 * f(0) + 48.0 * f(1) - 36.0 * f(2) + 16.0 * f(3) - 3.0 * f(4)) / s;
    out[1] = (-3.0 * f(0) - 10.0 * f(1) + 18.0 * f(2) - 6.0 * f(3) + f(4)) / s;
    for (std::ptrdiff_t i = 2; i < n - 2; ++i)
        out[static_cast<std::size_t>(i)] = (-f(i + 2) + 8.0 * f(i + 1) - 8.0 * f(i - 1) + f(i - 2)) / s;
    out[static_cast<std::size_t>(n - 2)] =
        (3.0 * f(n - 1) + 10.0 * f(n - 2) - 18.0 * f(n - 3) + 6.0 * f(n - 4) - f(n - 5)) / s;
    out[static_cast<std::size_t>(n - 1)] =
        (25.0 * f(n - 1) - 48.0 * f(n - 2) + 36.0 * f(n - 3) - 16.0 * f(n - 4) + 3.0 * f(n - 5)) / s;
    return out;
}

namespace {

void require_uniform_grid(const std::vector<double>& theta)
{
    if (theta.size() < 2) throw ArgumentError("initial data needs at least two nodes");
    const double h = theta[1] - theta[0];
    if (!(h > 0.0)) throw ArgumentError("theta grid must be strictly increasing");
    for (std::size_t i = 1; i < theta.size(); ++i) {
        const double step = theta[i] - theta[i - 1];
        if (!(step > 0.0)) throw ArgumentError("theta grid must be strictly increasing");
        if (std::abs(step - h) > 1e-9 * std::max(1.0, std::abs(h)))
            throw ArgumentError("theta grid must be uniformly spaced");
    }
}

}  // namespace

StringInitialData build_initial_data(const MetricModel& model, std::vector<double> theta, std::vector<Vec> phi,
                                     std::vector<Vec> psi, Domain domain, const WorldsheetTolerances& tol)
{
    const int n = model.dimension();
    const std::size_t count = theta.size();
    if (phi.size() != count || psi.size() != count) throw ArgumentError("phi, psi and theta sizes differ");
    require_uniform_grid(theta);
    for (std::size_t i = 0; i < count; ++i) {
        if (phi[i].size() != n || psi[i].size() != n) throw ArgumentError("initial data dimension mismatch");
    }
    const double h = theta[1] - theta[0];
    if (domain.is_periodic()) {
        if (std::abs(h * static_cast<double>(count) - domain.length) > 1e-9 * domain.length)
            throw ArgumentError("periodic grid must cover exactly one period without repeating the endpoint");
        if (domain.winding.size() == 0) domain.winding = Vec::Zero(n);
        if (domain.winding.size() != n) throw ArgumentError("winding vector dimension mismatch");
    }

    StringInitialData data;
    data.theta = std::move(theta);
    data.phi = std::move(phi);
    data.psi = std::move(psi);
    data.domain = std::move(domain);

    data.phi_theta.assign(count, Vec::Zero(n));
    std::vector<double> column(count);
    for (int c = 0; c < n; ++c) {
        for (std::size_t i = 0; i < count; ++i) column[i] = data.phi[i][c];
        const double increment = data.domain.is_periodic() ? data.domain.winding[c] : 0.0;
        const auto d = derivative4(column, h, data.domain.is_periodic(), increment);
        for (std::size_t i = 0; i < count; ++i) data.phi_theta[i][c] = d[i];
    }

    data.induced.resize(count);
    data.lambda_minus.resize(count);
    data.lambda_plus.resize(count);
    data.lagrangian.resize(count);
    data.p0.resize(count);
    data.q0.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const InducedMetric im = induced_metric(model.metric(data.phi[i]), data.psi[i], data.phi_theta[i]);
        data.induced[i] = im;
        data.lagrangian[i] = im.delta;
        if (!im.timelike(tol.timelike)) {
            std::ostringstream os;
            os << "initial data not time-like at node " << i << " (theta=" << data.theta[i]
               << ", Lagrangian density " << im.delta << ")";
            throw CausalityError(os.str(), static_cast<int>(i));
        }
        if (std::abs(im.g11) < tol.g11) {
            std::ostringstream os;
            os << "g11 vanishes at node " << i << " (theta=" << data.theta[i] << ")";
            throw DegeneracyError(os.str());
        }
        const CharSpeeds s = char_speeds(im, tol);
        data.lambda_minus[i] = s.minus;
        data.lambda_plus[i] = s.plus;
        data.p0[i] = data.psi[i] + s.minus * data.phi_theta[i];
        data.q0[i] = data.psi[i] + s.plus * data.phi_theta[i];
    }
    return data;
}

PhysicalityReport check_speed_ordering(std::span<const double> lambda_minus, std::span<const double> lambda_plus,
                                       bool periodic)
{
    if (lambda_minus.size() != lambda_plus.size()) throw ArgumentError("speed profiles differ in length");
    PhysicalityReport report;
    report.periodic_sweep = periodic;
    const std::size_t n = lambda_minus.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!(lambda_minus[i] < lambda_plus[i])) {
            report.strict_ordering = false;
            report.ordering_violation = static_cast<int>(i);
            break;
        }
    }
    if (n == 0) return report;

    const std::size_t sweep = periodic ? 2 * n : n;
    double running_max = lambda_minus[0];
    std::size_t argmax = 0;
    for (std::size_t k = 1; k < sweep; ++k) {
        const std::size_t node = k % n;
        if (!(running_max < lambda_plus[node])) {
            report.separated = false;
            report.separation_violation = std::pair{static_cast<int>(argmax), static_cast<int>(node)};
            break;
        }
        if (lambda_minus[node] > running_max) {
            running_max = lambda_minus[node];
            argmax = node;
        }
    }
    return report;
}

PhysicalityReport check_physicality(const StringInitialData& data)
{
    return check_speed_ordering(data.lambda_minus, data.lambda_plus, data.domain.is_periodic());
}

bool smallness_flag(const StringInitialData& data, double epsilon)
{
    const std::size_t count = data.size();
    const int n = data.dim();
    const double h = data.spacing();
    for (int c = 0; c < n; ++c) {
        double phi_norm = 0.0;
        double psi_norm = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            double weight = h;
            if (!data.domain.is_periodic() && (i == 0 || i + 1 == count)) weight = 0.5 * h;
            phi_norm += weight * std::abs(data.phi_theta[i][c]);
            psi_norm += weight * std::abs(data.psi[i][c]);
        }
        if (phi_norm > epsilon || psi_norm > epsilon) return false;
    }
    return true;
}

}  // namespace relstring
