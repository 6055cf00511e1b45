#include "relstring/lightcone.hpp"

#include <algorithm>
#include <cmath>

#include "relstring/errors.hpp"

namespace relstring {

LightconeSource wave_map_source(const MetricModel& model)
{
    return [&model](const Vec& u, const Vec& p, const Vec& q, double, double) -> Vec {
        return -model.contract(u, p, q);
    };
}

namespace {

NodeState midpoint(const NodeState& a, const NodeState& b)
{
    return {0.5 * (a.u + b.u), 0.5 * (a.p + b.p), 0.5 * (a.q + b.q)};
}

}  // namespace

NodeState step_characteristic_rectangle(const LightconeSource& source, const NodeState& west, const NodeState& east,
                                        double h, double t, double vartheta)
{
    const double tn = t + h;
    // predictor: corner sources
    NodeState pred;
    pred.p = west.p + h * source(west.u, west.p, west.q, t, vartheta - h);
    pred.q = east.q + h * source(east.u, east.p, east.q, t, vartheta + h);
    pred.u = 0.5 * (west.u + east.u) + (0.5 * h) * (west.q + east.p);

    // corrector: sources at the predicted edge midpoints
    const NodeState mw = midpoint(west, pred);
    const NodeState me = midpoint(east, pred);
    NodeState out;
    out.p = west.p + h * source(mw.u, mw.p, mw.q, 0.5 * (t + tn), vartheta - 0.5 * h);
    out.q = east.q + h * source(me.u, me.p, me.q, 0.5 * (t + tn), vartheta + 0.5 * h);
    out.u = 0.5 * (west.u + east.u) + (0.25 * h) * (west.q + out.q + east.p + out.p);
    return out;
}

NodeState step_characteristic_rectangle(const MetricModel& model, const NodeState& west, const NodeState& east,
                                        double h)
{
    return step_characteristic_rectangle(wave_map_source(model), west, east, h, 0.0, 0.0);
}

const LightconeLevel* LightconeField::find(std::size_t level) const
{
    for (const LightconeLevel& l : levels)
        if (l.level == level) return &l;
    return nullptr;
}

// ---------------------------------------------------------------------------

DataSplines DataSplines::build(const StringInitialData& data)
{
    DataSplines s;
    const int dim = data.dim();
    const bool periodic = data.domain.is_periodic();
    const Extension ext = periodic ? Extension::periodic : Extension::clamp;
    const std::size_t n = data.size();
    for (int c = 0; c < dim; ++c) {
        std::vector<double> phi(n), phi_t(n), psi(n);
        for (std::size_t i = 0; i < n; ++i) {
            phi[i] = data.phi[i](c);
            phi_t[i] = data.phi_theta[i](c);
            psi[i] = data.psi[i](c);
        }
        const double increment = (periodic && data.domain.winding.size() == dim) ? data.domain.winding(c) : 0.0;
        s.phi.emplace_back(data.theta.front(), data.spacing(), phi, ext, increment, phi_t);
        s.phi_theta.emplace_back(data.theta.front(), data.spacing(), std::move(phi_t), ext);
        s.psi.emplace_back(data.theta.front(), data.spacing(), std::move(psi), ext);
    }
    return s;
}

Vec DataSplines::phi_at(double theta) const
{
    Vec v(static_cast<int>(phi.size()));
    for (std::size_t c = 0; c < phi.size(); ++c) v(static_cast<int>(c)) = phi[c](theta);
    return v;
}

Vec DataSplines::phi_theta_at(double theta) const
{
    Vec v(static_cast<int>(phi_theta.size()));
    for (std::size_t c = 0; c < phi_theta.size(); ++c) v(static_cast<int>(c)) = phi_theta[c](theta);
    return v;
}

Vec DataSplines::psi_at(double theta) const
{
    Vec v(static_cast<int>(psi.size()));
    for (std::size_t c = 0; c < psi.size(); ++c) v(static_cast<int>(c)) = psi[c](theta);
    return v;
}

LightconeLevel initialize_lightcone(const MetricModel& model, const StringInitialData& data, const CoordinateMap& map,
                                    const TransportGrid& grid, const WorldsheetTolerances& tol)
{
    if (data.dim() != model.dimension()) throw ArgumentError("initial data and metric differ in dimension");
    const DataSplines splines = DataSplines::build(data);
    const bool periodic = data.domain.is_periodic();
    const double slack = 1e-9 * std::max(1.0, std::abs(data.theta.back() - data.theta.front()));

    LightconeLevel level;
    level.level = 0;
    level.t = 0.0;
    level.first = 0;
    level.nodes.reserve(grid.nodes);
    for (std::size_t j = 0; j < grid.nodes; ++j) {
        const double theta = map.theta0_inverse(grid.vartheta(j));
        if (!periodic && (theta < data.theta.front() - slack || theta > data.theta.back() + slack))
            throw WindowError("initial lattice node maps outside the data window");
        level.nodes.push_back(initial_node(model, splines, map, grid.vartheta(j), tol));
    }
    return level;
}

NodeState initial_node(const MetricModel& model, const DataSplines& splines, const CoordinateMap& map,
                       double vartheta, const WorldsheetTolerances& tol)
{
    const double theta = map.theta0_inverse(vartheta);
    NodeState s;
    s.u = splines.phi_at(theta);
    const Vec w = splines.phi_theta_at(theta);
    const Vec v = splines.psi_at(theta);
    const CharSpeeds speeds = char_speeds(induced_metric(model.metric(s.u), v, w), tol);
    s.p = v + speeds.minus * w;
    s.q = v + speeds.plus * w;
    return s;
}

double relative_null_residual(const MetricTensor& g, const Vec& a)
{
    const double value = std::abs(a.dot(g * a));
    const Vec aa = a.cwiseAbs();
    const double scale = aa.dot(g.cwiseAbs() * aa);
    return scale > 0.0 ? value / scale : 0.0;
}

namespace {

void check_finite(const NodeState& s, double limit, double t, double vartheta)
{
    auto scan = [&](const Vec& v, const char* name) {
        for (int c = 0; c < v.size(); ++c) {
            const double x = v(c);
            if (!std::isfinite(x) || std::abs(x) > limit) {
                BlowUpReport r;
                r.t = t;
                r.vartheta = vartheta;
                r.component = c;
                r.quantity = name;
                r.value = x;
                throw BlowUpError(r);
            }
        }
    };
    scan(s.u, "u");
    scan(s.p, "p");
    scan(s.q, "q");
}

}  // namespace

LightconeSolution solve_lightcone(const LightconeSource& source, LightconeLevel initial, const TransportGrid& grid,
                                  const Vec& winding, const LightconeOptions& options, const MetricModel* model)
{
    if (initial.nodes.size() != grid.nodes || initial.first != 0 || grid.nodes == 0)
        throw ArgumentError("initial level does not cover the lattice");
    const std::size_t n = grid.nodes;
    if (!grid.periodic && 2 * grid.levels >= n)
        throw WindowError("t_max exceeds the triangle of determinacy of the line window");
    const int dim = static_cast<int>(initial.nodes.front().u.size());
    Vec shift = Vec::Zero(dim);
    if (grid.periodic && winding.size() == dim) shift = winding;
    const std::size_t stride = std::max<std::size_t>(1, options.store_stride);

    LightconeSolution sol;
    sol.field.grid = grid;
    sol.field.dim = dim;
    sol.field.winding = shift;
    sol.monitors.null_by_level.reserve(grid.levels + 1);

    auto monitor = [&](const LightconeLevel& lv) {
        double level_max = 0.0;
        for (std::size_t k = 0; k < lv.nodes.size(); ++k) {
            const NodeState& s = lv.nodes[k];
            const double vartheta = grid.vartheta(lv.first + k);
            check_finite(s, options.blowup_magnitude, lv.t, vartheta);
            if (model == nullptr) continue;
            const MetricTensor g = model->metric(s.u);
            const double np = std::abs(s.p.dot(g * s.p));
            const double nq = std::abs(s.q.dot(g * s.q));
            sol.monitors.null_p = std::max(sol.monitors.null_p, np);
            sol.monitors.null_q = std::max(sol.monitors.null_q, nq);
            level_max = std::max({level_max, np, nq});
            const double rel = std::max(relative_null_residual(g, s.p), relative_null_residual(g, s.q));
            sol.monitors.null_relative = std::max(sol.monitors.null_relative, rel);
            if (rel > options.null_ceiling && !sol.monitors.ceiling_crossed) {
                sol.monitors.ceiling_crossed = true;
                sol.monitors.ceiling_t = lv.t;
                sol.monitors.ceiling_vartheta = vartheta;
            }
        }
        sol.monitors.null_by_level.push_back(level_max);

        // (q - p)/2 against central differences of u along the level
        const std::size_t m = lv.nodes.size();
        for (std::size_t k = 0; k < m; ++k) {
            Vec left, right;
            if (grid.periodic) {
                left = k == 0 ? Vec(lv.nodes[m - 1].u - shift) : lv.nodes[k - 1].u;
                right = k + 1 == m ? Vec(lv.nodes[0].u + shift) : lv.nodes[k + 1].u;
            } else {
                if (k == 0 || k + 1 == m) continue;
                left = lv.nodes[k - 1].u;
                right = lv.nodes[k + 1].u;
            }
            const Vec gap = 0.5 * (lv.nodes[k].q - lv.nodes[k].p) - (right - left) / (2.0 * grid.h);
            sol.monitors.derivative_gap = std::max(sol.monitors.derivative_gap, gap.cwiseAbs().maxCoeff());
        }
    };

    monitor(initial);
    LightconeLevel current = std::move(initial);
    sol.field.levels.push_back(current);

    for (std::size_t level = 1; level <= grid.levels; ++level) {
        LightconeLevel next;
        next.level = level;
        next.t = grid.t(level);
        const double t = grid.t(level - 1);
        if (grid.periodic) {
            next.first = 0;
            next.nodes.resize(n);
            for (std::size_t j = 0; j < n; ++j) {
                NodeState west = current.nodes[(j + n - 1) % n];
                NodeState east = current.nodes[(j + 1) % n];
                if (j == 0) west.u -= shift;
                if (j + 1 == n) east.u += shift;
                next.nodes[j] = step_characteristic_rectangle(source, west, east, grid.h, t, grid.vartheta(j));
            }
        } else {
            next.first = current.first + 1;
            const std::size_t count = current.nodes.size() - 2;
            next.nodes.resize(count);
            for (std::size_t k = 0; k < count; ++k) {
                const std::size_t j = next.first + k;
                next.nodes[k] = step_characteristic_rectangle(source, current.at(j - 1), current.at(j + 1), grid.h, t,
                                                              grid.vartheta(j));
            }
        }
        monitor(next);
        current = std::move(next);
        if (level % stride == 0 || level == grid.levels) sol.field.levels.push_back(current);
    }
    if (options.check_null && sol.monitors.ceiling_crossed)
        throw ConsistencyError("relative null residual passed " + std::to_string(options.null_ceiling) + " at t = "
                               + std::to_string(sol.monitors.ceiling_t) + ", vartheta = "
                               + std::to_string(sol.monitors.ceiling_vartheta));
    return sol;
}

LightconeSolution solve_lightcone(const MetricModel& model, const StringInitialData& data, const CoordinateMap& map,
                                  const TransportGrid& grid, const LightconeOptions& options)
{
    LightconeLevel initial = initialize_lightcone(model, data, map, grid);
    return solve_lightcone(wave_map_source(model), std::move(initial), grid, data.domain.winding, options, &model);
}

}  // namespace relstring
