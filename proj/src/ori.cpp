#include "relstring/ori.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "relstring/errors.hpp"
#include "relstring/interpolation.hpp"

namespace relstring {

namespace {

constexpr double kSnap = 1e-9;  // fraction of a table cell treated as "on the node"

}  // namespace

OriClosedForm OriClosedForm::periodic(Fn phi, Fn p0, Fn q0, double vartheta0, double period, std::size_t table_nodes,
                                      const OriOptions& options)
{
    if (!(period > 0.0) || table_nodes < 4) throw ArgumentError("periodic closed form needs a period and >= 4 cells");
    OriClosedForm cf;
    cf.phi_ = std::move(phi);
    cf.p0_ = std::move(p0);
    cf.q0_ = std::move(q0);
    cf.periodic_ = true;
    cf.lo_ = vartheta0;
    cf.hi_ = vartheta0 + period;
    cf.period_ = period;
    cf.cells_ = table_nodes;
    cf.step_ = period / static_cast<double>(table_nodes);
    cf.options_ = options;
    cf.build_tables();
    return cf;
}

OriClosedForm OriClosedForm::line(Fn phi, Fn p0, Fn q0, double lo, double hi, std::size_t table_intervals,
                                  const OriOptions& options)
{
    if (!(hi > lo) || table_intervals < 2) throw ArgumentError("line closed form needs lo < hi and >= 2 cells");
    OriClosedForm cf;
    cf.phi_ = std::move(phi);
    cf.p0_ = std::move(p0);
    cf.q0_ = std::move(q0);
    cf.periodic_ = false;
    cf.lo_ = lo;
    cf.hi_ = hi;
    cf.cells_ = table_intervals;
    cf.step_ = (hi - lo) / static_cast<double>(table_intervals);
    cf.options_ = options;
    cf.build_tables();
    return cf;
}

std::pair<OriClosedForm::Fn, OriClosedForm::Fn> OriClosedForm::null_data(Fn phi_prime, Fn psi)
{
    Fn p0 = [phi_prime, psi](double s) { return psi(s) - phi_prime(s); };
    Fn q0 = [phi_prime, psi](double s) { return psi(s) + phi_prime(s); };
    return {p0, q0};
}

OriClosedForm OriClosedForm::from_initial_data(std::shared_ptr<const MetricModel> model, const StringInitialData& data,
                                               const CoordinateMap& map, std::size_t table_nodes,
                                               const OriOptions& options)
{
    if (!model || model->dimension() != 4 || data.dim() != 4)
        throw ArgumentError("the closed form needs four-dimensional Ori data");
    if (data.domain.is_periodic() && data.domain.winding.size() == 4 && data.domain.winding(3) != 0.0)
        throw ConfigError("the closed form needs non-winding z data on periodic domains");
    auto splines = std::make_shared<const DataSplines>(DataSplines::build(data));
    auto shared_map = std::make_shared<const CoordinateMap>(map);

    Fn phi = [splines, shared_map](double s) {
        return splines->phi[3](shared_map->theta0_inverse(s));
    };
    Fn p0 = [model, splines, shared_map](double s) { return initial_node(*model, *splines, *shared_map, s).p(3); };
    Fn q0 = [model, splines, shared_map](double s) { return initial_node(*model, *splines, *shared_map, s).q(3); };
    if (map.periodic())
        return periodic(phi, p0, q0, map.vartheta_front(), map.vartheta_period(), table_nodes, options);
    return line(phi, p0, q0, map.vartheta_front(), map.vartheta_back(), table_nodes, options);
}

// ---------------------------------------------------------------------------

void OriClosedForm::build_tables()
{
    nodes_.resize(cells_ + 1);
    for (std::size_t k = 0; k <= cells_; ++k) {
        const double s = lo_ + step_ * static_cast<double>(k);
        NodeValues v;
        v.phi = phi_(s);
        v.w = std::exp(-0.5 * v.phi);
        v.p0 = p0_(s);
        v.q0 = q0_(s);
        nodes_[k] = v;
    }
    const double cell_tol = options_.quad_tol / static_cast<double>(cells_);
    for (Route route : {Route::psi, Route::xi, Route::eta}) {
        Table& tab = route == Route::psi ? psi_table_ : route == Route::xi ? p_table_ : q_table_;
        tab.cumulative.assign(cells_ + 1, 0.0);
        tab.integrand.resize(cells_ + 1);
        auto f = [this, route](double s) { return integrand(route, s); };
        for (std::size_t k = 0; k <= cells_; ++k) {
            const NodeValues& v = nodes_[k];
            const double g = route == Route::psi ? 0.5 * (v.p0 + v.q0) : route == Route::xi ? v.p0 : v.q0;
            tab.integrand[k] = g * v.w;
        }
        for (std::size_t k = 0; k < cells_; ++k) {
            const double a = lo_ + step_ * static_cast<double>(k);
            tab.cumulative[k + 1] = tab.cumulative[k] + adaptive_simpson(f, a, a + step_, cell_tol);
        }
    }
}

const OriClosedForm::Table& OriClosedForm::table(Route route) const
{
    return route == Route::psi ? psi_table_ : route == Route::xi ? p_table_ : q_table_;
}

double OriClosedForm::weight(double s) const
{
    return std::exp(-0.5 * phi_(s));
}

double OriClosedForm::integrand(Route route, double s) const
{
    const double w = weight(s);
    switch (route) {
    case Route::psi: return 0.5 * (p0_(s) + q0_(s)) * w;
    case Route::xi: return p0_(s) * w;
    case Route::eta: return q0_(s) * w;
    }
    return 0.0;
}

std::optional<std::size_t> OriClosedForm::node_of(double s) const
{
    double x = (s - lo_) / step_;
    if (periodic_) {
        const double n = static_cast<double>(cells_);
        x -= std::floor(x / n) * n;
    }
    const double k = std::round(x);
    if (std::abs(x - k) > kSnap) return std::nullopt;
    auto i = static_cast<std::ptrdiff_t>(k);
    if (periodic_) {
        const auto n = static_cast<std::ptrdiff_t>(cells_);
        i = ((i % n) + n) % n;
    } else if (i < 0 || i > static_cast<std::ptrdiff_t>(cells_)) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(i);
}

OriClosedForm::NodeValues OriClosedForm::values_at(double s) const
{
    if (auto k = node_of(s)) return nodes_[*k];
    NodeValues v;
    v.phi = phi_(s);
    v.w = std::exp(-0.5 * v.phi);
    v.p0 = p0_(s);
    v.q0 = q0_(s);
    return v;
}

double OriClosedForm::antiderivative(Route route, double s, bool fast) const
{
    const Table& tab = table(route);
    double offset = 0.0;
    double x = (s - lo_) / step_;
    if (periodic_) {
        const double n = static_cast<double>(cells_);
        const double wraps = std::floor(x / n);
        x -= wraps * n;
        offset = wraps * tab.cumulative[cells_];
    } else {
        const double slack = kSnap;
        if (x < -slack || x > static_cast<double>(cells_) + slack)
            throw WindowError("closed-form integral leaves the data window");
        x = std::clamp(x, 0.0, static_cast<double>(cells_));
    }
    auto k = static_cast<std::size_t>(std::floor(x));
    if (k >= cells_) k = cells_ - 1;
    const double frac = x - static_cast<double>(k);
    if (frac <= kSnap) return offset + tab.cumulative[k];
    if (frac >= 1.0 - kSnap) return offset + tab.cumulative[k + 1];
    if (fast) {
        const double s2 = frac * frac, s3 = s2 * frac;
        return offset + (2 * s3 - 3 * s2 + 1) * tab.cumulative[k] + (s3 - 2 * s2 + frac) * step_ * tab.integrand[k]
               + (-2 * s3 + 3 * s2) * tab.cumulative[k + 1] + (s3 - s2) * step_ * tab.integrand[k + 1];
    }
    const double a = lo_ + step_ * static_cast<double>(k);
    auto f = [this, route](double y) { return integrand(route, y); };
    return offset + tab.cumulative[k]
           + adaptive_simpson(f, a, a + frac * step_, options_.quad_tol / static_cast<double>(cells_));
}

double OriClosedForm::integral(Route route, double a, double b) const
{
    return antiderivative(route, b, false) - antiderivative(route, a, false);
}

double OriClosedForm::integral_fast(Route route, double a, double b) const
{
    return antiderivative(route, b, true) - antiderivative(route, a, true);
}

void OriClosedForm::require_inside(double t, double vartheta) const
{
    if (periodic_) return;
    const double slack = kSnap * step_;
    if (vartheta - t < lo_ - slack || vartheta + t > hi_ + slack)
        throw WindowError("base interval of the closed form leaves the data window");
}

double OriClosedForm::argument(double t, double vartheta, Route route) const
{
    if (t < 0.0) throw ArgumentError("closed form needs t >= 0");
    require_inside(t, vartheta);
    const double plus = vartheta + t, minus = vartheta - t;
    const double integral_part = integral(route, minus, plus);
    switch (route) {
    case Route::psi: return 0.5 * values_at(plus).w + 0.5 * values_at(minus).w - 0.25 * integral_part;
    case Route::xi: return values_at(plus).w - 0.25 * integral_part;
    case Route::eta: return values_at(minus).w - 0.25 * integral_part;
    }
    return 0.0;
}

double OriClosedForm::argument_fast(double t, double vartheta) const
{
    const double plus = vartheta + t, minus = vartheta - t;
    return 0.5 * values_at(plus).w + 0.5 * values_at(minus).w - 0.25 * integral_fast(Route::psi, minus, plus);
}

U3Value OriClosedForm::u3(double t, double vartheta, Route route) const
{
    U3Value out;
    out.argument = argument(t, vartheta, route);
    if (out.argument <= options_.eps_log) {
        out.blowup = true;
        out.value = std::numeric_limits<double>::infinity();
        return out;
    }
    out.value = -2.0 * std::log(out.argument);
    return out;
}

U3Partials OriClosedForm::partials(double t, double vartheta) const
{
    U3Partials out;
    out.argument = argument(t, vartheta, Route::psi);
    if (out.argument <= options_.eps_log) {
        out.blowup = true;
        out.u = std::numeric_limits<double>::infinity();
        return out;
    }
    const NodeValues plus = values_at(vartheta + t);
    const NodeValues minus = values_at(vartheta - t);
    out.u = -2.0 * std::log(out.argument);
    out.p = minus.p0 * minus.w / out.argument;
    out.q = plus.q0 * plus.w / out.argument;
    return out;
}

// ---------------------------------------------------------------------------

ExistenceReport existence_check(const OriClosedForm& cf, const ExistenceScan& scan)
{
    ExistenceReport report;
    const double step = scan.step > 0.0 ? scan.step : cf.table_step();
    const double eps = cf.options().eps_log;
    report.vartheta_lo = cf.lo();
    report.vartheta_hi = cf.hi();
    report.triangle = !cf.periodic();
    report.min_argument = std::numeric_limits<double>::infinity();

    std::vector<double> nodes;
    if (cf.periodic()) {
        const auto n = static_cast<std::size_t>(std::max(4.0, std::round(cf.period() / step)));
        const double d = cf.period() / static_cast<double>(n);
        for (std::size_t j = 0; j < n; ++j) nodes.push_back(cf.lo() + d * static_cast<double>(j));
    } else {
        const auto n = static_cast<std::size_t>(std::max(2.0, std::round((cf.hi() - cf.lo()) / step)));
        const double d = (cf.hi() - cf.lo()) / static_cast<double>(n);
        for (std::size_t j = 0; j <= n; ++j) nodes.push_back(cf.lo() + d * static_cast<double>(j));
    }
    // last level is clamped to t_max
    const auto levels = static_cast<std::size_t>(std::ceil(scan.t_max / step - 1e-9));
    const double slack = 1e-9 * step;

    for (std::size_t level = 1; level <= levels; ++level) {
        const double t = std::min(step * static_cast<double>(level), scan.t_max);
        std::vector<double> violating;
        bool any_inside = false;
        for (double v : nodes) {
            if (!cf.periodic() && (v - t < cf.lo() - slack || v + t > cf.hi() + slack)) continue;
            any_inside = true;
            const double arg = cf.argument_fast(t, v);
            ++report.checks;
            report.min_argument = std::min(report.min_argument, arg);
            if (!(arg > eps)) violating.push_back(v);
        }
        if (!any_inside) break;
        report.t_scanned = t;
        if (violating.empty()) continue;

        ExistenceViolation best;
        best.t_star = std::numeric_limits<double>::infinity();
        for (double v : violating) {
            double lo = t - step, hi = t;
            while (hi - lo > 1e-6) {
                const double mid = 0.5 * (lo + hi);
                if (cf.argument(mid, v) > eps)
                    lo = mid;
                else
                    hi = mid;
            }
            const double estimate = 0.5 * (lo + hi);
            if (estimate < best.t_star) {
                best.t_star = estimate;
                best.vartheta = v;
            }
        }
        best.bracket_lo = t - step;
        best.bracket_hi = t;
        report.pass = false;
        report.violation = best;
        return report;
    }
    if (report.checks == 0) report.min_argument = 0.0;
    return report;
}

CorollaryFlags corollary_flags(const OriClosedForm& cf)
{
    CorollaryFlags flags;
    const double d = cf.table_step();
    const auto cells = static_cast<std::size_t>(std::llround((cf.hi() - cf.lo()) / d));
    const std::size_t count = cf.periodic() ? cells : cells + 1;
    flags.psi3_nonpositive = flags.p30_nonpositive = flags.q30_nonpositive = true;
    for (std::size_t k = 0; k < count; ++k) {
        const double s = cf.lo() + d * static_cast<double>(k);
        const double p = cf.p0(s), q = cf.q0(s);
        const double weight = (!cf.periodic() && (k == 0 || k + 1 == count)) ? 0.5 * d : d;
        if (0.5 * (p + q) > 0.0) flags.psi3_nonpositive = false;
        if (p > 0.0) flags.p30_nonpositive = false;
        if (q > 0.0) flags.q30_nonpositive = false;
        flags.l1_p += weight * std::abs(p);
        flags.l1_q += weight * std::abs(q);
    }
    const double threshold = cf.options().l1_threshold;
    flags.l1_small_p = flags.l1_p <= threshold;
    flags.l1_small_q = flags.l1_q <= threshold;
    if (cf.periodic()) {
        flags.period_drift = cf.integral(Route::psi, cf.lo(), cf.hi());
        flags.period_drift_ok = flags.period_drift <= 0.0;
    }
    return flags;
}

// ---------------------------------------------------------------------------

namespace {

Vec pick(const Vec& v, std::initializer_list<int> components)
{
    Vec out(static_cast<int>(components.size()));
    int i = 0;
    for (int c : components) out(i++) = v(c);
    return out;
}

LightconeLevel select_components(const LightconeLevel& level, std::initializer_list<int> components)
{
    LightconeLevel out;
    out.level = level.level;
    out.t = level.t;
    out.first = level.first;
    out.nodes.reserve(level.nodes.size());
    for (const NodeState& s : level.nodes)
        out.nodes.push_back({pick(s.u, components), pick(s.p, components), pick(s.q, components)});
    return out;
}

Vec select_winding(const Vec& winding, std::initializer_list<int> components)
{
    if (winding.size() != 4) return Vec::Zero(static_cast<int>(components.size()));
    return pick(winding, components);
}

U3Partials closed_form_partials(const OriClosedForm& cf, double t, double vartheta)
{
    const U3Partials d = cf.partials(t, vartheta);
    if (d.blowup) {
        BlowUpReport r;
        r.t = t;
        r.vartheta = vartheta;
        r.component = 3;
        r.quantity = "closed-form argument";
        r.value = d.argument;
        throw BlowUpError(r);
    }
    return d;
}

/// Stage-1 values at a lattice node or at the centre of a lattice cell (average of the diagonal pairs).
class LatticeLookup {
public:
    explicit LatticeLookup(const LightconeField& field) : field_(field)
    {
        for (const LightconeLevel& l : field.levels)
            if (l.level == by_level_.size()) by_level_.push_back(&l);
        if (by_level_.size() != field.grid.levels + 1) throw ArgumentError("staged solve needs every level stored");
    }

    NodeState at(double t, double vartheta) const
    {
        const TransportGrid& g = field_.grid;
        const auto a = static_cast<long long>(std::llround(2.0 * t / g.h));
        const auto b = static_cast<long long>(std::llround(2.0 * (vartheta - g.vartheta0) / g.h));
        if ((a - b) % 2 != 0) throw ArgumentError("lookup point is not on the half lattice");
        if (a % 2 == 0) {
            if (auto s = node(a / 2, floor_div(b, 2))) return *s;
            throw WindowError("staged lookup outside the stored lattice");
        }
        const long long n = (a - 1) / 2;
        const long long j = floor_div(b - 1, 2);
        NodeState sum;
        int pairs = 0;
        for (auto [j0, j1] : {std::pair{j, j + 1}, std::pair{j + 1, j}}) {
            auto s0 = node(n, j0), s1 = node(n + 1, j1);
            if (!s0 || !s1) continue;
            if (pairs == 0) {
                sum = {s0->u + s1->u, s0->p + s1->p, s0->q + s1->q};
            } else {
                sum.u += s0->u + s1->u;
                sum.p += s0->p + s1->p;
                sum.q += s0->q + s1->q;
            }
            ++pairs;
        }
        if (pairs == 0) throw WindowError("staged lookup outside the stored lattice");
        const double scale = 0.5 / pairs;
        return {scale * sum.u, scale * sum.p, scale * sum.q};
    }

private:
    static long long floor_div(long long x, long long d) { return x >= 0 ? x / d : -((-x + d - 1) / d); }

    std::optional<NodeState> node(long long level, long long j) const
    {
        if (level < 0 || level >= static_cast<long long>(by_level_.size())) return std::nullopt;
        const LightconeLevel& l = *by_level_[static_cast<std::size_t>(level)];
        const TransportGrid& g = field_.grid;
        if (g.periodic) {
            const auto n = static_cast<long long>(g.nodes);
            const long long wraps = floor_div(j, n);
            NodeState s = l.nodes[static_cast<std::size_t>(j - wraps * n)];
            if (wraps != 0 && field_.winding.size() == s.u.size()) s.u += static_cast<double>(wraps) * field_.winding;
            return s;
        }
        if (j < static_cast<long long>(l.first) || j > static_cast<long long>(l.last())) return std::nullopt;
        return l.at(static_cast<std::size_t>(j));
    }

    const LightconeField& field_;
    std::vector<const LightconeLevel*> by_level_;
};

}  // namespace

LightconeSolution solve_u12(double a, const OriClosedForm& cf, const LightconeLevel& initial, const TransportGrid& grid,
                            const Vec& winding, const LightconeOptions& options)
{
    if (initial.nodes.empty() || initial.nodes.front().u.size() != 4)
        throw ArgumentError("staged solve needs a four-component initial level");
    LightconeSource source = [a, &cf](const Vec& u, const Vec&, const Vec&, double t, double vartheta) -> Vec {
        const U3Partials d = closed_form_partials(cf, t, vartheta);
        const double c = a * d.p * d.q;
        Vec f(2);
        f(0) = c * u(0);
        f(1) = -c * u(1);
        return f;
    };
    LightconeOptions opts = options;
    opts.store_stride = 1;
    return solve_lightcone(source, select_components(initial, {1, 2}), grid, select_winding(winding, {1, 2}), opts);
}

LightconeSolution solve_u0(double a, const OriClosedForm& cf, const LightconeField& stage1,
                           const LightconeLevel& initial, const TransportGrid& grid, const Vec& winding,
                           const LightconeOptions& options)
{
    if (initial.nodes.empty() || initial.nodes.front().u.size() != 4)
        throw ArgumentError("staged solve needs a four-component initial level");
    auto lookup = std::make_shared<LatticeLookup>(stage1);
    LightconeSource source = [a, &cf, lookup](const Vec& u, const Vec& p, const Vec& q, double t,
                                              double vartheta) -> Vec {
        const U3Partials d = closed_form_partials(cf, t, vartheta);
        const NodeState s = lookup->at(t, vartheta);
        const double u1 = s.u(0), p1 = s.p(0), q1 = s.q(0);
        const double u2 = s.u(1), p2 = s.p(1), q2 = s.q(1);
        const double P = d.p, Q = d.q;
        const double bracket = 0.5 * (p(0) * Q + P * q(0)) - a * u1 * (p1 * Q + P * q1) + a * u2 * (p2 * Q + P * q2)
                               + 0.5 * (u(0) - a * (u1 * u1 - u2 * u2)) * P * Q;
        Vec f(1);
        f(0) = -bracket;
        return f;
    };
    return solve_lightcone(source, select_components(initial, {0}), grid, select_winding(winding, {0}), options);
}

LightconeField assemble_staged(const OriClosedForm& cf, const LightconeField& stage0, const LightconeField& stage1)
{
    LightconeField out;
    out.grid = stage0.grid;
    out.dim = 4;
    out.winding = Vec::Zero(4);
    if (stage0.winding.size() == 1) out.winding(0) = stage0.winding(0);
    if (stage1.winding.size() == 2) {
        out.winding(1) = stage1.winding(0);
        out.winding(2) = stage1.winding(1);
    }
    for (const LightconeLevel& l0 : stage0.levels) {
        const LightconeLevel* l1 = stage1.find(l0.level);
        if (l1 == nullptr) throw ArgumentError("stage fields store different levels");
        LightconeLevel level;
        level.level = l0.level;
        level.t = l0.t;
        level.first = l0.first;
        level.nodes.reserve(l0.nodes.size());
        for (std::size_t k = 0; k < l0.nodes.size(); ++k) {
            const std::size_t j = l0.first + k;
            const NodeState& a = l0.nodes[k];
            const NodeState& b = l1->at(j);
            const U3Partials d = closed_form_partials(cf, l0.t, out.grid.vartheta(j));
            NodeState s;
            s.u = Vec(4);
            s.p = Vec(4);
            s.q = Vec(4);
            s.u << a.u(0), b.u(0), b.u(1), d.u;
            s.p << a.p(0), b.p(0), b.p(1), d.p;
            s.q << a.q(0), b.q(0), b.q(1), d.q;
            level.nodes.push_back(std::move(s));
        }
        out.levels.push_back(std::move(level));
    }
    return out;
}

LightconeField solve_staged(double a, const OriClosedForm& cf, const LightconeLevel& initial,
                            const TransportGrid& grid, const Vec& winding, const LightconeOptions& options)
{
    const LightconeSolution stage1 = solve_u12(a, cf, initial, grid, winding, options);
    const LightconeSolution stage0 = solve_u0(a, cf, stage1.field, initial, grid, winding, options);
    return assemble_staged(cf, stage0.field, stage1.field);
}

}  // namespace relstring
