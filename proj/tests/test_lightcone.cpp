#include <cmath>
#include <memory>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "relstring/errors.hpp"
#include "relstring/lightcone.hpp"

using namespace relstring;

namespace {

struct FlatRun {
    StringInitialData data;
    CoordinateMap map;
    TransportGrid grid;
};

FlatRun flat_run(double eps, std::size_t cells, double t_max, std::size_t samples = 512)
{
    static MinkowskiMetric flat(2);
    FlatRun r{oracle::minkowski_wave(flat, eps, samples), {}, {}};
    r.map = CoordinateMap::build(r.data);
    r.grid = make_transport_grid(r.map, r.map.vartheta_period() / static_cast<double>(cells), t_max);
    return r;
}

// u = sin(t + 2 vartheta) + cos(t) sin(vartheta)/2 solves p_xi = q_eta = c p q + R(t, vartheta)
struct Manufactured {
    double c = 0.7;
    double u(double t, double s) const { return std::sin(t + 2 * s) + 0.5 * std::cos(t) * std::sin(s); }
    double p(double t, double s) const { return -std::cos(t + 2 * s) - 0.5 * std::cos(t - s); }
    double q(double t, double s) const { return 3 * std::cos(t + 2 * s) + 0.5 * std::cos(t + s); }
    NodeState node(double t, double s) const
    {
        Vec a(1), b(1), d(1);
        a << u(t, s);
        b << p(t, s);
        d << q(t, s);
        return {a, b, d};
    }
    LightconeSource source() const
    {
        return [*this](const Vec&, const Vec& pp, const Vec& qq, double t, double s) {
            Vec f(1);
            f << c * pp(0) * qq(0) + 3 * std::sin(t + 2 * s) - c * p(t, s) * q(t, s);
            return f;
        };
    }
};

double local_error(double h)
{
    const Manufactured m;
    const double t = 0.3, s = 0.8;
    const NodeState n = step_characteristic_rectangle(m.source(), m.node(t, s - h), m.node(t, s + h), h, t, s);
    return std::max({std::abs(n.u(0) - m.u(t + h, s)), std::abs(n.p(0) - m.p(t + h, s)),
                     std::abs(n.q(0) - m.q(t + h, s))});
}

}  // namespace

TEST(Rectangle, LocalTruncationIsThirdOrder)
{
    const double e1 = local_error(0.02), e2 = local_error(0.01);
    EXPECT_GT(std::log2(e1 / e2), 2.7);
    EXPECT_LT(e2, 1e-5);
}

TEST(Rectangle, FlatStepIsExactOnNullData)
{
    MinkowskiMetric flat(1);
    Vec u(2), p(2), q(2);
    u << 0.1, 0.2;
    p << 1.0, -1.0;
    q << 1.0, 1.0;
    const NodeState west{u, p, q}, east{u + 0.1 * q, p, q};
    const NodeState n = step_characteristic_rectangle(flat, west, east, 0.05);
    EXPECT_EQ(n.p, p);
    EXPECT_EQ(n.q, q);
}

TEST(Flat, NullDerivativesAreConstantAlongCharacteristicsBitwise)
{
    static MinkowskiMetric flat(2);
    const FlatRun r = flat_run(0.3, 64, 2.0);
    LightconeOptions opt;
    const LightconeSolution sol = solve_lightcone(flat, r.data, r.map, r.grid, opt);
    const std::size_t n = r.grid.nodes;
    ASSERT_EQ(sol.field.levels.size(), r.grid.levels + 1);
    for (std::size_t l = 0; l + 1 < sol.field.levels.size(); ++l) {
        const LightconeLevel& a = sol.field.levels[l];
        const LightconeLevel& b = sol.field.levels[l + 1];
        for (std::size_t j = 0; j < n; ++j) {
            EXPECT_EQ(b.nodes[j].p, a.nodes[(j + n - 1) % n].p);
            EXPECT_EQ(b.nodes[j].q, a.nodes[(j + 1) % n].q);
        }
    }
}

TEST(Flat, ReproducesDAlembertAtSecondOrder)
{
    static MinkowskiMetric flat(2);
    const double eps = 0.3;
    const oracle::DAlembertWave ref(eps);
    auto error = [&](std::size_t cells) {
        const FlatRun r = flat_run(eps, cells, 1.5);
        LightconeOptions opt;
        opt.store_stride = r.grid.levels;
        const LightconeSolution sol = solve_lightcone(flat, r.data, r.map, r.grid, opt);
        const LightconeLevel& last = sol.field.final_level();
        double e = 0.0;
        for (std::size_t j = 0; j < r.grid.nodes; j += 3)
            e = std::max(e, std::abs(last.nodes[j].u(2) - ref.u2(last.t, r.grid.vartheta(j))));
        return e;
    };
    const double e1 = error(32), e2 = error(64);
    EXPECT_GT(std::log2(e1 / e2), 1.7);
    EXPECT_LT(e2, 1e-3);
}

TEST(Lightcone, DomainOfDependence)
{
    const auto ori = OriMetric::quadratic(1.0);
    const StringInitialData d = oracle::ori_circle(*ori, 1.0, -1.0, [](double) { return -0.5; }, 256);
    const CoordinateMap map = CoordinateMap::build(d);
    const TransportGrid g = make_transport_grid(map, map.vartheta_period() / 64, 0.5);
    const LightconeLevel base = initialize_lightcone(*ori, d, map, g);
    LightconeLevel bumped = base;
    const std::size_t j0 = 20;
    bumped.nodes[j0].u(1) += 1e-3;
    const LightconeSolution a = solve_lightcone(wave_map_source(*ori), base, g, Vec::Zero(4));
    const LightconeSolution b = solve_lightcone(wave_map_source(*ori), bumped, g, Vec::Zero(4));
    const auto n = static_cast<long>(g.nodes);
    for (std::size_t l = 1; l < a.field.levels.size(); ++l) {
        for (long j = 0; j < n; ++j) {
            long dist = std::abs(j - static_cast<long>(j0));
            dist = std::min(dist, n - dist);
            const auto& x = a.field.levels[l].nodes[static_cast<std::size_t>(j)];
            const auto& y = b.field.levels[l].nodes[static_cast<std::size_t>(j)];
            if (dist > static_cast<long>(l)) {
                EXPECT_EQ(x.u, y.u);
                EXPECT_EQ(x.p, y.p);
                EXPECT_EQ(x.q, y.q);
            }
            if (dist == static_cast<long>(l)) EXPECT_NE(x.u, y.u);
        }
    }
}

TEST(Lightcone, NullResidualConvergesAtSecondOrder)
{
    const auto ori = OriMetric::quadratic(0.1);
    const StringInitialData d = oracle::ori_circle(*ori, 0.5, -1.0, [](double) { return -0.125; }, 512);
    const CoordinateMap map = CoordinateMap::build(d);
    auto residual = [&](std::size_t cells) {
        const TransportGrid g = make_transport_grid(map, map.vartheta_period() / cells, 5.0);
        LightconeOptions opt;
        opt.store_stride = g.levels;
        const LightconeSolution s = solve_lightcone(*ori, d, map, g, opt);
        EXPECT_EQ(s.monitors.null_by_level.size(), g.levels + 1);
        return std::max(s.monitors.null_p, s.monitors.null_q);
    };
    const double r1 = residual(64), r2 = residual(128);
    EXPECT_GT(std::log2(r1 / r2), 1.8);
}

TEST(Lightcone, CeilingWithoutBlowUpIsAConsistencyFailure)
{
    const auto ori = OriMetric::quadratic(1.0);
    const StringInitialData d = oracle::ori_circle(*ori, 1.0, -1.0, [](double) { return -0.5; }, 256);
    const CoordinateMap map = CoordinateMap::build(d);
    const TransportGrid g = make_transport_grid(map, map.vartheta_period() / 32, 1.0);
    LightconeOptions opt;
    opt.null_ceiling = 1e-9;
    EXPECT_THROW(solve_lightcone(*ori, d, map, g, opt), ConsistencyError);
}

TEST(Lightcone, DivergingSolutionRaisesBlowUp)
{
    const auto ori = OriMetric::quadratic(1.0);
    const StringInitialData d = oracle::ori_circle(*ori, 1.0, 1.0, [](double) { return 0.5; }, 512);
    const CoordinateMap map = CoordinateMap::build(d);
    const TransportGrid g = make_transport_grid(map, map.vartheta_period() / 128, 4.5);
    try {
        solve_lightcone(*ori, d, map, g);
        FAIL() << "expected BlowUpError";
    } catch (const BlowUpError& e) {
        EXPECT_NEAR(e.report().t, 4.0, 0.2);
    }
}

TEST(Lightcone, LineDomainShrinksAndRejectsLongRuns)
{
    MinkowskiMetric flat(3);
    const std::size_t n = 241;
    std::vector<double> theta(n);
    std::vector<Vec> phi(n), psi(n);
    for (std::size_t i = 0; i < n; ++i) {
        theta[i] = -3.0 + 6.0 * i / (n - 1);
        phi[i] = Vec(4);
        phi[i] << 0.0, theta[i], 0.2 * std::exp(-theta[i] * theta[i]), 0.0;
        psi[i] = Vec(4);
        psi[i] << 1.0, 0.0, 0.0, 0.1 * std::exp(-theta[i] * theta[i]);
    }
    const StringInitialData d = build_initial_data(flat, theta, phi, psi, Domain::line());
    const CoordinateMap map = CoordinateMap::build(d);
    const TransportGrid g = make_transport_grid(map, 0.05, 1.0);
    const LightconeSolution s = solve_lightcone(flat, d, map, g);
    const LightconeLevel& last = s.field.final_level();
    EXPECT_EQ(last.first, g.levels);
    EXPECT_EQ(last.nodes.size(), g.nodes - 2 * g.levels);
    EXPECT_THROW(solve_lightcone(flat, d, map, make_transport_grid(map, 0.05, 4.0)), WindowError);
}
