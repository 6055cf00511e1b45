#include <cmath>
#include <memory>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "relstring/errors.hpp"
#include "relstring/transport.hpp"

using namespace relstring;

namespace {

StringInitialData ori_data(std::size_t nodes)
{
    static const auto ori = OriMetric::quadratic(1.0);
    return oracle::ori_circle(*ori, 1.0, -1.0, [](double) { return -0.5; }, nodes,
                              [](double th) { return 0.2 * std::sin(2 * th); });
}

}  // namespace

TEST(CoordinateMap, StraighteningCoordinateOfTheFlatWave)
{
    MinkowskiMetric flat(2);
    const double eps = 0.4;
    const StringInitialData d = oracle::minkowski_wave(flat, eps, 256);
    const CoordinateMap map = CoordinateMap::build(d);
    const oracle::DAlembertWave ref(eps);
    EXPECT_NEAR(map.vartheta_period(), ref.period, 1e-7);
    for (double th : {0.3, 1.7, 3.0, 5.9}) {
        EXPECT_NEAR(map.theta0(th), ref.map.forward(th), 1e-7);
        EXPECT_NEAR(map.theta0_inverse(map.theta0(th)), th, 1e-10);
    }
    EXPECT_NEAR(map.theta0(0.5 + oracle::kTwoPi), map.theta0(0.5) + map.vartheta_period(), 1e-12);
}

TEST(TransportGrid, WholeNodesPerPeriod)
{
    const StringInitialData d = ori_data(256);
    const CoordinateMap map = CoordinateMap::build(d);
    const TransportGrid g = make_transport_grid(map, 0.05, 1.0);
    EXPECT_TRUE(g.periodic);
    EXPECT_NEAR(g.h * static_cast<double>(g.nodes), map.vartheta_period(), 1e-12);
    EXPECT_GE(g.t(g.levels) + g.h, 1.0);
}

TEST(RiemannInvariants, UnitSpeedTransportInVartheta)
{
    const StringInitialData d = ori_data(256);
    const CoordinateMap map = CoordinateMap::build(d);
    const TransportGrid g = make_transport_grid(map, map.vartheta_period() / 128, 2.0);
    const VarthetaSpeedFields f = solve_riemann_invariants(map, g);
    for (std::size_t l = 0; l <= g.levels; l += 7)
        for (std::size_t j = 0; j < g.nodes; j += 5) {
            EXPECT_EQ(f.lambda_minus(l, j), map.lambda_bar_minus(g.vartheta(j) - g.t(l)));
            EXPECT_EQ(f.lambda_plus(l, j), map.lambda_bar_plus(g.vartheta(j) + g.t(l)));
        }
}

TEST(RiemannInvariants, InvariantAlongCharacteristicsInTheta)
{
    const StringInitialData d = ori_data(512);
    const CoordinateMap map = CoordinateMap::build(d);
    std::vector<double> theta(512);
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = d.theta[i];
    for (std::size_t cells : {64u, 128u}) {
        const TransportGrid g = make_transport_grid(map, map.vartheta_period() / cells, 2.0);
        const VarthetaSpeedFields f = solve_riemann_invariants(map, g);
        const InverseMap inv = build_inverse_map(map, f);
        const ThetaSpeedFields tf = to_theta_coordinates(map, inv, theta);
        EXPECT_LE(oracle::rk4_invariant_drift(tf, d.lambda_minus, d.theta, 16), 10 * g.h * g.h) << cells;
    }
}

TEST(InverseMap, StartsAtTheInverseStraighteningMap)
{
    const StringInitialData d = ori_data(256);
    const CoordinateMap map = CoordinateMap::build(d);
    const TransportGrid g = make_transport_grid(map, map.vartheta_period() / 64, 1.0);
    const InverseMap inv = build_inverse_map(map, solve_riemann_invariants(map, g));
    for (std::size_t j = 0; j < g.nodes; ++j) EXPECT_NEAR(inv.theta(0, j), map.theta0_inverse(g.vartheta(j)), 1e-12);
    for (std::size_t l = 0; l <= g.levels; l += 4)
        for (double th : {0.4, 2.2, 4.1}) EXPECT_NEAR(inv.theta_at(l, inv.vartheta_at(l, th)), th, 1e-9);
}

TEST(InverseMap, ConservationResidualConvergesAtSecondOrder)
{
    const StringInitialData d = ori_data(1024);
    const CoordinateMap map = CoordinateMap::build(d);
    auto residual = [&](std::size_t cells) {
        const TransportGrid g = make_transport_grid(map, map.vartheta_period() / cells, 2.0);
        const InverseMap inv = build_inverse_map(map, solve_riemann_invariants(map, g));
        // midpoint lattice sums telescope, so the two path orders agree to rounding
        EXPECT_LT(inv.path_residual(), 1e-12);
        std::vector<double> theta(cells);
        for (std::size_t i = 0; i < cells; ++i) theta[i] = oracle::kTwoPi * i / cells;
        return oracle::conservation_residual(to_theta_coordinates(map, inv, theta));
    };
    const double r1 = residual(128), r2 = residual(256), r3 = residual(512);
    EXPECT_GE(std::log2(r1 / r2), 1.9);
    EXPECT_GE(std::log2(r2 / r3), 1.9);
}

TEST(RiemannInvariants, CrossingSpeedsAreABlowUp)
{
    // tangential velocity shifts both speeds: lambda = -c +- 1 with c = 1.5 sin theta
    MinkowskiMetric flat(2);
    const std::size_t n = 256;
    std::vector<double> theta(n);
    std::vector<Vec> phi(n), psi(n);
    for (std::size_t i = 0; i < n; ++i) {
        theta[i] = oracle::kTwoPi * i / n;
        phi[i] = Vec(3);
        phi[i] << 0.0, theta[i], 0.0;
        psi[i] = Vec(3);
        psi[i] << 1.0, 1.5 * std::sin(theta[i]), 0.0;
    }
    Vec winding(3);
    winding << 0.0, oracle::kTwoPi, 0.0;
    const StringInitialData d = build_initial_data(flat, theta, phi, psi, Domain::periodic(oracle::kTwoPi, winding));
    const PhysicalityReport r = check_physicality(d);
    EXPECT_TRUE(r.strict_ordering);
    EXPECT_FALSE(r.separated);
    const CoordinateMap map = CoordinateMap::build(d);
    EXPECT_THROW(solve_riemann_invariants(map, make_transport_grid(map, 0.05, 10.0)), BlowUpError);
}
