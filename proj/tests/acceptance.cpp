// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "relstring/commands.hpp"
#include "relstring/errors.hpp"
#include "relstring/lightcone.hpp"
#include "relstring/ori.hpp"
#include "relstring/scenario.hpp"
#include "relstring/transport.hpp"

using namespace relstring;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

const fs::path kScenarios = RELSTRING_SCENARIO_DIR;

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail)
{
    std::printf("A%-2d %-34s %s  %s\n", id, name.c_str(), pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

template <class... T>
std::string fmt(const char* f, T... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::vector<std::shared_ptr<const MetricModel>> builtin_metrics()
{
    return {std::make_shared<MinkowskiMetric>(3), OriMetric::quadratic(1.0),
            std::make_shared<OriMetric>(make_profile("cubic", {{"b", 0.3}})),
            std::make_shared<OriMetric>(make_profile("exp_sin", {{"c", 0.5}, {"k", 1.0}, {"m", 0.2}}))};
}

struct Loaded {
    Scenario sc;
    StringInitialData data;
    CoordinateMap map;
};

Loaded load(const std::string& name)
{
    Loaded l{load_scenario(kScenarios / (name + ".json")), {}, {}};
    l.data = make_initial_data(l.sc);
    l.map = CoordinateMap::build(l.data);
    return l;
}

TransportGrid grid_with_cells(const Loaded& l, std::size_t cells, double t_max)
{
    CommandOptions o;
    o.cells = cells;
    o.t_max = t_max;
    return scenario_grid(l.sc, l.map, o);
}

// ---------------------------------------------------------------------------

void eigenstructure()
{
    const auto t0 = Clock::now();
    std::mt19937_64 rng(101);
    double worst = 0.0;
    for (const auto& m : builtin_metrics()) {
        const int dim = m->dimension();
        for (int k = 0; k < 200; ++k) {
            const InducedMetric im = induced_metric(*m, oracle::random_timelike_state(*m, rng));
            const Eigen::MatrixXd A = system_matrix(im, dim);
            const Eigenbasis b = eigenvectors(char_speeds(im), dim);
            for (std::size_t i = 0; i < b.values.size(); ++i) {
                worst = std::max(worst, (A * b.right[i] - b.values[i] * b.right[i]).cwiseAbs().maxCoeff());
                worst = std::max(worst, (b.left[i] * A - b.values[i] * b.left[i]).cwiseAbs().maxCoeff());
            }
        }
    }
    const double dt = seconds_since(t0);
    report(1, "eigenstructure", worst <= 1e-12 && dt < 1.0, fmt("max residual %.2e, %.3f s", worst, dt));
}

void linear_degeneracy()
{
    std::mt19937_64 rng(202);
    double analytic = 0.0, fd = 0.0;
    for (const auto& m : builtin_metrics()) {
        for (int k = 0; k < 200; ++k) {
            const StateVector s = oracle::random_timelike_state(*m, rng);
            const DegeneracyResidual a = linear_degeneracy_residual(*m, s);
            const DegeneracyResidual f = linear_degeneracy_residual_fd(*m, s, 1e-6);
            analytic = std::max({analytic, a.minus, a.plus});
            fd = std::max({fd, f.minus, f.plus});
        }
    }
    report(2, "linear degeneracy", analytic <= 1e-10 && fd <= 1e-6,
           fmt("analytic %.2e, finite difference %.2e", analytic, fd));
}

void null_conservation()
{
    const Loaded l = load("ori_null_conservation");
    double residual[2];
    double h[2];
    int i = 0;
    for (std::size_t cells : {256u, 512u}) {
        const TransportGrid g = grid_with_cells(l, cells, 5.0);
        LightconeOptions opt;
        opt.store_stride = g.levels;
        const LightconeSolution s = solve_lightcone(*l.sc.model, l.data, l.map, g, opt);
        residual[i] = std::max(s.monitors.null_p, s.monitors.null_q);
        h[i++] = g.h;
    }
    const double ratio = residual[0] / residual[1];
    report(3, "null conservation", residual[1] <= 1e-6 && ratio > 3.4 && ratio < 4.6,
           fmt("h=%.5f: %.2e, h=%.5f: %.2e, ratio %.2f", h[0], residual[0], h[1], residual[1], ratio));
}

void riemann_transport()
{
    const auto ori = OriMetric::quadratic(1.0);
    const StringInitialData d = oracle::ori_circle(*ori, 1.0, -1.0, [](double) { return -0.5; }, 1024,
                                                   [](double th) { return 0.2 * std::sin(2 * th); });
    const CoordinateMap map = CoordinateMap::build(d);
    bool exact = true, rk4_ok = true;
    double drift_ratio = 0.0;
    std::vector<double> cons;
    for (std::size_t cells : {128u, 256u, 512u}) {
        const TransportGrid g = make_transport_grid(map, map.vartheta_period() / cells, 3.0);
        const VarthetaSpeedFields f = solve_riemann_invariants(map, g);
        for (std::size_t lv = 0; lv <= g.levels; ++lv)
            for (std::size_t j = 0; j < g.nodes; ++j)
                exact = exact && f.lambda_minus(lv, j) == map.lambda_bar_minus(g.vartheta(j) - g.t(lv)) &&
                        f.lambda_plus(lv, j) == map.lambda_bar_plus(g.vartheta(j) + g.t(lv));
        const InverseMap inv = build_inverse_map(map, f, 7, 64);
        std::vector<double> theta(cells);
        for (std::size_t i = 0; i < cells; ++i) theta[i] = oracle::kTwoPi * i / cells;
        cons.push_back(oracle::conservation_residual(to_theta_coordinates(map, inv, theta)));
        const ThetaSpeedFields tf = to_theta_coordinates(map, inv, d.theta);
        const double drift = oracle::rk4_invariant_drift(tf, d.lambda_minus, d.theta, 32);
        drift_ratio = std::max(drift_ratio, drift / (g.h * g.h));
        rk4_ok = rk4_ok && drift <= 10 * g.h * g.h;
    }
    const double o1 = std::log2(cons[0] / cons[1]), o2 = std::log2(cons[1] / cons[2]);
    report(4, "Riemann transport", exact && rk4_ok && o1 >= 2.0 - 0.05 && o2 >= 2.0 - 0.05,
           fmt("exact %s, RK4 drift <= %.2f h^2, conservation orders %.2f %.2f", exact ? "yes" : "no", drift_ratio, o1,
               o2));
}

void ordering_criterion()
{
    std::mt19937_64 rng(505);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    int agree = 0, violating = 0;
    for (int k = 0; k < 50; ++k) {
        const std::size_t n = 20 + static_cast<std::size_t>(rng() % 60);
        const bool periodic = k % 2 == 1;
        std::vector<double> lm(n), lp(n);
        const double phase = oracle::kTwoPi * U(rng);
        for (std::size_t i = 0; i < n; ++i) {
            const double x = oracle::kTwoPi * static_cast<double>(i) / static_cast<double>(n);
            lm[i] = -1.0 + 0.5 * std::sin(x + phase) + 0.1 * U(rng);
            lp[i] = 1.0 + 0.5 * std::cos(2 * x - phase) + 0.1 * U(rng);
        }
        if (k % 5 == 0) {
            const std::size_t i = rng() % (n / 2), j = n / 2 + rng() % (n / 2);
            lm[i] = lp[j] + 0.05;  // early minus speed above a later plus speed
        } else if (k % 5 == 1) {
            lm[rng() % n] = 2.0;  // equal or reversed pair at one node
        }
        const bool brute = oracle::pair_scan_ordering(lm, lp, periodic);
        violating += brute ? 0 : 1;
        agree += check_speed_ordering(lm, lp, periodic).ok() == brute ? 1 : 0;
    }
    report(5, "ordering criterion vs pair scan", agree == 50 && violating >= 10,
           fmt("%d/50 verdicts agree, %d violating profiles", agree, violating));
}

void closed_form_vs_general()
{
    const Loaded l = load("ori_global");
    std::vector<double> err, hs;
    double last_runtime = 0.0;
    for (std::size_t cells : {128u, 256u, 512u}) {
        const auto t0 = Clock::now();
        const TransportGrid g = grid_with_cells(l, cells, 5.0);
        const OriClosedForm cf = OriClosedForm::from_initial_data(l.sc.model, l.data, l.map, 2 * g.nodes);
        const ExistenceReport ex = existence_check(cf, {g.t(g.levels), g.h});
        LightconeOptions opt;
        opt.store_stride = 1;
        const LightconeSolution s = solve_lightcone(*l.sc.model, l.data, l.map, g, opt);
        double e = 0.0;
        for (const LightconeLevel& lv : s.field.levels)
            for (std::size_t j = 0; j < lv.nodes.size(); ++j)
                e = std::max(e, std::abs(lv.nodes[j].u(3) - cf.u3(lv.t, g.vartheta(j)).value));
        last_runtime = seconds_since(t0);
        if (!ex.pass) e = INFINITY;
        err.push_back(e);
        hs.push_back(g.h);
    }
    const double o1 = std::log2(err[0] / err[1]), o2 = std::log2(err[1] / err[2]);
    const double c = err[2] / (hs[2] * hs[2]);
    const bool pass = std::abs(o1 - 2) <= 0.3 && std::abs(o2 - 2) <= 0.3 && last_runtime < 60.0;
    report(6, "closed form vs general solver", pass,
           fmt("errors %.2e %.2e %.2e, orders %.2f %.2f, C=%.3f, %.2f s at finest", err[0], err[1], err[2], o1, o2, c,
               last_runtime));
}

void blowup_reproduction()
{
    const Loaded b = load("ori_blowup");
    const TransportGrid g = grid_with_cells(b, b.sc.grid.cells, b.sc.grid.t_max);
    const OriClosedForm cf = OriClosedForm::from_initial_data(b.sc.model, b.data, b.map, 2 * g.nodes);
    const ExistenceReport ex = existence_check(cf, {g.t(g.levels), g.h});
    const double t_star = ex.violation ? ex.violation->t_star : NAN;
    const bool star_ok = !ex.pass && std::abs(t_star - 4.0) <= 1e-4;

    double t_abort = NAN;
    try {
        solve_lightcone(*b.sc.model, b.data, b.map, g, LightconeOptions{g.levels});
    } catch (const BlowUpError& e) {
        t_abort = e.report().t;
    }
    const fs::path out = fs::temp_directory_path() / "relstring_acceptance_blowup";
    CommandOptions opt;
    opt.out = out;
    std::ostringstream sink;
    const int code = run_command("simulate", kScenarios / "ori_blowup.json", opt, sink, sink);
    fs::remove_all(out);
    const bool abort_ok = code == kExitBlowUp && std::abs(t_abort - t_star) <= 0.05 * t_star;

    const Loaded gl = load("ori_global");
    const TransportGrid gg = grid_with_cells(gl, gl.sc.grid.cells, 50.0);
    const OriClosedForm cg = OriClosedForm::from_initial_data(gl.sc.model, gl.data, gl.map, 2 * gg.nodes);
    const ExistenceReport eg = existence_check(cg, {50.0, gg.h});
    LightconeOptions lo;
    lo.store_stride = 16;
    const LightconeSolution s = solve_lightcone(*gl.sc.model, gl.data, gl.map, gg, lo);
    double u3_max = 0.0, cf_max = 0.0, gap = 0.0;
    for (const LightconeLevel& lv : s.field.levels)
        for (std::size_t j = 0; j < lv.nodes.size(); ++j) {
            const double u = lv.nodes[j].u(3), c = cg.u3(lv.t, gg.vartheta(j)).value;
            u3_max = std::max(u3_max, std::abs(u));
            cf_max = std::max(cf_max, std::abs(c));
            gap = std::max(gap, std::abs(u - c));
        }
    const bool global_ok = eg.pass && eg.t_scanned >= 50.0 - 1e-9 && std::isfinite(u3_max) &&
                           u3_max <= cf_max * (1 + 1e-2) && gap <= 1e-2 * std::max(1.0, cf_max);
    report(7, "blow-up reproduction", star_ok && abort_ok && global_ok,
           fmt("t*=%.7f, solver exit %d at t=%.4f (%.2f%%), global: PASS=%s to t=%.4f, max|u3| %.4f vs closed %.4f, gap %.1e",
               t_star, code, t_abort, 100 * std::abs(t_abort - t_star) / t_star, eg.pass ? "yes" : "no", eg.t_scanned,
               u3_max, cf_max, gap));
}

OriClosedForm random_closed_form(std::mt19937_64& rng, int kind)
{
    using oracle::Fourier;
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const Fourier phi = Fourier::random(rng, 0.2 * U(rng), kind == 3 ? 0.004 : 0.6, 3);
    const Fourier base = Fourier::random(rng, 0.0, kind == 3 ? 0.004 : 0.5, 3);
    auto phi_prime = [phi](double s) { return phi.derivative(s); };
    OriClosedForm::Fn p0, q0;
    switch (kind) {
    case 0:
        std::tie(p0, q0) = OriClosedForm::null_data(phi_prime, [base](double s) { return -std::abs(base(s)) - 0.02; });
        break;
    case 1:
        p0 = [base](double s) { return -std::abs(base(s)); };
        q0 = [p0, phi_prime](double s) { return p0(s) + 2 * phi_prime(s); };
        break;
    case 2:
        q0 = [base](double s) { return -std::abs(base(s)); };
        p0 = [q0, phi_prime](double s) { return q0(s) - 2 * phi_prime(s); };
        break;
    case 3: {
        const double shift = -0.004 * std::abs(U(rng));
        std::tie(p0, q0) = OriClosedForm::null_data(phi_prime, [base, shift](double s) { return base(s) + shift; });
        break;
    }
    default:
        std::tie(p0, q0) = OriClosedForm::null_data(phi_prime, base);
    }
    return OriClosedForm::periodic(phi, p0, q0, 0.0, oracle::kTwoPi, 256);
}

void corollary_soundness()
{
    std::mt19937_64 rng(808);
    int flagged = 0, counterexamples = 0, unflagged_fail = 0;
    for (int k = 0; k < 100; ++k) {
        const OriClosedForm cf = random_closed_form(rng, k % 5);
        const CorollaryFlags f = corollary_flags(cf);
        const bool pass = existence_check(cf, {30.0, 0.0}).pass;
        if (f.any()) {
            ++flagged;
            counterexamples += pass ? 0 : 1;
        } else if (!pass) {
            ++unflagged_fail;
        }
    }
    report(8, "corollary soundness", counterexamples == 0 && flagged >= 60,
           fmt("%d flagged sets, %d counterexamples (%d unflagged sets fail)", flagged, counterexamples,
               unflagged_fail));
}

void dual_route()
{
    std::mt19937_64 rng(909);
    double worst = 0.0, oracle_gap = 0.0;
    for (int k = 0; k < 20; ++k) {
        using oracle::Fourier;
        const Fourier phi = Fourier::random(rng, 0.0, 0.5, 4);
        const Fourier psi = Fourier::random(rng, -0.2, 0.3, 4);
        auto [p0, q0] = OriClosedForm::null_data([phi](double s) { return phi.derivative(s); }, psi);
        const OriClosedForm cf = OriClosedForm::periodic(phi, p0, q0, 0.0, oracle::kTwoPi, 256);
        for (double t : {0.3, 1.2, 2.5, 4.0})
            for (double s : {0.0, 0.9, 2.2, 3.7, 5.1}) {
                const U3Value a = cf.u3(t, s, Route::xi), b = cf.u3(t, s, Route::eta);
                if (a.blowup || b.blowup) continue;
                worst = std::max(worst, std::abs(a.value - b.value));
                oracle_gap = std::max(oracle_gap,
                                      std::abs(a.value + 2 * std::log(oracle::closed_form_argument(phi, psi, t, s))));
            }
    }
    report(9, "dual-route equivalence", worst <= 1e-8 && oracle_gap <= 1e-8,
           fmt("max route gap %.2e, max gap to quadrature oracle %.2e", worst, oracle_gap));
}

void flat_exactness()
{
    static MinkowskiMetric flat(2);
    const double eps = 0.3;
    const oracle::DAlembertWave ref(eps);
    bool bitwise = true;
    std::vector<double> err;
    for (std::size_t cells : {64u, 128u}) {
        const StringInitialData d = oracle::minkowski_wave(flat, eps, 1024);
        const CoordinateMap map = CoordinateMap::build(d);
        const TransportGrid g = make_transport_grid(map, map.vartheta_period() / cells, 2.0);
        const LightconeSolution s = solve_lightcone(flat, d, map, g);
        const std::size_t n = g.nodes;
        for (std::size_t l = 0; l + 1 < s.field.levels.size(); ++l)
            for (std::size_t j = 0; j < n; ++j) {
                bitwise = bitwise && s.field.levels[l + 1].nodes[j].p == s.field.levels[l].nodes[(j + n - 1) % n].p &&
                          s.field.levels[l + 1].nodes[j].q == s.field.levels[l].nodes[(j + 1) % n].q;
            }
        const LightconeLevel& last = s.field.final_level();
        double e = 0.0;
        for (std::size_t j = 0; j < n; j += 2) e = std::max(e, std::abs(last.nodes[j].u(2) - ref.u2(last.t, g.vartheta(j))));
        err.push_back(e);
    }
    const double order = std::log2(err[0] / err[1]);
    report(10, "flat-space exactness", bitwise && order >= 1.7,
           fmt("p, q bitwise constant: %s, d'Alembert errors %.2e %.2e (order %.2f)", bitwise ? "yes" : "no", err[0],
               err[1], order));
}

}  // namespace

int main()
{
    auto guarded = [](int id, const char* name, void (*f)()) {
        try {
            f();
        } catch (const std::exception& e) {
            report(id, name, false, std::string("exception: ") + e.what());
        }
    };
    guarded(1, "eigenstructure", eigenstructure);
    guarded(2, "linear degeneracy", linear_degeneracy);
    guarded(3, "null conservation", null_conservation);
    guarded(4, "Riemann transport", riemann_transport);
    guarded(5, "ordering criterion vs pair scan", ordering_criterion);
    guarded(6, "closed form vs general solver", closed_form_vs_general);
    guarded(7, "blow-up reproduction", blowup_reproduction);
    guarded(8, "corollary soundness", corollary_soundness);
    guarded(9, "dual-route equivalence", dual_route);
    guarded(10, "flat-space exactness", flat_exactness);
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
