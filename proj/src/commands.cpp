#include "relstring/commands.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "relstring/errors.hpp"
#include "relstring/lightcone.hpp"
#include "relstring/ori.hpp"

namespace relstring {

using nlohmann::json;

void parse_grid_override(const std::string& text, CommandOptions& options)
{
    try {
        if (text.rfind("cells:", 0) == 0) {
            const long long n = std::stoll(text.substr(6));
            if (n < 4) throw ConfigError("--grid-override cells must be at least 4");
            options.cells = static_cast<std::size_t>(n);
            options.h.reset();
            return;
        }
        std::size_t used = 0;
        const double h = std::stod(text, &used);
        if (used != text.size() || !(h > 0.0)) throw ConfigError("--grid-override needs a positive step");
        options.h = h;
        options.cells.reset();
    } catch (const std::logic_error&) {
        throw ConfigError("cannot read --grid-override '" + text + "'");
    }
}

TransportGrid scenario_grid(const Scenario& sc, const CoordinateMap& map, const CommandOptions& options)
{
    const double t_max = options.t_max.value_or(sc.grid.t_max);
    if (!(t_max > 0.0)) throw ConfigError("t_max must be positive");
    std::size_t cells = sc.grid.cells;
    double h = sc.grid.h;
    if (options.cells) {
        cells = *options.cells;
    } else if (options.h) {
        cells = 0;
        h = *options.h;
    }
    if (cells > 0) {
        const double span = map.periodic() ? map.vartheta_period() : map.vartheta_back() - map.vartheta_front();
        h = span / static_cast<double>(cells);
    }
    return make_transport_grid(map, h, t_max);
}

namespace {

std::filesystem::path output_dir(const Scenario& sc, const CommandOptions& options)
{
    std::filesystem::path dir = options.out.value_or(sc.output.directory);
    std::filesystem::create_directories(dir);
    return dir;
}

std::ofstream open_csv(const std::filesystem::path& path)
{
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write " + path.string());
    f << std::setprecision(17);
    return f;
}

std::string verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

OriClosedForm closed_form(const Scenario& sc, const StringInitialData& data, const CoordinateMap& map,
                          const TransportGrid& grid)
{
    OriOptions opts;
    opts.eps_log = sc.thresholds.log;
    opts.l1_threshold = sc.thresholds.l1;
    // twice the lattice resolution keeps every lattice and half-lattice point on a table node
    const std::size_t cells = map.periodic() ? 2 * grid.nodes : 2 * (grid.nodes - 1);
    return OriClosedForm::from_initial_data(sc.model, data, map, cells, opts);
}

void print_physicality(const PhysicalityReport& r, std::ostream& out)
{
    out << "physicality: " << verdict(r.ok()) << "\n";
    out << "  strict ordering: " << (r.strict_ordering ? "yes" : "no");
    if (r.ordering_violation) out << " (first violation at node " << *r.ordering_violation << ")";
    out << "\n  separated speeds: " << (r.separated ? "yes" : "no");
    if (r.separation_violation)
        out << " (Lambda_-(node " << r.separation_violation->first << ") >= Lambda_+(node "
            << r.separation_violation->second << "))";
    out << "\n";
}

void print_existence(const ExistenceReport& r, bool periodic, std::ostream& out)
{
    out << "existence: " << verdict(r.pass);
    if (r.pass) {
        out << " up to t = " << r.t_scanned;
        if (periodic)
            out << " for all vartheta (one period [" << r.vartheta_lo << ", " << r.vartheta_hi << "))";
        else
            out << " on the triangle over [" << r.vartheta_lo << ", " << r.vartheta_hi << "]";
        out << "\n";
    } else {
        out << "\n  t* = " << std::setprecision(10) << r.violation->t_star << std::setprecision(6)
            << "\n  violating vartheta = " << r.violation->vartheta << "\n  bracket = [" << r.violation->bracket_lo
            << ", " << r.violation->bracket_hi << "]\n";
    }
    out << "  minimum log argument = " << r.min_argument << " over " << r.checks << " checks\n";
}

void print_flags(const CorollaryFlags& f, std::ostream& out)
{
    auto b = [](bool v) { return v ? "true" : "false"; };
    out << "corollary flags:\n"
        << "  psi3_nonpositive = " << b(f.psi3_nonpositive) << "\n"
        << "  p30_nonpositive = " << b(f.p30_nonpositive) << "\n"
        << "  q30_nonpositive = " << b(f.q30_nonpositive) << "\n"
        << "  l1_small_p = " << b(f.l1_small_p) << " (" << f.l1_p << ")\n"
        << "  l1_small_q = " << b(f.l1_small_q) << " (" << f.l1_q << ")\n"
        << "  period_drift_ok = " << b(f.period_drift_ok) << " (" << f.period_drift << ")\n"
        << "  l1_small = " << b(f.l1_small()) << "\n";
}

json flags_json(const CorollaryFlags& f)
{
    return {{"psi3_nonpositive", f.psi3_nonpositive}, {"p30_nonpositive", f.p30_nonpositive},
            {"q30_nonpositive", f.q30_nonpositive},   {"l1_small_p", f.l1_small_p},
            {"l1_small_q", f.l1_small_q},             {"period_drift_ok", f.period_drift_ok},
            {"l1_p", f.l1_p},                         {"l1_q", f.l1_q},
            {"period_drift", f.period_drift}};
}

json existence_json(const ExistenceReport& r)
{
    json j{{"pass", r.pass},
           {"t_scanned", r.t_scanned},
           {"vartheta_lo", r.vartheta_lo},
           {"vartheta_hi", r.vartheta_hi},
           {"triangle", r.triangle},
           {"min_argument", r.min_argument}};
    if (r.violation) {
        j["t_star"] = r.violation->t_star;
        j["vartheta_star"] = r.violation->vartheta;
    }
    return j;
}

json grid_json(const TransportGrid& g)
{
    return {{"h", g.h},           {"nodes", g.nodes},     {"levels", g.levels}, {"t_max", g.t(g.levels)},
            {"periodic", g.periodic}, {"period", g.period}, {"vartheta0", g.vartheta0}};
}

json thresholds_json(const Thresholds& t)
{
    return {{"timelike", t.timelike}, {"g11", t.g11}, {"log", t.log}, {"l1", t.l1}};
}

json blowup_json(const BlowUpReport& r)
{
    return {{"t", r.t}, {"vartheta", r.vartheta}, {"component", r.component}, {"quantity", r.quantity},
            {"value", r.value}};
}

void write_manifest(const std::filesystem::path& dir, const json& manifest)
{
    std::ofstream f(dir / "manifest.json");
    if (!f) throw ConfigError("cannot write manifest in " + dir.string());
    f << manifest.dump(2) << "\n";
}

/// Max |general - closed form| of u^3 over the stored levels.
double closed_form_error(const OriClosedForm& cf, const LightconeField& field)
{
    double err = 0.0;
    for (const LightconeLevel& l : field.levels) {
        for (std::size_t k = 0; k < l.nodes.size(); ++k) {
            const U3Value v = cf.u3(l.t, field.grid.vartheta(l.first + k));
            err = std::max(err, v.blowup ? INFINITY : std::abs(v.value - l.nodes[k].u(3)));
        }
    }
    return err;
}

/// Max |general - staged| per component over the levels both fields store.
std::array<double, 4> staged_error(const LightconeField& general, const LightconeField& staged)
{
    std::array<double, 4> err{0.0, 0.0, 0.0, 0.0};
    for (const LightconeLevel& l : staged.levels) {
        const LightconeLevel* g = general.find(l.level);
        if (g == nullptr) continue;
        for (std::size_t k = 0; k < l.nodes.size(); ++k) {
            const Vec d = (l.nodes[k].u - g->at(l.first + k).u).cwiseAbs();
            for (int c = 0; c < 4; ++c) err[static_cast<std::size_t>(c)] = std::max(err[static_cast<std::size_t>(c)], d(c));
        }
    }
    return err;
}

void write_snapshot(const std::filesystem::path& path, const MetricModel& model, const LightconeLevel& level,
                    const TransportGrid& grid, const InverseMap* inverse)
{
    const int dim = model.dimension();
    std::ofstream f = open_csv(path);
    f << "t,vartheta,theta";
    for (const char* name : {"u", "p", "q"})
        for (int c = 0; c < dim; ++c) f << "," << name << c;
    f << ",null_residual_p,null_residual_q\n";
    for (std::size_t k = 0; k < level.nodes.size(); ++k) {
        const std::size_t j = level.first + k;
        const NodeState& s = level.nodes[k];
        const double theta = inverse ? inverse->theta(level.level, j) : NAN;
        f << level.t << "," << grid.vartheta(j) << "," << theta;
        for (const Vec* v : {&s.u, &s.p, &s.q})
            for (int c = 0; c < dim; ++c) f << "," << (*v)(c);
        const MetricTensor g = model.metric(s.u);
        f << "," << std::abs(s.p.dot(g * s.p)) << "," << std::abs(s.q.dot(g * s.q)) << "\n";
    }
}

}  // namespace

// ---------------------------------------------------------------------------

int cmd_check(const Scenario& sc, const CommandOptions& options, std::ostream& out)
{
    out << "scenario: " << sc.name << "\nmetric: " << sc.model->tag() << "\n";
    const StringInitialData data = make_initial_data(sc);
    const PhysicalityReport phys = check_physicality(data);
    print_physicality(phys, out);
    if (!phys.ok()) return kExitPhysicality;
    if (!sc.is_ori()) return kExitOk;

    const CoordinateMap map = CoordinateMap::build(data);
    const TransportGrid grid = scenario_grid(sc, map, options);
    const OriClosedForm cf = closed_form(sc, data, map, grid);
    const ExistenceReport report = existence_check(cf, {grid.t(grid.levels), grid.h});
    print_existence(report, cf.periodic(), out);
    print_flags(corollary_flags(cf), out);

    if (options.out) {
        const std::filesystem::path dir = output_dir(sc, options);
        std::ofstream f = open_csv(dir / "log_argument.csv");
        f << "t,vartheta,argument\n";
        const std::size_t stride = std::max<std::size_t>(1, grid.levels / 256);
        for (std::size_t level = 0; level <= grid.levels; level += stride) {
            const double t = grid.t(level);
            for (std::size_t j = 0; j < grid.nodes; ++j) {
                const double v = grid.vartheta(j);
                if (!cf.periodic() && (v - t < cf.lo() || v + t > cf.hi())) continue;
                f << t << "," << v << "," << cf.argument_fast(t, v) << "\n";
            }
        }
    }
    return report.pass ? kExitOk : kExitExistence;
}

int cmd_simulate(const Scenario& sc, const CommandOptions& options, std::ostream& out)
{
    const StringInitialData data = make_initial_data(sc);
    const PhysicalityReport phys = check_physicality(data);
    if (!phys.ok()) {
        print_physicality(phys, out);
        return kExitPhysicality;
    }
    const CoordinateMap map = CoordinateMap::build(data);
    const TransportGrid grid = scenario_grid(sc, map, options);
    const std::filesystem::path dir = output_dir(sc, options);

    json manifest{{"scenario", sc.name},
                  {"metric", sc.model->tag()},
                  {"grid", grid_json(grid)},
                  {"thresholds", thresholds_json(sc.thresholds)}};

    std::optional<OriClosedForm> cf;
    if (sc.is_ori()) {
        cf = closed_form(sc, data, map, grid);
        const ExistenceReport report = existence_check(*cf, {grid.t(grid.levels), grid.h});
        manifest["existence"] = existence_json(report);
        manifest["corollary_flags"] = flags_json(corollary_flags(*cf));
    }

    LightconeOptions lo;
    lo.store_stride = sc.output.snapshot_stride == 0 ? std::max<std::size_t>(1, grid.levels) : sc.output.snapshot_stride;
    LightconeSolution sol;
    std::optional<InverseMap> inverse;
    try {
        const VarthetaSpeedFields fields = solve_riemann_invariants(map, grid);
        inverse = build_inverse_map(map, fields);
        manifest["inverse_map_path_residual"] = inverse->path_residual();
        sol = solve_lightcone(*sc.model, data, map, grid, lo);
    } catch (const BlowUpError& e) {
        manifest["status"] = "blowup";
        manifest["blowup"] = blowup_json(e.report());
        write_manifest(dir, manifest);
        throw;
    } catch (const ConsistencyError& e) {
        manifest["status"] = "consistency";
        manifest["message"] = e.what();
        write_manifest(dir, manifest);
        throw;
    }

    json snapshots = json::array();
    for (const LightconeLevel& level : sol.field.levels) {
        std::ostringstream name;
        name << "snapshot_" << std::setw(6) << std::setfill('0') << level.level << ".csv";
        write_snapshot(dir / name.str(), *sc.model, level, grid, inverse ? &*inverse : nullptr);
        snapshots.push_back(name.str());
    }
    manifest["snapshots"] = snapshots;
    manifest["monitors"] = {{"null_p", sol.monitors.null_p},
                            {"null_q", sol.monitors.null_q},
                            {"null_relative", sol.monitors.null_relative},
                            {"derivative_gap", sol.monitors.derivative_gap}};

    if (cf) {
        manifest["closed_form_u3_max_error"] = closed_form_error(*cf, sol.field);
        const auto* ori = dynamic_cast<const OriMetric*>(sc.model.get());
        if (ori != nullptr && ori->is_quadratic()) {
            const LightconeField staged = solve_staged(ori->quadratic_coefficient(), *cf,
                                                       initialize_lightcone(*sc.model, data, map, grid), grid,
                                                       data.domain.winding, lo);
            const auto err = staged_error(sol.field, staged);
            manifest["staged_max_difference"] = err;
        }
    }
    manifest["status"] = "ok";
    write_manifest(dir, manifest);
    out << "simulated " << grid.levels << " levels of " << grid.nodes << " nodes (h = " << grid.h << ")\n"
        << "max null residual = " << std::max(sol.monitors.null_p, sol.monitors.null_q) << "\n"
        << "wrote " << snapshots.size() << " snapshots to " << dir.string() << "\n";
    return kExitOk;
}

int cmd_compare(const Scenario& sc, const CommandOptions& options, std::ostream& out)
{
    if (!sc.is_ori()) throw ConfigError("compare needs an Ori scenario");
    const auto* ori = dynamic_cast<const OriMetric*>(sc.model.get());
    const bool staged = ori != nullptr && ori->is_quadratic();
    const StringInitialData data = make_initial_data(sc);
    const PhysicalityReport phys = check_physicality(data);
    if (!phys.ok()) {
        print_physicality(phys, out);
        return kExitPhysicality;
    }
    const CoordinateMap map = CoordinateMap::build(data);
    TransportGrid base = scenario_grid(sc, map, options);

    struct Row {
        double h;
        std::array<double, 4> err;
    };
    std::vector<Row> rows;
    for (int r = 0; r < sc.grid.refinements; ++r) {
        CommandOptions level_opts = options;
        const double span = map.periodic() ? map.vartheta_period() : map.vartheta_back() - map.vartheta_front();
        const auto cells = static_cast<std::size_t>(std::llround(span / base.h)) << r;
        level_opts.cells = cells;
        const TransportGrid grid = scenario_grid(sc, map, level_opts);
        const OriClosedForm cf = closed_form(sc, data, map, grid);
        LightconeOptions lo;
        const LightconeSolution sol = solve_lightcone(*sc.model, data, map, grid, lo);
        Row row{grid.h, {NAN, NAN, NAN, NAN}};
        if (staged) {
            const LightconeField st = solve_staged(ori->quadratic_coefficient(), cf,
                                                   initialize_lightcone(*sc.model, data, map, grid), grid,
                                                   data.domain.winding, lo);
            row.err = staged_error(sol.field, st);
        }
        row.err[3] = closed_form_error(cf, sol.field);
        rows.push_back(row);
    }

    out << "component errors (general solver against " << (staged ? "staged solves and " : "")
        << "closed-form u3)\n";
    out << std::setw(14) << "h";
    for (int c = 0; c < 4; ++c) out << std::setw(14) << ("u" + std::to_string(c));
    out << "\n" << std::scientific << std::setprecision(4);
    for (const Row& row : rows) {
        out << std::setw(14) << row.h;
        for (double e : row.err) out << std::setw(14) << e;
        out << "\n";
    }
    out << std::fixed << std::setprecision(3);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        out << std::setw(14) << "order";
        for (std::size_t c = 0; c < 4; ++c)
            out << std::setw(14) << std::log2(rows[r - 1].err[c] / rows[r].err[c]);
        out << "\n";
    }
    if (options.out) {
        const std::filesystem::path dir = output_dir(sc, options);
        std::ofstream f = open_csv(dir / "compare.csv");
        f << "h,e0,e1,e2,e3\n";
        for (const Row& row : rows) f << row.h << "," << row.err[0] << "," << row.err[1] << "," << row.err[2] << "," << row.err[3] << "\n";
    }
    return kExitOk;
}

int cmd_speeds(const Scenario& sc, const CommandOptions& options, std::ostream& out)
{
    const StringInitialData data = make_initial_data(sc);
    const std::filesystem::path dir = output_dir(sc, options);
    {
        std::ofstream f = open_csv(dir / "speeds_initial.csv");
        f << "theta,Lambda_minus,Lambda_plus,lagrangian,g00,g01,g11\n";
        for (std::size_t i = 0; i < data.size(); ++i) {
            const InducedMetric& im = data.induced[i];
            f << data.theta[i] << "," << data.lambda_minus[i] << "," << data.lambda_plus[i] << ","
              << data.lagrangian[i] << "," << im.g00 << "," << im.g01 << "," << im.g11 << "\n";
        }
    }
    const PhysicalityReport phys = check_physicality(data);
    print_physicality(phys, out);
    if (!phys.ok()) return kExitPhysicality;

    const CoordinateMap map = CoordinateMap::build(data);
    const TransportGrid grid = scenario_grid(sc, map, options);
    const VarthetaSpeedFields fields = solve_riemann_invariants(map, grid);
    const InverseMap inverse = build_inverse_map(map, fields);
    const ThetaSpeedFields theta_fields = to_theta_coordinates(map, inverse, data.theta);
    const std::size_t stride = std::max<std::size_t>(1, sc.output.snapshot_stride);
    std::ofstream f = open_csv(dir / "speeds_field.csv");
    f << "t,theta,lambda_minus,lambda_plus\n";
    for (std::size_t level = 0; level <= grid.levels; level += stride) {
        for (std::size_t i = 0; i < data.size(); ++i) {
            f << grid.t(level) << "," << data.theta[i] << "," << theta_fields.lambda_minus(level, i) << ","
              << theta_fields.lambda_plus(level, i) << "\n";
        }
    }
    out << "wrote speeds_initial.csv and speeds_field.csv to " << dir.string() << "\n";
    return kExitOk;
}

int run_command(const std::string& command, const std::filesystem::path& scenario_path, const CommandOptions& options,
                std::ostream& out, std::ostream& err)
{
    try {
        const Scenario sc = load_scenario(scenario_path);
        if (command == "check") return cmd_check(sc, options, out);
        if (command == "simulate") return cmd_simulate(sc, options, out);
        if (command == "compare") return cmd_compare(sc, options, out);
        if (command == "speeds") return cmd_speeds(sc, options, out);
        err << "unknown command '" << command << "'\n";
        return kExitParse;
    } catch (const BlowUpError& e) {
        const BlowUpReport& r = e.report();
        err << "blow-up: " << e.what() << "\n  t = " << r.t << "\n  vartheta = " << r.vartheta
            << "\n  component = " << r.component << "\n  quantity = " << r.quantity << "\n  value = " << r.value
            << "\n";
        return kExitBlowUp;
    } catch (const ConsistencyError& e) {
        err << "consistency: " << e.what() << "\n";
        return kExitConsistency;
    } catch (const CausalityError& e) {
        err << "physicality: " << e.what() << "\n";
        return kExitPhysicality;
    } catch (const DegeneracyError& e) {
        err << "physicality: " << e.what() << "\n";
        return kExitPhysicality;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitParse;
    }
}

}  // namespace relstring
