#include "relstring/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "relstring/errors.hpp"

namespace relstring {

using nlohmann::json;

double ExpressionTerm::operator()(double theta) const
{
    if (family == "constant") return offset;
    if (family == "linear") return offset + slope * theta;
    if (family == "sine") return offset + slope * theta + amplitude * std::sin(wavenumber * theta + phase);
    if (family == "cosine") return offset + slope * theta + amplitude * std::cos(wavenumber * theta + phase);
    if (family == "gaussian") {
        const double z = (theta - center) / width;
        return offset + amplitude * std::exp(-0.5 * z * z);
    }
    throw ConfigError("unknown expression family '" + family + "'");
}

double ComponentExpression::operator()(double theta) const
{
    double sum = 0.0;
    for (const ExpressionTerm& t : terms) sum += t(theta);
    return sum;
}

namespace {

void require_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where)
{
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

double number(const json& obj, const std::string& key, double fallback, const std::string& where)
{
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw ConfigError(where + "." + key + " must be a number");
    return obj[key].get<double>();
}

double required_number(const json& obj, const std::string& key, const std::string& where)
{
    if (!obj.contains(key)) throw ConfigError(where + "." + key + " is required");
    return number(obj, key, 0.0, where);
}

ExpressionTerm parse_term(const json& j, const std::string& where)
{
    ExpressionTerm t;
    if (j.is_number()) {
        t.family = "constant";
        t.offset = j.get<double>();
        return t;
    }
    require_keys(j, {"family", "amplitude", "wavenumber", "phase", "offset", "slope", "center", "width", "value"},
                 where);
    if (!j.contains("family") || !j["family"].is_string()) throw ConfigError(where + ".family is required");
    t.family = j["family"].get<std::string>();
    static const std::set<std::string> families{"constant", "linear", "sine", "cosine", "gaussian"};
    if (!families.count(t.family)) throw ConfigError("unknown expression family '" + t.family + "' in " + where);
    t.amplitude = number(j, "amplitude", 0.0, where);
    t.wavenumber = number(j, "wavenumber", 1.0, where);
    t.phase = number(j, "phase", 0.0, where);
    t.offset = number(j, "offset", number(j, "value", 0.0, where), where);
    t.slope = number(j, "slope", 0.0, where);
    t.center = number(j, "center", 0.0, where);
    t.width = number(j, "width", 1.0, where);
    if (t.family == "gaussian" && !(t.width > 0.0)) throw ConfigError(where + ".width must be positive");
    return t;
}

std::vector<ComponentExpression> parse_components(const json& j, int dim, const std::string& where)
{
    if (!j.is_array() || static_cast<int>(j.size()) != dim)
        throw ConfigError(where + " must list " + std::to_string(dim) + " components");
    std::vector<ComponentExpression> out(static_cast<std::size_t>(dim));
    for (int c = 0; c < dim; ++c) {
        const json& entry = j[static_cast<std::size_t>(c)];
        const std::string at = where + "[" + std::to_string(c) + "]";
        if (entry.is_array()) {
            for (std::size_t k = 0; k < entry.size(); ++k)
                out[static_cast<std::size_t>(c)].terms.push_back(parse_term(entry[k], at));
        } else {
            out[static_cast<std::size_t>(c)].terms.push_back(parse_term(entry, at));
        }
    }
    return out;
}

}  // namespace

HarmonicProfile make_profile(const std::string& name, const json& params)
{
    const std::string where = "metric.params";
    if (name == "quadratic") {
        require_keys(params, {"a"}, where);
        HarmonicProfile p = quadratic_profile(number(params, "a", 1.0, where));
        return p;
    }
    if (name == "cubic") {
        require_keys(params, {"b"}, where);
        const double b = number(params, "b", 1.0, where);
        HarmonicProfile p;
        p.name = "cubic";
        p.f = [b](double x, double y, double) { return b * (x * x * x - 3.0 * x * y * y); };
        p.f_x = [b](double x, double y, double) { return 3.0 * b * (x * x - y * y); };
        p.f_y = [b](double x, double y, double) { return -6.0 * b * x * y; };
        p.f_z = [](double, double, double) { return 0.0; };
        return p;
    }
    if (name == "exp_sin") {
        require_keys(params, {"c", "k", "m"}, where);
        const double c = number(params, "c", 1.0, where);
        const double k = number(params, "k", 1.0, where);
        const double m = number(params, "m", 0.0, where);
        HarmonicProfile p;
        p.name = "exp_sin";
        p.f = [=](double x, double y, double z) { return c * std::exp(k * x) * std::sin(k * y) * (1.0 + m * std::sin(z)); };
        p.f_x = [=](double x, double y, double z) {
            return c * k * std::exp(k * x) * std::sin(k * y) * (1.0 + m * std::sin(z));
        };
        p.f_y = [=](double x, double y, double z) {
            return c * k * std::exp(k * x) * std::cos(k * y) * (1.0 + m * std::sin(z));
        };
        p.f_z = [=](double x, double y, double z) { return c * m * std::exp(k * x) * std::sin(k * y) * std::cos(z); };
        return p;
    }
    if (name == "saddle_xy") {
        // deliberately non-harmonic registry entry, used to exercise the harmonicity gate
        require_keys(params, {"a"}, where);
        const double a = number(params, "a", 1.0, where);
        HarmonicProfile p;
        p.name = "saddle_xy";
        p.f = [a](double x, double y, double) { return a * (x * x + y * y); };
        p.f_x = [a](double x, double, double) { return 2.0 * a * x; };
        p.f_y = [a](double, double y, double) { return 2.0 * a * y; };
        p.f_z = [](double, double, double) { return 0.0; };
        return p;
    }
    throw ConfigError("unknown Ori profile '" + name + "'");
}

Scenario parse_scenario(const json& doc, const std::filesystem::path& base_dir)
{
    require_keys(doc, {"name", "metric", "domain", "initial_data", "grid", "output", "thresholds"}, "scenario");
    Scenario sc;
    sc.name = doc.value("name", std::string("scenario"));

    // metric
    if (!doc.contains("metric")) throw ConfigError("scenario.metric is required");
    const json& metric = doc["metric"];
    require_keys(metric, {"model", "n", "a", "profile", "params", "probe_width"}, "metric");
    if (!metric.contains("model") || !metric["model"].is_string()) throw ConfigError("metric.model is required");
    sc.metric_model = metric["model"].get<std::string>();
    if (sc.metric_model == "minkowski") {
        const double n = number(metric, "n", 3.0, "metric");
        if (n < 1 || n + 1 > kMaxDim || n != std::floor(n)) throw ConfigError("metric.n must be an integer in [1, 7]");
        sc.model = std::make_shared<MinkowskiMetric>(static_cast<int>(n));
    } else if (sc.metric_model == "ori_quadratic") {
        sc.ori_a = number(metric, "a", 1.0, "metric");
        sc.model = OriMetric::quadratic(sc.ori_a);
    } else if (sc.metric_model == "ori_general") {
        if (!metric.contains("profile") || !metric["profile"].is_string())
            throw ConfigError("metric.profile is required for ori_general");
        sc.profile_name = metric["profile"].get<std::string>();
        sc.probe_width = number(metric, "probe_width", 2.0, "metric");
        HarmonicProfile profile = make_profile(sc.profile_name, metric.value("params", json::object()));
        require_harmonic(profile, sc.probe_width);
        sc.model = std::make_shared<OriMetric>(std::move(profile));
    } else {
        throw ConfigError("unknown metric model '" + sc.metric_model + "'");
    }
    const int dim = sc.model->dimension();

    // domain
    if (!doc.contains("domain")) throw ConfigError("scenario.domain is required");
    const json& domain = doc["domain"];
    require_keys(domain, {"kind", "length", "origin", "min", "max", "winding"}, "domain");
    const std::string kind = domain.value("kind", std::string("periodic"));
    if (kind == "periodic") {
        const double length = required_number(domain, "length", "domain");
        if (!(length > 0.0)) throw ConfigError("domain.length must be positive");
        sc.theta_min = number(domain, "origin", 0.0, "domain");
        sc.theta_max = sc.theta_min + length;
        Vec winding;
        if (domain.contains("winding")) {
            const json& w = domain["winding"];
            if (!w.is_array() || static_cast<int>(w.size()) != dim)
                throw ConfigError("domain.winding must list " + std::to_string(dim) + " numbers");
            winding = Vec(dim);
            for (int c = 0; c < dim; ++c) winding(c) = w[static_cast<std::size_t>(c)].get<double>();
        }
        sc.domain = Domain::periodic(length, winding);
    } else if (kind == "line") {
        sc.theta_min = required_number(domain, "min", "domain");
        sc.theta_max = required_number(domain, "max", "domain");
        if (!(sc.theta_max > sc.theta_min)) throw ConfigError("domain.max must exceed domain.min");
        sc.domain = Domain::line();
    } else {
        throw ConfigError("domain.kind must be 'periodic' or 'line'");
    }

    // initial data
    if (!doc.contains("initial_data")) throw ConfigError("scenario.initial_data is required");
    const json& init = doc["initial_data"];
    require_keys(init, {"samples", "phi", "psi", "csv"}, "initial_data");
    if (init.contains("csv")) {
        if (init.contains("phi") || init.contains("psi"))
            throw ConfigError("initial_data takes either csv or phi/psi expressions");
        sc.csv_path = base_dir / init["csv"].get<std::string>();
        if (!std::filesystem::exists(sc.csv_path))
            throw ConfigError("initial data file not found: " + sc.csv_path.string());
    } else {
        if (!init.contains("phi") || !init.contains("psi")) throw ConfigError("initial_data needs phi and psi");
        sc.phi_expr = parse_components(init["phi"], dim, "initial_data.phi");
        sc.psi_expr = parse_components(init["psi"], dim, "initial_data.psi");
        const double samples = number(init, "samples", 512.0, "initial_data");
        if (samples < 8 || samples != std::floor(samples)) throw ConfigError("initial_data.samples must be an integer >= 8");
        sc.samples = static_cast<std::size_t>(samples);
    }

    // grid
    const json grid = doc.value("grid", json::object());
    require_keys(grid, {"h", "cells", "t_max", "refinements"}, "grid");
    sc.grid.h = number(grid, "h", 0.0, "grid");
    const double cells = number(grid, "cells", 0.0, "grid");
    if (cells < 0 || cells != std::floor(cells)) throw ConfigError("grid.cells must be a non-negative integer");
    sc.grid.cells = static_cast<std::size_t>(cells);
    if (sc.grid.cells == 0 && !(sc.grid.h > 0.0)) throw ConfigError("grid needs a positive h or cells");
    sc.grid.t_max = number(grid, "t_max", 1.0, "grid");
    if (!(sc.grid.t_max > 0.0)) throw ConfigError("grid.t_max must be positive");
    sc.grid.refinements = static_cast<int>(number(grid, "refinements", 3.0, "grid"));
    if (sc.grid.refinements < 2) throw ConfigError("grid.refinements must be at least 2");

    // output
    const json output = doc.value("output", json::object());
    require_keys(output, {"directory", "snapshot_stride"}, "output");
    sc.output.directory = output.value("directory", std::string("out"));
    if (sc.output.directory.is_relative()) sc.output.directory = base_dir / sc.output.directory;
    const double stride = number(output, "snapshot_stride", 0.0, "output");
    if (stride < 0 || stride != std::floor(stride)) throw ConfigError("output.snapshot_stride must be a non-negative integer");
    sc.output.snapshot_stride = static_cast<std::size_t>(stride);

    // thresholds
    const json th = doc.value("thresholds", json::object());
    require_keys(th, {"timelike", "g11", "log", "l1"}, "thresholds");
    sc.thresholds.timelike = number(th, "timelike", 1e-10, "thresholds");
    sc.thresholds.g11 = number(th, "g11", 1e-12, "thresholds");
    sc.thresholds.log = number(th, "log", 1e-12, "thresholds");
    sc.thresholds.l1 = number(th, "l1", 0.1, "thresholds");
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("scenario file " + path.string() + " is not valid JSON: " + e.what());
    }
    try {
        return parse_scenario(doc, path.parent_path());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario schema error: ") + e.what());
    }
}

namespace {

void read_csv(const std::filesystem::path& path, int dim, std::vector<double>& theta, std::vector<Vec>& phi,
              std::vector<Vec>& psi)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> cells;
        std::stringstream ss(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                cells.push_back(std::stod(cell, &used));
            } catch (const std::exception&) {
                numeric = false;
                break;
            }
        }
        if (!numeric) {
            if (theta.empty()) continue;  // header
            throw ConfigError(path.string() + ":" + std::to_string(row) + ": non-numeric cell");
        }
        if (static_cast<int>(cells.size()) != 1 + 2 * dim)
            throw ConfigError(path.string() + ":" + std::to_string(row) + ": expected theta, phi0..phi"
                              + std::to_string(dim - 1) + ", psi0..psi" + std::to_string(dim - 1));
        theta.push_back(cells[0]);
        Vec p(dim), v(dim);
        for (int c = 0; c < dim; ++c) {
            p(c) = cells[static_cast<std::size_t>(1 + c)];
            v(c) = cells[static_cast<std::size_t>(1 + dim + c)];
        }
        phi.push_back(p);
        psi.push_back(v);
    }
    if (theta.size() < 5) throw ConfigError(path.string() + ": need at least five samples");
}

}  // namespace

StringInitialData make_initial_data(const Scenario& sc)
{
    const int dim = sc.model->dimension();
    std::vector<double> theta;
    std::vector<Vec> phi, psi;
    Domain domain = sc.domain;
    if (!sc.csv_path.empty()) {
        read_csv(sc.csv_path, dim, theta, phi, psi);
    } else {
        const std::size_t n = sc.samples;
        const double span = sc.theta_max - sc.theta_min;
        const double d = domain.is_periodic() ? span / static_cast<double>(n) : span / static_cast<double>(n - 1);
        for (std::size_t i = 0; i < n; ++i) {
            const double th = sc.theta_min + d * static_cast<double>(i);
            theta.push_back(th);
            Vec p(dim), v(dim);
            for (int c = 0; c < dim; ++c) {
                p(c) = sc.phi_expr[static_cast<std::size_t>(c)](th);
                v(c) = sc.psi_expr[static_cast<std::size_t>(c)](th);
            }
            phi.push_back(p);
            psi.push_back(v);
        }
        if (domain.is_periodic()) {
            Vec winding(dim);
            for (int c = 0; c < dim; ++c) {
                const auto& f = sc.phi_expr[static_cast<std::size_t>(c)];
                const auto& g = sc.psi_expr[static_cast<std::size_t>(c)];
                winding(c) = f(sc.theta_max) - f(sc.theta_min);
                if (std::abs(winding(c)) < 1e-12 * std::max(1.0, std::abs(f(sc.theta_min)))) winding(c) = 0.0;
                if (std::abs(g(sc.theta_max) - g(sc.theta_min)) > 1e-9 * std::max(1.0, std::abs(g(sc.theta_min))))
                    throw ConfigError("psi component " + std::to_string(c) + " is not periodic on the domain");
                const double d0 = f(sc.theta_min + 1e-3) - f(sc.theta_min);
                const double d1 = f(sc.theta_max + 1e-3) - f(sc.theta_max);
                if (std::abs(d1 - d0) > 1e-9) throw ConfigError("phi component " + std::to_string(c) + " is not periodic up to winding");
            }
            if (winding.cwiseAbs().maxCoeff() > 0.0) domain.winding = winding;
        }
    }
    return build_initial_data(*sc.model, std::move(theta), std::move(phi), std::move(psi), domain, sc.tolerances());
}

}  // namespace relstring
