#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "relstring/metrics.hpp"
#include "relstring/worldsheet.hpp"

namespace relstring {

/// One term of a component expression: value(theta) for a registered family.
struct ExpressionTerm {
    std::string family;  // constant | linear | sine | cosine | gaussian
    double amplitude = 0.0;
    double wavenumber = 1.0;
    double phase = 0.0;
    double offset = 0.0;
    double slope = 0.0;
    double center = 0.0;
    double width = 1.0;

    double operator()(double theta) const;
};

/// Sum of terms for one component.
struct ComponentExpression {
    std::vector<ExpressionTerm> terms;
    double operator()(double theta) const;
};

struct GridSpec {
    double h = 0.0;
    std::size_t cells = 0;  // when set: lattice cells per vartheta period (or across a line window), overrides h
    double t_max = 1.0;
    int refinements = 3;  // ladder length for compare
};

struct OutputSpec {
    std::filesystem::path directory = "out";
    std::size_t snapshot_stride = 0;  // 0: first and last level only
};

struct Thresholds {
    double timelike = 1e-10;
    double g11 = 1e-12;
    double log = 1e-12;
    double l1 = 0.1;
};

/// Parsed scenario file.
struct Scenario {
    std::string name;
    std::string metric_model;  // minkowski | ori_quadratic | ori_general
    std::shared_ptr<const MetricModel> model;
    double ori_a = 0.0;        // ori_quadratic only
    std::string profile_name;  // ori_general only

    Domain domain;
    double theta_min = 0.0;  // line window, or the start of the periodic sample grid
    double theta_max = 0.0;
    double probe_width = 2.0;  // half width of the harmonicity probe box for ori_general

    // either expressions or tabulated samples
    std::vector<ComponentExpression> phi_expr;
    std::vector<ComponentExpression> psi_expr;
    std::size_t samples = 0;
    std::filesystem::path csv_path;

    GridSpec grid;
    OutputSpec output;
    Thresholds thresholds;

    bool is_ori() const { return metric_model == "ori_quadratic" || metric_model == "ori_general"; }
    WorldsheetTolerances tolerances() const { return {thresholds.timelike, thresholds.g11}; }
};

/// Harmonic profile from the registry: quadratic {a}, cubic {b}, exp_sin {c, k, m}.
HarmonicProfile make_profile(const std::string& name, const nlohmann::json& params);

/// Throws ConfigError on schema violations and missing files.
Scenario parse_scenario(const nlohmann::json& doc, const std::filesystem::path& base_dir);
Scenario load_scenario(const std::filesystem::path& path);

/// Samples (or reads) the initial data and builds the per-node functionals.
StringInitialData make_initial_data(const Scenario& scenario);

}  // namespace relstring
