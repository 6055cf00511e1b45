#pragma once

#include <functional>
#include <vector>

#include "relstring/interpolation.hpp"
#include "relstring/metrics.hpp"
#include "relstring/transport.hpp"
#include "relstring/worldsheet.hpp"

namespace relstring {

/// Position u and the null derivatives p = u_eta = u_t - u_vartheta, q = u_xi = u_t + u_vartheta
/// at one lattice node.
struct NodeState {
    Vec u;
    Vec p;
    Vec q;
};

/// Right-hand side F of d p / d xi = F and d q / d eta = F, evaluated at a state located at (t, vartheta).
using LightconeSource = std::function<Vec(const Vec& u, const Vec& p, const Vec& q, double t, double vartheta)>;

/// F = -Gamma^C_AB(u) p^A q^B for a metric model.
LightconeSource wave_map_source(const MetricModel& model);

/// Advances one characteristic rectangle. `west` sits at (t, vartheta - h) and `east` at
/// (t, vartheta + h); the result is the node at (t + h, vartheta). p is carried along the xi-line
/// from west, q along the eta-line from east, and u by trapezoid integration along both edges.
/// Second-order predictor-corrector: Euler predictor, one corrector with the source evaluated at
/// the predicted midpoint of each edge.
NodeState step_characteristic_rectangle(const LightconeSource& source, const NodeState& west, const NodeState& east,
                                        double h, double t, double vartheta);

NodeState step_characteristic_rectangle(const MetricModel& model, const NodeState& west, const NodeState& east,
                                        double h);

/// One stored time level of the lattice. Line domains lose one node at each end per level.
struct LightconeLevel {
    std::size_t level = 0;
    double t = 0.0;
    std::size_t first = 0;        // lattice index of the first stored node
    std::vector<NodeState> nodes;

    std::size_t last() const { return first + nodes.size() - 1; }
    const NodeState& at(std::size_t node) const { return nodes[node - first]; }
};

/// Stored levels of a run over the (t, vartheta) lattice.
struct LightconeField {
    TransportGrid grid;
    int dim = 0;
    Vec winding;  // u(t, vartheta + period) = u(t, vartheta) + winding
    std::vector<LightconeLevel> levels;

    const LightconeLevel& final_level() const { return levels.back(); }
    /// Stored level with lattice index `level`, or nullptr if it was not kept.
    const LightconeLevel* find(std::size_t level) const;
};

/// Level 0: u = phi(theta*), p = psi + Lambda_- phi', q = psi + Lambda_+ phi' at theta* = Theta0^{-1}(vartheta),
/// with the speeds recomputed from the interpolated data. Throws WindowError when theta* leaves a line window.
LightconeLevel initialize_lightcone(const MetricModel& model, const StringInitialData& data, const CoordinateMap& map,
                                    const TransportGrid& grid, const WorldsheetTolerances& tol = {});

struct LightconeOptions {
    std::size_t store_stride = 1;    // keep every k-th level; level 0 and the final level are always kept
    double blowup_magnitude = 1e8;   // |u|, |p| or |q| beyond this is a blow-up
    double null_ceiling = 1e-3;      // relative null residual ceiling
    bool check_null = true;
};

/// Per-run maxima of the invariant monitors.
struct LightconeMonitors {
    double null_p = 0.0;           // max |g(p, p)|
    double null_q = 0.0;           // max |g(q, q)|
    double null_relative = 0.0;    // max |g(p, p)| / (|p|^T |g| |p|), same for q
    double derivative_gap = 0.0;   // max |(q - p)/2 - d u / d vartheta| (central differences)
    std::vector<double> null_by_level;  // max(null_p, null_q) on each level
    bool ceiling_crossed = false;  // first crossing of the relative null ceiling
    double ceiling_t = 0.0;
    double ceiling_vartheta = 0.0;
};

struct LightconeSolution {
    LightconeField field;
    LightconeMonitors monitors;
};

/// Relative null residual |g(a, a)| / (|a|^T |g| |a|).
double relative_null_residual(const MetricTensor& g, const Vec& a);

/// Marches diagonals t = const from the given initial level. Throws BlowUpError on non-finite or
/// oversized values. When `monitor` is given the null residuals are measured in its metric. A run
/// that passes the null ceiling keeps marching (the residual rises ahead of a genuine singularity);
/// if it then finishes without a blow-up it throws ConsistencyError.
LightconeSolution solve_lightcone(const LightconeSource& source, LightconeLevel initial, const TransportGrid& grid,
                                  const Vec& winding, const LightconeOptions& options = {},
                                  const MetricModel* monitor = nullptr);

/// Full pipeline for a metric model: initialize from the data and march with -Gamma p q.
LightconeSolution solve_lightcone(const MetricModel& model, const StringInitialData& data, const CoordinateMap& map,
                                  const TransportGrid& grid, const LightconeOptions& options = {});

/// Component splines of sampled initial data (phi uses phi_theta as exact node slopes).
struct DataSplines {
    std::vector<UniformSpline> phi;
    std::vector<UniformSpline> phi_theta;
    std::vector<UniformSpline> psi;

    static DataSplines build(const StringInitialData& data);
    Vec phi_at(double theta) const;
    Vec phi_theta_at(double theta) const;
    Vec psi_at(double theta) const;
};

/// Lattice state at t = 0 for one vartheta: the data at theta* = Theta0^{-1}(vartheta) with
/// p = psi + Lambda_- phi' and q = psi + Lambda_+ phi', speeds recomputed at theta*.
NodeState initial_node(const MetricModel& model, const DataSplines& splines, const CoordinateMap& map,
                       double vartheta, const WorldsheetTolerances& tol = {});

}  // namespace relstring
