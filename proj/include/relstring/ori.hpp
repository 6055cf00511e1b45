#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "relstring/lightcone.hpp"
#include "relstring/metrics.hpp"
#include "relstring/transport.hpp"
#include "relstring/worldsheet.hpp"

namespace relstring {

struct OriOptions {
    double eps_log = 1e-12;       // log arguments at or below this count as blow-up
    double quad_tol = 1e-10;      // absolute tolerance of each cumulative table
    double l1_threshold = 0.1;    // smallness threshold of the L1 corollary
};

/// Which integral form evaluates the log argument of u^3.
enum class Route {
    psi,  // psi_bar and phi_bar at both ends of the base interval
    xi,   // integrating u^3_eta along xi: p_bar_0 weights
    eta,  // integrating u^3_xi along eta: q_bar_0 weights
};

/// Log argument and the u^3 value it produces.
struct U3Value {
    double argument = 0.0;
    double value = 0.0;
    bool blowup = false;  // argument <= eps_log; value is then meaningless
};

/// u^3 with its exact null derivatives u^3_eta and u^3_xi.
struct U3Partials {
    double u = 0.0;
    double p = 0.0;  // u^3_eta = u^3_t - u^3_vartheta
    double q = 0.0;  // u^3_xi  = u^3_t + u^3_vartheta
    double argument = 0.0;
    bool blowup = false;
};

/// Closed-form u^3 for the Ori space-time in the (t, vartheta) coordinates. The initial data are
/// phi_bar (position), p_bar_0 and q_bar_0 (null derivatives); psi_bar = (p0 + q0)/2.
/// Cumulative tables of psi_bar w, p0 w and q0 w with w = exp(-phi_bar/2) make every integral a
/// table difference plus at most two partial cells.
class OriClosedForm {
public:
    using Fn = std::function<double(double)>;

    /// Periodic data with the given period in vartheta; `table_nodes` cells per period starting at vartheta0.
    static OriClosedForm periodic(Fn phi, Fn p0, Fn q0, double vartheta0, double period, std::size_t table_nodes,
                                  const OriOptions& options = {});
    /// Data on the window [lo, hi].
    static OriClosedForm line(Fn phi, Fn p0, Fn q0, double lo, double hi, std::size_t table_intervals,
                              const OriOptions& options = {});

    /// Builds p0 = psi - phi', q0 = psi + phi' from vartheta-coordinate data.
    static std::pair<Fn, Fn> null_data(Fn phi_prime, Fn psi);

    /// The single conversion from original-coordinate data: phi_bar = phi^3 o Theta0^{-1} and p_bar_0, q_bar_0
    /// from the data at theta* = Theta0^{-1}(vartheta). Throws ConfigError when u^3 winds.
    static OriClosedForm from_initial_data(std::shared_ptr<const MetricModel> model, const StringInitialData& data,
                                           const CoordinateMap& map, std::size_t table_nodes,
                                           const OriOptions& options = {});

    double phi(double s) const { return phi_(s); }
    double p0(double s) const { return p0_(s); }
    double q0(double s) const { return q0_(s); }
    double psi(double s) const { return 0.5 * (p0_(s) + q0_(s)); }
    double phi_prime(double s) const { return 0.5 * (q0_(s) - p0_(s)); }

    bool periodic() const { return periodic_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    double period() const { return period_; }
    double table_step() const { return step_; }
    const OriOptions& options() const { return options_; }

    /// Integral of the route's weighted integrand over [a, b]: exact up to the quadrature tolerance.
    double integral(Route route, double a, double b) const;
    /// Same integral from the table with cubic Hermite interpolation (slopes are the integrand).
    double integral_fast(Route route, double a, double b) const;

    /// Log argument at (t, vartheta); the exact and table-only variants.
    double argument(double t, double vartheta, Route route = Route::psi) const;
    double argument_fast(double t, double vartheta) const;

    U3Value u3(double t, double vartheta, Route route = Route::psi) const;
    U3Partials partials(double t, double vartheta) const;

    /// Throws WindowError when the base interval [vartheta - t, vartheta + t] leaves a line window.
    void require_inside(double t, double vartheta) const;

private:
    struct Table {
        std::vector<double> cumulative;  // one entry per table node, last one at the end of the period or window
        std::vector<double> integrand;
    };
    struct NodeValues {
        double phi, w, p0, q0;
    };

    void build_tables();
    double integrand(Route route, double s) const;
    double weight(double s) const;
    /// Table node index when s sits on a node (periodic indices reduced to one period).
    std::optional<std::size_t> node_of(double s) const;
    NodeValues values_at(double s) const;
    double antiderivative(Route route, double s, bool fast) const;
    const Table& table(Route route) const;

    Fn phi_, p0_, q0_;
    bool periodic_ = false;
    double lo_ = 0.0, hi_ = 0.0, period_ = 0.0, step_ = 0.0;
    std::size_t cells_ = 0;
    OriOptions options_;
    std::vector<NodeValues> nodes_;
    Table psi_table_, p_table_, q_table_;
};

/// Scan lattice of existence_check: spacing in t and vartheta.
struct ExistenceScan {
    double t_max = 0.0;
    double step = 0.0;  // defaults to the closed form's table step when 0
};

struct ExistenceViolation {
    double t_star = 0.0;      // earliest violating time, bisected on the argument sign
    double vartheta = 0.0;
    double bracket_lo = 0.0;  // lattice times bracketing the first violation
    double bracket_hi = 0.0;
};

struct ExistenceReport {
    bool pass = true;
    double t_scanned = 0.0;  // largest scanned t
    double vartheta_lo = 0.0;
    double vartheta_hi = 0.0;
    bool triangle = false;   // line windows: only the triangle of determinacy was scanned
    std::size_t checks = 0;
    double min_argument = 0.0;
    std::optional<ExistenceViolation> violation;
};

/// Tests the strict inequality of the existence criterion on the scan lattice (one period for
/// periodic data, the triangle of determinacy for a line window). Each check is O(1) from the
/// cumulative table; the first failure is refined by bisection to 1e-6.
ExistenceReport existence_check(const OriClosedForm& cf, const ExistenceScan& scan);

struct CorollaryFlags {
    bool psi3_nonpositive = false;
    bool p30_nonpositive = false;
    bool q30_nonpositive = false;
    bool l1_small_p = false;      // ||p_bar_0||_L1 <= threshold
    bool l1_small_q = false;      // ||q_bar_0||_L1 <= threshold
    bool period_drift_ok = true;  // periodic data: integral of psi_bar w over a period is <= 0
    double l1_p = 0.0;
    double l1_q = 0.0;
    double period_drift = 0.0;

    /// Smallness corollary: both norms small (and no growth over periods).
    bool l1_small() const { return l1_small_p && l1_small_q && period_drift_ok; }
    bool any() const { return psi3_nonpositive || p30_nonpositive || q30_nonpositive || l1_small(); }
};

/// Sign conditions on the table nodes and trapezoid L1 norms over the period or window.
CorollaryFlags corollary_flags(const OriClosedForm& cf);

/// u^1 and u^2 from their linear equations with the closed-form u^3 coefficients
/// a u^3_eta u^3_xi (for u^1) and -a u^3_eta u^3_xi (for u^2). `initial` is a full four-component
/// t = 0 level; the result has dimension 2 (components 1, 2) and keeps every level.
LightconeSolution solve_u12(double a, const OriClosedForm& cf, const LightconeLevel& initial, const TransportGrid& grid,
                            const Vec& winding, const LightconeOptions& options = {});

/// u^0 from its linear equation with u^1, u^2 from `stage1` and u^3 from the closed form. Dimension 1.
LightconeSolution solve_u0(double a, const OriClosedForm& cf, const LightconeField& stage1,
                           const LightconeLevel& initial, const TransportGrid& grid, const Vec& winding,
                           const LightconeOptions& options = {});

/// Four-component field assembled from the staged solves and the closed form, on the stored levels of `stage0`.
LightconeField assemble_staged(const OriClosedForm& cf, const LightconeField& stage0, const LightconeField& stage1);

/// Whole staged pipeline for the quadratic Ori model.
LightconeField solve_staged(double a, const OriClosedForm& cf, const LightconeLevel& initial,
                            const TransportGrid& grid, const Vec& winding, const LightconeOptions& options = {});

}  // namespace relstring
