#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "relstring/metrics.hpp"

namespace relstring {

/// Thresholds separating regular from degenerate worldsheet states.
struct WorldsheetTolerances {
    double timelike = 1e-10;  // Delta < -timelike * scale counts as time-like
    double g11 = 1e-12;       // |g11| below this is rejected
};

/// Position u = X, velocity v = X_t and tangent w = X_theta at one worldsheet point.
struct StateVector {
    Vec u;
    Vec v;
    Vec w;
};

struct InducedMetric {
    double g00 = 0.0;
    double g01 = 0.0;
    double g11 = 0.0;
    double delta = 0.0;  // g00 g11 - g01^2

    /// Scale used to make the time-like threshold relative.
    double scale() const;
    bool timelike(double eps = 1e-10) const { return delta < -eps * scale(); }
};

struct CharSpeeds {
    double minus = 0.0;
    double plus = 0.0;
};

struct NullPair {
    Vec p;  // v + lambda_- w
    Vec q;  // v + lambda_+ w
};

InducedMetric induced_metric(const MetricModel& model, const StateVector& state);

/// Induced metric from the ambient metric already evaluated at the point.
InducedMetric induced_metric(const MetricTensor& g, const Vec& v, const Vec& w);

/// Roots of g11 l^2 + 2 g01 l + g00 = 0, ordered minus < plus.
/// Throws DegeneracyError when |g11| is tiny and CausalityError when delta >= 0.
CharSpeeds char_speeds(const InducedMetric& im, const WorldsheetTolerances& tol = {});

/// The 3 dim x 3 dim coefficient matrix of U_t + A U_theta + B = 0 with U = (u, v, w), dim = n + 1.
Eigen::MatrixXd system_matrix(const InducedMetric& im, int dim, const WorldsheetTolerances& tol = {});

struct Eigenbasis {
    std::vector<double> values;
    std::vector<Eigen::VectorXd> right;       // column eigenvectors, A r = lambda r
    std::vector<Eigen::RowVectorXd> left;     // row eigenvectors, l A = lambda l
};

/// Eigenvalues 0 (dim times), lambda_- (dim times), lambda_+ (dim times) with the canonical
/// right and left eigenvectors of the first-order system.
Eigenbasis eigenvectors(const CharSpeeds& speeds, int dim);

/// Gradient of one characteristic speed with respect to the stacked state (u, v, w).
struct SpeedGradient {
    Vec du;
    Vec dv;
    Vec dw;
};

struct SpeedGradients {
    SpeedGradient minus;
    SpeedGradient plus;
};

/// Closed-form partial derivatives of lambda_- and lambda_+.
SpeedGradients speed_gradients(const MetricModel& model, const StateVector& state,
                               const WorldsheetTolerances& tol = {});

/// Central-difference partial derivatives of lambda_- and lambda_+.
SpeedGradients speed_gradients_fd(const MetricModel& model, const StateVector& state, double h,
                                  const WorldsheetTolerances& tol = {});

struct DegeneracyResidual {
    double minus = 0.0;  // max_C |grad lambda_- . r_{n+2+C}|
    double plus = 0.0;   // max_C |grad lambda_+ . r_{2n+3+C}|
};

/// Contractions of each speed gradient with the eigenvectors of its own family.
DegeneracyResidual degeneracy_residual(const SpeedGradients& grads, const CharSpeeds& speeds);

/// Linear degeneracy check with closed-form gradients.
DegeneracyResidual linear_degeneracy_residual(const MetricModel& model, const StateVector& state,
                                              const WorldsheetTolerances& tol = {});

/// Same contraction with finite-difference gradients (step h).
DegeneracyResidual linear_degeneracy_residual_fd(const MetricModel& model, const StateVector& state, double h,
                                                 const WorldsheetTolerances& tol = {});

NullPair null_pair(const StateVector& state, const CharSpeeds& speeds);

/// |g(p, p)| and |g(q, q)| at the state's position.
std::pair<double, double> null_residuals(const MetricModel& model, const Vec& u, const NullPair& pair);

// ---------------------------------------------------------------------------
// Initial data

enum class DomainKind { periodic, line };

/// Parameter domain of the string. A periodic domain may wind: phi(theta + length) = phi(theta) + winding.
struct Domain {
    DomainKind kind = DomainKind::line;
    double length = 0.0;  // period, periodic domains only
    Vec winding;          // empty means zero winding

    static Domain line() { return {}; }
    static Domain periodic(double length, Vec winding = {})
    {
        Domain d;
        d.kind = DomainKind::periodic;
        d.length = length;
        d.winding = std::move(winding);
        return d;
    }
    bool is_periodic() const { return kind == DomainKind::periodic; }
};

/// Sampled initial position phi and velocity psi with the derived per-node quantities.
struct StringInitialData {
    std::vector<double> theta;  // uniform, strictly increasing; periodic grids omit the repeated endpoint
    std::vector<Vec> phi;
    std::vector<Vec> psi;
    Domain domain;

    std::vector<Vec> phi_theta;
    std::vector<InducedMetric> induced;
    std::vector<double> lambda_minus;
    std::vector<double> lambda_plus;
    std::vector<double> lagrangian;
    std::vector<Vec> p0;
    std::vector<Vec> q0;

    int dim() const { return phi.empty() ? 0 : static_cast<int>(phi.front().size()); }
    std::size_t size() const { return theta.size(); }
    double spacing() const { return theta.size() > 1 ? theta[1] - theta[0] : 0.0; }
};

/// Fourth-order derivative of uniformly sampled values: central in the interior and on periodic
/// grids (with the winding offset), one-sided at the ends of a line grid.
std::vector<double> derivative4(std::span<const double> values, double spacing, bool periodic,
                                double period_increment = 0.0);

/// Builds the per-node functionals. Throws CausalityError naming the first node where the
/// Lagrangian density is not negative and DegeneracyError where |g11| is tiny.
StringInitialData build_initial_data(const MetricModel& model, std::vector<double> theta, std::vector<Vec> phi,
                                     std::vector<Vec> psi, Domain domain, const WorldsheetTolerances& tol = {});

struct PhysicalityReport {
    bool strict_ordering = true;            // Lambda_- < Lambda_+ everywhere
    std::optional<int> ordering_violation;  // first node where it fails
    bool separated = true;                  // max_{theta1 < theta2} Lambda_-(theta1) < Lambda_+(theta2)
    std::optional<std::pair<int, int>> separation_violation;  // (theta1 node, theta2 node)
    bool periodic_sweep = false;            // closed-string convention: sweep over two periods

    bool ok() const { return strict_ordering && separated; }
};

/// Single-pass check of the ordering conditions on speed profiles. For each theta2 the running
/// maximum of Lambda_- over earlier nodes must stay strictly below Lambda_+(theta2).
/// Periodic profiles are swept over two periods.
PhysicalityReport check_speed_ordering(std::span<const double> lambda_minus, std::span<const double> lambda_plus,
                                       bool periodic);

PhysicalityReport check_physicality(const StringInitialData& data);

/// Diagnostic smallness test: every component of |phi_theta| and |psi| has trapezoid L1 norm
/// at most epsilon. Does not gate anything.
bool smallness_flag(const StringInitialData& data, double epsilon);

}  // namespace relstring
