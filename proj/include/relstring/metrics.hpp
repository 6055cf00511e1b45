#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace relstring {

/// Largest supported space-time dimension n+1. Vectors of this size live on the stack.
inline constexpr int kMaxDim = 8;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using MetricTensor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

/// Coordinates (u^0, ..., u^n). For the Ori family the order is (t, x, y, z).
using SpacetimePoint = Vec;

/// Gamma^C_AB with C the upper index; symmetric in (A, B).
class ChristoffelTensor {
public:
    explicit ChristoffelTensor(int dim) : dim_(dim), data_(static_cast<std::size_t>(dim * dim * dim), 0.0) {}

    int dim() const { return dim_; }
    double& operator()(int c, int a, int b) { return data_[index(c, a, b)]; }
    double operator()(int c, int a, int b) const { return data_[index(c, a, b)]; }

    /// Sets Gamma^C_AB and Gamma^C_BA together.
    void set_symmetric(int c, int a, int b, double value)
    {
        (*this)(c, a, b) = value;
        (*this)(c, b, a) = value;
    }

    /// Gamma^C_AB p^A q^B.
    Vec contract(const Vec& p, const Vec& q) const;

    double max_abs_difference(const ChristoffelTensor& other) const;

private:
    std::size_t index(int c, int a, int b) const
    {
        return static_cast<std::size_t>((c * dim_ + a) * dim_ + b);
    }

    int dim_;
    std::vector<double> data_;
};

/// A Lorentzian metric backend. Implementations are immutable and safe to share across threads.
class MetricModel {
public:
    virtual ~MetricModel() = default;

    virtual int dimension() const = 0;
    virtual std::string tag() const = 0;

    virtual MetricTensor metric(const SpacetimePoint& x) const = 0;
    virtual ChristoffelTensor christoffels(const SpacetimePoint& x) const = 0;

    /// Partial derivative of every metric component with respect to coordinate `c`.
    virtual MetricTensor metric_derivative(const SpacetimePoint& x, int c) const = 0;

    /// Gamma^C_AB(x) p^A q^B. Models override this with a sparse formula for the solver inner loop.
    virtual Vec contract(const SpacetimePoint& x, const Vec& p, const Vec& q) const;

    /// g_AB(x) a^A b^B.
    double inner(const SpacetimePoint& x, const Vec& a, const Vec& b) const;

protected:
    void require_dimension(const SpacetimePoint& x) const;
};

class MinkowskiMetric final : public MetricModel {
public:
    /// Flat metric diag(-1, 1, ..., 1) on R^{1+n}.
    explicit MinkowskiMetric(int n);

    int dimension() const override { return n_ + 1; }
    std::string tag() const override;
    MetricTensor metric(const SpacetimePoint& x) const override;
    ChristoffelTensor christoffels(const SpacetimePoint& x) const override;
    MetricTensor metric_derivative(const SpacetimePoint& x, int c) const override;
    Vec contract(const SpacetimePoint& x, const Vec& p, const Vec& q) const override;

private:
    int n_;
};

/// Profile f(x, y, z) of the Ori line element together with its first partials.
/// The profile must satisfy f_xx + f_yy = 0.
struct HarmonicProfile {
    std::string name;
    std::function<double(double, double, double)> f;
    std::function<double(double, double, double)> f_x;
    std::function<double(double, double, double)> f_y;
    std::function<double(double, double, double)> f_z;
};

/// f = a (x^2 - y^2).
HarmonicProfile quadratic_profile(double a);

/// Ori space-time ds^2 = dx^2 + dy^2 - 2 dz dt + (f - t) dz^2, coordinates (t, x, y, z).
class OriMetric final : public MetricModel {
public:
    explicit OriMetric(HarmonicProfile profile);

    /// The concrete model f = a (x^2 - y^2).
    static std::shared_ptr<const OriMetric> quadratic(double a);

    int dimension() const override { return 4; }
    std::string tag() const override;
    MetricTensor metric(const SpacetimePoint& x) const override;
    ChristoffelTensor christoffels(const SpacetimePoint& x) const override;
    MetricTensor metric_derivative(const SpacetimePoint& x, int c) const override;
    Vec contract(const SpacetimePoint& x, const Vec& p, const Vec& q) const override;

    const HarmonicProfile& profile() const { return profile_; }

    /// Set only for models built by quadratic().
    bool is_quadratic() const { return quadratic_; }
    double quadratic_coefficient() const { return a_; }

private:
    struct Partials {
        double f, fx, fy, fz;
    };
    Partials partials(const SpacetimePoint& x) const;

    HarmonicProfile profile_;
    bool quadratic_ = false;
    double a_ = 0.0;
};

MetricTensor evaluate_metric(const MetricModel& model, const SpacetimePoint& point);
ChristoffelTensor evaluate_christoffels(const MetricModel& model, const SpacetimePoint& point);

/// Christoffels from central differences of the metric:
/// Gamma^C_AB = 1/2 g^CD (d_A g_DB + d_B g_DA - d_D g_AB).
ChristoffelTensor christoffels_by_differences(const MetricModel& model, const SpacetimePoint& point, double h);

/// Max |analytic - finite difference| over all Christoffel components. Error is O(h^2).
double verify_christoffels_numerically(const MetricModel& model, const SpacetimePoint& point, double h);

struct HarmonicCheck {
    double max_laplacian = 0.0;
    SpacetimePoint worst_point;
};

/// Probes |f_xx + f_yy| by central differences on a grid over the given box.
HarmonicCheck probe_harmonicity(const HarmonicProfile& profile, double half_width, int points_per_axis,
                                double h = 1e-3);

/// Throws ConfigError when the probe exceeds `tolerance`.
void require_harmonic(const HarmonicProfile& profile, double half_width, double tolerance = 1e-8);

/// Number of negative eigenvalues of the symmetric matrix g.
int negative_eigenvalue_count(const MetricTensor& g);

}  // namespace relstring
