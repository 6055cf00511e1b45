#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "relstring/interpolation.hpp"
#include "relstring/worldsheet.hpp"

namespace relstring {

/// The straightening coordinate at t = 0, Theta0(theta) = int_anchor^theta 2 / (Lambda_+ - Lambda_-),
/// its inverse, and the initial speed profiles in both coordinates.
class CoordinateMap {
public:
    /// Cumulative fourth-order quadrature anchored at the node nearest theta = 0 (the leftmost
    /// node of a line window that does not contain 0). Throws CausalityError if some node has
    /// Lambda_- >= Lambda_+.
    static CoordinateMap build(const StringInitialData& data);

    double theta0(double theta) const { return forward_(theta); }
    double theta0_inverse(double vartheta) const { return inverse_(vartheta); }
    double theta0_inverse_derivative(double vartheta) const { return inverse_.derivative(vartheta); }

    /// Initial speeds as functions of theta (constant continuation outside a line window).
    double lambda_minus(double theta) const { return lambda_minus_(theta); }
    double lambda_plus(double theta) const { return lambda_plus_(theta); }

    /// Initial speeds as functions of vartheta: Lambda_bar = Lambda o Theta0^{-1}.
    double lambda_bar_minus(double s) const { return lambda_minus_(inverse_(s)); }
    double lambda_bar_plus(double s) const { return lambda_plus_(inverse_(s)); }

    bool periodic() const { return periodic_; }
    double theta_period() const { return theta_period_; }
    double vartheta_period() const { return vartheta_period_; }
    double anchor() const { return anchor_; }

    double theta_front() const { return theta_front_; }
    double theta_back() const { return theta_back_; }
    double vartheta_front() const { return vartheta_nodes_.front(); }
    double vartheta_back() const { return vartheta_nodes_.back(); }

    const std::vector<double>& vartheta_nodes() const { return vartheta_nodes_; }

private:
    MonotoneCubic forward_;
    MonotoneCubic inverse_;
    UniformSpline lambda_minus_;
    UniformSpline lambda_plus_;
    std::vector<double> vartheta_nodes_;
    bool periodic_ = false;
    double theta_period_ = 0.0;
    double vartheta_period_ = 0.0;
    double anchor_ = 0.0;
    double theta_front_ = 0.0;
    double theta_back_ = 0.0;
};

/// Uniform (t, vartheta) lattice with equal steps in t and vartheta.
struct TransportGrid {
    double h = 0.0;          // step in t and in vartheta
    double vartheta0 = 0.0;  // first node
    std::size_t nodes = 0;   // per time level
    std::size_t levels = 0;  // number of steps; times are 0, h, ..., levels * h
    bool periodic = false;
    double period = 0.0;     // vartheta period for periodic grids

    double t(std::size_t level) const { return h * static_cast<double>(level); }
    double vartheta(std::size_t node) const { return vartheta0 + h * static_cast<double>(node); }
};

/// Lattice covering the image of the data under Theta0 with spacing as close to `h` as the
/// window allows (periodic grids: an integer number of nodes per period).
TransportGrid make_transport_grid(const CoordinateMap& map, double h, double t_max);

/// lambda_-(t, vartheta) and lambda_+(t, vartheta) on the lattice.
struct VarthetaSpeedFields {
    TransportGrid grid;
    std::vector<double> minus;  // [level * nodes + node]
    std::vector<double> plus;
    bool left_window = false;   // some characteristic foot point lay outside a line window

    double lambda_minus(std::size_t level, std::size_t node) const { return minus[level * grid.nodes + node]; }
    double lambda_plus(std::size_t level, std::size_t node) const { return plus[level * grid.nodes + node]; }
};

/// In (t, vartheta) both invariants travel at unit speed, so lambda_-(t, s) = Lambda_bar_-(s - t) and
/// lambda_+(t, s) = Lambda_bar_+(s + t). Throws BlowUpError at the earliest lattice node where the
/// ordering lambda_- < lambda_+ fails.
VarthetaSpeedFields solve_riemann_invariants(const CoordinateMap& map, const TransportGrid& grid);

/// theta(t, vartheta) on the lattice, built by marching
/// d theta = (lambda_+ - lambda_-)/2 d vartheta + (lambda_+ + lambda_-)/2 dt in t with the midpoint rule.
class InverseMap {
public:
    const TransportGrid& grid() const { return grid_; }
    double theta(std::size_t level, std::size_t node) const { return table_[level * grid_.nodes + node]; }

    /// theta at an arbitrary vartheta on a lattice time level (cubic Hermite with the exact slopes).
    double theta_at(std::size_t level, double vartheta) const;
    /// vartheta at an arbitrary theta on a lattice time level.
    double vartheta_at(std::size_t level, double theta) const;

    /// Largest |vartheta-first - t-first| integral over the sampled rectangles.
    double path_residual() const { return path_residual_; }

private:
    friend InverseMap build_inverse_map(const CoordinateMap&, const VarthetaSpeedFields&, std::uint64_t, int);

    TransportGrid grid_;
    std::vector<double> table_;
    std::vector<double> slopes_;  // d theta / d vartheta
    double theta_period_ = 0.0;
    double path_residual_ = 0.0;
};

/// Rectangle exactness is checked on `rectangles` random lattice rectangles; a residual above
/// 10 h^2 throws ConsistencyError.
InverseMap build_inverse_map(const CoordinateMap& map, const VarthetaSpeedFields& fields, std::uint64_t seed = 1,
                             int rectangles = 32);

/// Integral of d theta along a lattice path: vartheta first, then t (or the reverse).
double integrate_theta_path(const CoordinateMap& map, const TransportGrid& grid, std::size_t level0,
                            std::size_t node0, std::size_t level1, std::size_t node1, bool vartheta_first);

/// lambda_-(t, theta) and lambda_+(t, theta) on a fixed theta grid at every lattice time level.
struct ThetaSpeedFields {
    std::vector<double> theta;
    double dt = 0.0;
    std::size_t levels = 0;
    std::vector<double> minus;  // [level * theta.size() + i]
    std::vector<double> plus;

    double lambda_minus(std::size_t level, std::size_t i) const { return minus[level * theta.size() + i]; }
    double lambda_plus(std::size_t level, std::size_t i) const { return plus[level * theta.size() + i]; }
};

ThetaSpeedFields to_theta_coordinates(const CoordinateMap& map, const InverseMap& inverse,
                                      std::span<const double> theta);

}  // namespace relstring
