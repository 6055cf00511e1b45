#pragma once

#include <stdexcept>
#include <string>

namespace relstring {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Mismatched dimensions or otherwise malformed arguments.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// A quantity the formulation divides by has vanished (g11, the discriminant, a singular metric).
class DegeneracyError : public Error {
public:
    using Error::Error;
};

/// The motion is not time-like where it has to be (Delta >= 0, Lambda- >= Lambda+).
class CausalityError : public Error {
public:
    using Error::Error;
    CausalityError(const std::string& what, int node) : Error(what), node_(node) {}
    int node() const { return node_; }

private:
    int node_ = -1;
};

/// A point fell outside the window where data is defined.
class WindowError : public Error {
public:
    using Error::Error;
};

/// A numerical self-check exceeded its ceiling.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

/// Invalid scenario configuration (including non-harmonic Ori profiles).
class ConfigError : public Error {
public:
    using Error::Error;
};

struct BlowUpReport {
    double t = 0.0;
    double vartheta = 0.0;
    int component = -1;  // -1: not tied to a single component
    std::string quantity;
    double value = 0.0;
};

/// Loss of smoothness detected while marching a solution.
class BlowUpError : public Error {
public:
    explicit BlowUpError(BlowUpReport report);
    const BlowUpReport& report() const { return report_; }

private:
    BlowUpReport report_;
};

}  // namespace relstring
