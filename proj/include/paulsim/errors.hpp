#pragma once

#include <stdexcept>
#include <string>

namespace paulsim {

/// Base class for all paulsim errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Adaptive integration failed (step-size underflow, NaN coefficient); message names the time.
class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, double t) : Error(what), time(t) {}
    double time;
};

/// A tracked complex branch hit zero (u(t) = 0 or zeta(t) = 0); message names the time.
class BranchError : public Error {
public:
    BranchError(const std::string& what, double t) : Error(what), time(t) {}
    double time;
};

/// Two ions coincide where the interaction is singular.
class SingularityError : public Error {
public:
    using Error::Error;
};

/// Grid too coarse for a spectral operation.
class ResolutionError : public Error {
public:
    using Error::Error;
};

/// Operation requires a stable operating point.
class InstabilityError : public Error {
public:
    using Error::Error;
};

/// Mismatched grids or dimensions.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A state invariant drifted beyond tolerance.
class InvariantError : public Error {
public:
    using Error::Error;
};

/// Classical trajectory escaped the configured bound; message names the time.
class EscapeError : public Error {
public:
    EscapeError(const std::string& what, double t) : Error(what), time(t) {}
    double time;
};

/// Bad command line or config input.
class UsageError : public Error {
public:
    using Error::Error;
};

} // namespace paulsim
