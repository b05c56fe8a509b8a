#pragma once

#include "paulsim/errors.hpp"

#include <cmath>
#include <complex>
#include <functional>

namespace paulsim {

/// Accumulates the continuous phase of a nonvanishing complex path z(t),
/// bisecting recursively wherever the principal jump between two samples
/// exceeds half a turn.
class PhaseUnwinder {
public:
    explicit PhaseUnwinder(std::function<std::complex<double>(double)> eval)
        : eval_(std::move(eval)) {}

    /// Continuous phase at t1 given the accumulated phase theta0 at t0.
    double advance(double t0, double theta0, double t1, int depth = 0) const {
        const std::complex<double> z0 = eval_(t0);
        const std::complex<double> z1 = eval_(t1);
        if (!(std::abs(z0) > 0.0) || !(std::abs(z1) > 0.0))
            throw BranchError("phase tracking hit a zero of the path", t1);
        const double d = std::arg(z1 / z0);
        if (std::abs(d) < 1.5 || depth > 48) return theta0 + d;
        const double tm = 0.5 * (t0 + t1);
        const double theta_m = advance(t0, theta0, tm, depth + 1);
        return advance(tm, theta_m, t1, depth + 1);
    }

private:
    std::function<std::complex<double>(double)> eval_;
};

} // namespace paulsim
