#pragma once

#include <vector>

namespace paulsim {

/// T-periodic real function reconstructed from uniform samples by
/// trigonometric interpolation. Sample j is taken at t = j*T/M, and the
/// interpolant passes through all samples exactly; the derivative is the
/// analytic derivative of the interpolant.
class PeriodicFunction {
public:
    PeriodicFunction() = default; // constant zero with period 1

    PeriodicFunction(std::vector<double> samples, double period);

    static PeriodicFunction constant(double value, double period);

    double operator()(double t) const;
    double derivative(double t) const;

    double period() const { return period_; }
    bool is_constant() const { return cos_coef_.size() <= 1; }

private:
    double period_ = 1.0;
    // f(t) = sum_k cos_coef_[k] cos(k w t) + sin_coef_[k] sin(k w t), w = 2*pi/T
    std::vector<double> cos_coef_{0.0};
    std::vector<double> sin_coef_{0.0};
};

} // namespace paulsim
