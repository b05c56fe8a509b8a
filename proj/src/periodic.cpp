#include "paulsim/periodic.hpp"

#include "paulsim/errors.hpp"

#include <cmath>

namespace paulsim {

PeriodicFunction::PeriodicFunction(std::vector<double> samples, double period) {
    if (!(period > 0)) throw Error("PeriodicFunction requires period > 0");
    if (samples.empty()) throw Error("PeriodicFunction requires at least one sample");
    period_ = period;

    const std::size_t m = samples.size();
    const std::size_t n_modes = m / 2 + 1;
    cos_coef_.assign(n_modes, 0.0);
    sin_coef_.assign(n_modes, 0.0);

    // Direct DFT; sample counts are small and this runs once per function.
    for (std::size_t k = 0; k < n_modes; ++k) {
        double ck = 0.0, sk = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const double phase = 2.0 * M_PI * static_cast<double>(k) * static_cast<double>(j) /
                                 static_cast<double>(m);
            ck += samples[j] * std::cos(phase);
            sk += samples[j] * std::sin(phase);
        }
        double weight = 2.0 / static_cast<double>(m);
        if (k == 0 || (m % 2 == 0 && k == m / 2)) weight = 1.0 / static_cast<double>(m);
        cos_coef_[k] = weight * ck;
        sin_coef_[k] = weight * sk;
    }
    if (m % 2 == 0) sin_coef_[m / 2] = 0.0; // Nyquist mode carries no sine component
}

PeriodicFunction PeriodicFunction::constant(double value, double period) {
    PeriodicFunction f;
    f.period_ = period;
    f.cos_coef_ = {value};
    f.sin_coef_ = {0.0};
    return f;
}

double PeriodicFunction::operator()(double t) const {
    const double w = 2.0 * M_PI / period_;
    double acc = 0.0;
    for (std::size_t k = 0; k < cos_coef_.size(); ++k) {
        const double kw = static_cast<double>(k) * w;
        acc += cos_coef_[k] * std::cos(kw * t) + sin_coef_[k] * std::sin(kw * t);
    }
    return acc;
}

double PeriodicFunction::derivative(double t) const {
    const double w = 2.0 * M_PI / period_;
    double acc = 0.0;
    for (std::size_t k = 1; k < cos_coef_.size(); ++k) {
        const double kw = static_cast<double>(k) * w;
        acc += -cos_coef_[k] * kw * std::sin(kw * t) + sin_coef_[k] * kw * std::cos(kw * t);
    }
    return acc;
}

} // namespace paulsim
