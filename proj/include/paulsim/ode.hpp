#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace paulsim::ode {

using Eigen::VectorXd;

/// Right-hand side of y' = f(t, y); writes the derivative into dydt.
using Rhs = std::function<void(double t, const VectorXd& y, VectorXd& dydt)>;

struct Options {
    double rtol = 1e-10;
    double atol = 1e-12;
    double initial_step = 0.0; // 0 = choose automatically
    double max_step = 0.0;     // 0 = unbounded
    long max_steps = 20'000'000;
};

/// One accepted Dormand-Prince step with its degree-4 interpolant.
struct DenseStep {
    double t0 = 0.0;
    double h = 0.0;
    VectorXd c1, c2, c3, c4, c5; // interpolant coefficients
};

/// Continuous solution on [t_begin, t_end] from adaptive DP5(4) integration.
/// The interpolant is the classic 4th-order dense output of the pair, so
/// values between step endpoints carry the same accuracy as the steps.
class DenseSolution {
public:
    DenseSolution() = default;
    DenseSolution(std::vector<DenseStep> steps, double t_end);

    double t_begin() const { return steps_.empty() ? 0.0 : steps_.front().t0; }
    double t_end() const { return t_end_; }
    std::size_t step_count() const { return steps_.size(); }
    const std::vector<DenseStep>& steps() const { return steps_; }

    /// Evaluate the solution at t (clamped to [t_begin, t_end] within 1e-12 slack).
    VectorXd eval(double t) const;

private:
    std::vector<DenseStep> steps_;
    double t_end_ = 0.0;
};

/// Integrate y' = f(t, y) from t0 to t1 (t1 > t0) with the adaptive embedded
/// Dormand-Prince 5(4) pair. Throws IntegrationError on step underflow or
/// non-finite derivatives, naming the failure time.
DenseSolution integrate(const Rhs& f, const VectorXd& y0, double t0, double t1,
                        const Options& opts = {});

} // namespace paulsim::ode
