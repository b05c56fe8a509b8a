#include "paulsim/ode.hpp"

#include "paulsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace paulsim::ode {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;

// y5 - y4 weights (error estimate).
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

// Dense-output weights.
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

bool finite(const VectorXd& v) { return v.allFinite(); }

[[noreturn]] void fail(const std::string& reason, double t) {
    std::ostringstream os;
    os << "ODE integration failed at t = " << t << ": " << reason;
    throw IntegrationError(os.str(), t);
}

// Hairer-style automatic initial step.
double initial_step(const Rhs& f, double t0, const VectorXd& y0, const VectorXd& f0,
                    double t1, double rtol, double atol) {
    const auto sc = (atol + rtol * y0.cwiseAbs().array()).matrix().eval();
    const double d0 = (y0.array() / sc.array()).matrix().norm();
    const double d1n = (f0.array() / sc.array()).matrix().norm();
    double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
    h0 = std::min(h0, t1 - t0);

    VectorXd y1 = y0 + h0 * f0;
    VectorXd f1(y0.size());
    f(t0 + h0, y1, f1);
    const double d2 = ((f1 - f0).array() / sc.array()).matrix().norm() / h0;
    const double dmax = std::max(d1n, d2);
    double h1 = (dmax <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                                : std::pow(0.01 / dmax, 1.0 / 5.0);
    return std::min({100 * h0, h1, t1 - t0});
}

} // namespace

DenseSolution::DenseSolution(std::vector<DenseStep> steps, double t_end)
    : steps_(std::move(steps)), t_end_(t_end) {}

VectorXd DenseSolution::eval(double t) const {
    if (steps_.empty()) throw Error("empty dense solution");
    const double slack = 1e-12 * (1.0 + std::abs(t_end_));
    if (t < steps_.front().t0 - slack || t > t_end_ + slack)
        throw Error("dense solution evaluated outside its time span");
    t = std::clamp(t, steps_.front().t0, t_end_);

    // Find the step containing t.
    auto it = std::upper_bound(steps_.begin(), steps_.end(), t,
                               [](double v, const DenseStep& s) { return v < s.t0; });
    if (it != steps_.begin()) --it;
    const DenseStep& s = *it;
    const double theta = std::clamp((t - s.t0) / s.h, 0.0, 1.0);
    const double th1 = 1.0 - theta;
    return s.c1 + theta * (s.c2 + th1 * (s.c3 + theta * (s.c4 + th1 * s.c5)));
}

DenseSolution integrate(const Rhs& f, const VectorXd& y0, double t0, double t1,
                        const Options& opts) {
    if (!(t1 > t0)) throw Error("ode::integrate requires t1 > t0");
    if (!(opts.rtol > 0) || !(opts.atol > 0)) throw Error("ode::integrate requires positive tolerances");
    if (!finite(y0)) fail("non-finite initial state", t0);

    const Eigen::Index n = y0.size();
    VectorXd y = y0;
    VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n);

    f(t0, y, k1);
    if (!finite(k1)) fail("non-finite derivative", t0);

    double t = t0;
    double h = opts.initial_step > 0 ? opts.initial_step
                                     : initial_step(f, t0, y, k1, t1, opts.rtol, opts.atol);
    if (opts.max_step > 0) h = std::min(h, opts.max_step);

    const double hmin_floor = 16.0 * std::numeric_limits<double>::epsilon();
    std::vector<DenseStep> steps;
    long nsteps = 0;

    while (t < t1) {
        if (++nsteps > opts.max_steps) fail("step budget exhausted", t);
        h = std::min(h, t1 - t);
        if (h < hmin_floor * std::max(1.0, std::abs(t))) fail("step size underflow", t);

        ytmp = y + h * (a21 * k1);
        f(t + c2 * h, ytmp, k2);
        ytmp = y + h * (a31 * k1 + a32 * k2);
        f(t + c3 * h, ytmp, k3);
        ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        f(t + c4 * h, ytmp, k4);
        ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        f(t + c5 * h, ytmp, k5);
        ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        f(t + h, ytmp, k6);
        ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        f(t + h, ynew, k7); // FSAL

        if (!finite(k2) || !finite(k3) || !finite(k4) || !finite(k5) || !finite(k6) ||
            !finite(k7) || !finite(ynew)) {
            h *= 0.25;
            if (h < hmin_floor * std::max(1.0, std::abs(t)))
                fail("non-finite derivative (coefficient singular?)", t);
            continue;
        }

        // Scaled RMS error of the embedded 4th-order difference.
        double err = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                   e6 * k6[i] + e7 * k7[i]);
            const double sc = opts.atol + opts.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            const double r = ei / sc;
            err += r * r;
        }
        err = std::sqrt(err / static_cast<double>(n));

        if (err <= 1.0) {
            DenseStep s;
            s.t0 = t;
            s.h = h;
            const VectorXd ydiff = ynew - y;
            s.c1 = y;
            s.c2 = ydiff;
            s.c3 = h * k1 - ydiff;
            s.c4 = ydiff - h * k7 - s.c3;
            s.c5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
            steps.push_back(std::move(s));

            t += h;
            y.swap(ynew);
            k1.swap(k7);
        }

        double factor = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
        factor = std::clamp(factor, 0.2, 5.0);
        h *= factor;
        if (opts.max_step > 0) h = std::min(h, opts.max_step);
    }

    return DenseSolution(std::move(steps), t1);
}

} // namespace paulsim::ode
