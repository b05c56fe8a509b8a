#include "paulsim/hill.hpp"

#include "paulsim/errors.hpp"
#include "paulsim/parallel.hpp"
#include "paulsim/phase.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace paulsim::hill {

namespace {

ode::Options integrator_options(double tol) {
    if (!(tol > 0)) throw Error("hill integration requires tol > 0");
    ode::Options opts;
    opts.rtol = tol;
    opts.atol = tol / 100.0;
    return opts;
}

std::vector<double> default_sample_times(const HillParameters& params, double t_end) {
    const double T = params.period();
    const auto count = static_cast<std::size_t>(std::ceil(64.0 * t_end / T)) + 1;
    std::vector<double> times(count);
    for (std::size_t i = 0; i < count; ++i)
        times[i] = t_end * static_cast<double>(i) / static_cast<double>(count - 1);
    return times;
}

} // namespace

void HillParameters::validate() const {
    if (!(drive_omega > 0)) throw Error("HillParameters: drive_omega must be > 0");
    if (!std::isfinite(a) || !std::isfinite(q_m))
        throw Error("HillParameters: a and q_m must be finite");
    if (mode == CoefficientMode::generalized) {
        const double T = period();
        if (std::abs(lambda.period() - T) > 1e-9 * T || std::abs(c.period() - T) > 1e-9 * T)
            throw Error("HillParameters: lambda and c must have period 2*pi/drive_omega");
    }
}

double hill_coefficient(double t, const HillParameters& params) {
    if (params.mode == CoefficientMode::quadrupole) {
        const double w2 = params.drive_omega * params.drive_omega;
        return 0.25 * w2 * (params.a + 2.0 * params.q_m * std::cos(params.drive_omega * t));
    }
    const double c = params.c(t);
    return params.lambda(t) - 2.0 * params.c.derivative(t) - 4.0 * c * c;
}

HillSolution::HillSolution(ode::DenseSolution dense, HillParameters params)
    : dense_(std::move(dense)), params_(std::move(params)) {}

Eigen::Matrix2d HillSolution::fundamental(double t) const {
    const Eigen::VectorXd y = dense_.eval(t);
    Eigen::Matrix2d m;
    m << y[0], y[2], y[1], y[3];
    return m;
}

Complex HillSolution::u(double t, double omega) const {
    const Eigen::VectorXd y = dense_.eval(t);
    return Complex(y[0], omega * y[2]);
}

Complex HillSolution::u_dot(double t, double omega) const {
    const Eigen::VectorXd y = dense_.eval(t);
    return Complex(y[1], omega * y[3]);
}

SolutionTrace HillSolution::sample(const std::vector<double>& times, double omega) const {
    SolutionTrace trace;
    trace.times = times;
    trace.omega = omega;
    trace.u.reserve(times.size());
    trace.u_dot.reserve(times.size());
    double drift = 0.0;
    for (double t : times) {
        const Eigen::VectorXd y = dense_.eval(t);
        const Complex u(y[0], omega * y[2]);
        const Complex du(y[1], omega * y[3]);
        trace.u.push_back(u);
        trace.u_dot.push_back(du);
        const Complex w = std::conj(u) * du - std::conj(du) * u;
        drift = std::max(drift, std::abs(w - Complex(0.0, 2.0 * omega)));
    }
    trace.wronskian_drift = drift;
    return trace;
}

HillSolution integrate_hill_dense(const HillParameters& params, double t_end, double tol) {
    params.validate();
    if (!(t_end > 0)) throw Error("integrate_hill_dense requires t_end > 0");

    auto rhs = [&params](double t, const Eigen::VectorXd& y, Eigen::VectorXd& d) {
        const double w = hill_coefficient(t, params);
        d.resize(4);
        d[0] = y[1];
        d[1] = -w * y[0];
        d[2] = y[3];
        d[3] = -w * y[2];
    };
    Eigen::VectorXd y0(4);
    y0 << 1.0, 0.0, 0.0, 1.0;
    auto opts = integrator_options(tol);
    // Keep steps below a quarter period so the coefficient is always resolved.
    opts.max_step = params.period() / 4.0;
    return HillSolution(ode::integrate(rhs, y0, 0.0, t_end, opts), params);
}

SolutionTrace integrate_hill(const HillParameters& params, double omega, double t_end,
                             double tol, const std::vector<double>& sample_times) {
    if (!std::isfinite(omega)) throw Error("integrate_hill requires finite omega");
    const HillSolution sol = integrate_hill_dense(params, t_end, tol);
    const auto& times =
        sample_times.empty() ? default_sample_times(params, t_end) : sample_times;
    return sol.sample(times, omega);
}

const char* to_string(Stability s) {
    switch (s) {
        case Stability::stable: return "stable";
        case Stability::marginal: return "marginal";
        case Stability::unstable: return "unstable";
        case Stability::failed: return "failed";
    }
    return "unknown";
}

FloquetResult monodromy(const HillParameters& params, double tol) {
    const double T = params.period();
    const HillSolution sol = integrate_hill_dense(params, T, tol);

    FloquetResult result;
    result.monodromy = sol.fundamental(T);
    result.trace = result.monodromy.trace();
    result.det_residual = std::abs(result.monodromy.determinant() - 1.0);

    const double half_trace = 0.5 * result.trace;
    if (std::abs(std::abs(result.trace) - 2.0) <= kMarginalBand) {
        result.stability = Stability::marginal;
        result.mu = (result.trace > 0) ? 0.0 : M_PI / T;
        return result;
    }
    if (std::abs(result.trace) > 2.0) {
        result.stability = Stability::unstable;
        const double disc = std::sqrt(half_trace * half_trace - 1.0);
        const double lam_max = std::max(std::abs(half_trace + disc), std::abs(half_trace - disc));
        result.mu = std::log(lam_max) / T;
        return result;
    }

    result.stability = Stability::stable;
    // Floquet mode with positive Wronskian: normalized to u(0) = 1, the mode
    // u = y1 + v2 * y2 has Im(v2) > 0, never vanishes, and its phase climbs
    // monotonically, so the accumulated winding over one period is exactly
    // mu*T on the correct branch (no principal-value fold).
    const double im_lambda = std::sqrt(1.0 - half_trace * half_trace);
    const Eigen::Matrix2d& m = result.monodromy;
    Complex v2;
    if (std::abs(m(0, 1)) > 1e-300) {
        v2 = Complex(half_trace - m(0, 0), im_lambda) / m(0, 1);
    } else {
        // Column eigen-relation degenerate; monodromy is triangular and
        // |trace| < 2 forces m11 = m22 with m21 carrying the rotation.
        v2 = Complex(0.0, im_lambda);
    }
    if (v2.imag() < 0) v2 = std::conj(v2); // the conjugate mode winds forward

    auto mode = [&sol, v2](double t) -> Complex {
        const Eigen::Matrix2d f = sol.fundamental(t);
        return Complex(f(0, 0), 0.0) + v2 * Complex(f(0, 1), 0.0);
    };
    PhaseUnwinder unwinder(mode);
    const int coarse = 256;
    double theta = 0.0;
    for (int i = 0; i < coarse; ++i) {
        const double t0 = T * i / coarse;
        const double t1 = T * (i + 1) / coarse;
        theta = unwinder.advance(t0, theta, t1);
    }
    result.mu = theta / T;
    result.matched_omega = v2.imag();
    return result;
}

StabilityGrid stability_scan(double a_min, double a_max, double q_min, double q_max,
                             int n_a, int n_q, const HillParameters& base, double tol) {
    if (n_a < 1 || n_q < 1) throw Error("stability_scan requires n_a, n_q >= 1");
    if (!std::isfinite(a_min) || !std::isfinite(a_max) || !std::isfinite(q_min) ||
        !std::isfinite(q_max))
        throw Error("stability_scan requires finite ranges");

    StabilityGrid grid;
    grid.a_values.resize(n_a);
    grid.q_values.resize(n_q);
    for (int i = 0; i < n_a; ++i)
        grid.a_values[i] = (n_a == 1) ? a_min : a_min + (a_max - a_min) * i / (n_a - 1);
    for (int j = 0; j < n_q; ++j)
        grid.q_values[j] = (n_q == 1) ? q_min : q_min + (q_max - q_min) * j / (n_q - 1);

    grid.cells.resize(static_cast<std::size_t>(n_a) * n_q);
    parallel_for(grid.cells.size(), [&](std::size_t idx) {
        const std::size_t ia = idx / static_cast<std::size_t>(n_q);
        const std::size_t iq = idx % static_cast<std::size_t>(n_q);
        HillParameters p = base;
        p.mode = CoefficientMode::quadrupole;
        p.a = grid.a_values[ia];
        p.q_m = grid.q_values[iq];
        StabilityCell cell;
        try {
            const FloquetResult r = monodromy(p, tol);
            cell.trace = r.trace;
            cell.mu = r.mu;
            cell.cls = r.stability;
        } catch (const Error&) {
            cell.cls = Stability::failed;
            cell.trace = std::numeric_limits<double>::quiet_NaN();
            cell.mu = std::numeric_limits<double>::quiet_NaN();
        }
        grid.cells[idx] = cell;
    });
    return grid;
}

ScalingTrace scaling_parameters(const SolutionTrace& zeta_trace, const PeriodicFunction& c) {
    ScalingTrace out;
    const std::size_t n = zeta_trace.times.size();
    out.times = zeta_trace.times;
    out.alpha.resize(n);
    out.beta.resize(n);
    out.tau.resize(n);

    double theta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Complex z = zeta_trace.u[i];
        const double t = zeta_trace.times[i];
        const double mag = std::abs(z);
        if (!(mag > 1e-300)) {
            std::ostringstream os;
            os << "scaling_parameters: zeta crossed zero at t = " << t;
            throw BranchError(os.str(), t);
        }
        if (i == 0) {
            theta = std::arg(z);
        } else {
            theta += std::arg(z / zeta_trace.u[i - 1]);
        }
        out.alpha[i] = std::log(mag);
        out.tau[i] = theta;
        // alpha' = Re(zeta'/zeta) straight from the ODE data.
        const double alpha_dot = (zeta_trace.u_dot[i] / z).real();
        out.beta[i] = 0.5 * (alpha_dot - 4.0 * c(t));
    }
    return out;
}

QuasienergySpectrum quasienergy_spectrum(double mu, double e0, int j_max) {
    if (j_max < 0) throw Error("quasienergy_spectrum requires j_max >= 0");
    QuasienergySpectrum spec;
    spec.mu = mu;
    spec.e0 = e0;
    spec.levels.resize(static_cast<std::size_t>(j_max) + 1);
    for (int j = 0; j <= j_max; ++j) spec.levels[j] = mu * (2.0 * j + e0);
    return spec;
}

} // namespace paulsim::hill
