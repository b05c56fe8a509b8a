#pragma once

#include "paulsim/ode.hpp"
#include "paulsim/periodic.hpp"

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace paulsim::hill {

using Complex = std::complex<double>;

enum class CoefficientMode { quadrupole, generalized };

/// Trap drive coefficients for the Hill equation u'' + W(t) u = 0.
/// quadrupole mode: W(t) = (Omega^2/4) (a + 2 q_m cos(Omega t)).
/// generalized mode: W(t) = lambda(t) - 2 c'(t) - 4 c(t)^2 with T-periodic
/// lambda, c supplied as sampled period data (trigonometric interpolation).
struct HillParameters {
    CoefficientMode mode = CoefficientMode::quadrupole;
    double a = 0.0;
    double q_m = 0.0;           // Mathieu AC parameter (the drive "q", renamed
                                // to avoid collision with the coordinate)
    double drive_omega = 2.0;   // Omega > 0
    PeriodicFunction lambda;    // generalized mode only
    PeriodicFunction c;         // generalized mode only

    double period() const { return 2.0 * M_PI / drive_omega; }
    void validate() const;
};

double hill_coefficient(double t, const HillParameters& params);

/// Sampled complex Hill solution u with u(0) = 1, u'(0) = i*omega.
struct SolutionTrace {
    std::vector<double> times;
    std::vector<Complex> u;
    std::vector<Complex> u_dot;
    double omega = 1.0;
    double wronskian_drift = 0.0; // max over samples of |u* u' - u'* u - 2i*omega|
};

/// Dense, interpolable fundamental pair of the Hill equation:
/// y1 with (y1, y1')(0) = (1, 0) and y2 with (0, 1). For any real omega the
/// complex solution of the paper's initial-value problem is u = y1 + i*omega*y2.
class HillSolution {
public:
    HillSolution() = default;
    HillSolution(ode::DenseSolution dense, HillParameters params);

    double t_end() const { return dense_.t_end(); }
    const HillParameters& parameters() const { return params_; }

    /// Fundamental matrix [[y1, y2], [y1', y2']] at time t.
    Eigen::Matrix2d fundamental(double t) const;

    Complex u(double t, double omega) const;
    Complex u_dot(double t, double omega) const;

    SolutionTrace sample(const std::vector<double>& times, double omega) const;

private:
    ode::DenseSolution dense_;
    HillParameters params_;
};

/// Default integrator relative tolerance (absolute = tol/100). Chosen so the
/// Wronskian drifts by less than 1e-9 over 100 drive periods.
inline constexpr double kDefaultTol = 1e-11;

/// Integrate the fundamental pair densely on [0, t_end].
HillSolution integrate_hill_dense(const HillParameters& params, double t_end,
                                  double tol = kDefaultTol);

/// Integrate and sample u(t). Empty sample_times selects a uniform grid with
/// 64 samples per drive period. tol sets the integrator's relative tolerance
/// (absolute tolerance is tol/100).
SolutionTrace integrate_hill(const HillParameters& params, double omega, double t_end,
                             double tol = kDefaultTol,
                             const std::vector<double>& sample_times = {});

enum class Stability { stable, marginal, unstable, failed };

const char* to_string(Stability s);

struct FloquetResult {
    Eigen::Matrix2d monodromy = Eigen::Matrix2d::Identity();
    double trace = 2.0;
    Stability stability = Stability::marginal;
    /// Stable: phase advance rate of the Floquet mode (winding-matched, > 0).
    /// Unstable: growth rate ln(max |eigenvalue|)/T. Marginal: 0 or pi/T.
    double mu = 0.0;
    /// Stable only: the omega for which u = y1 + i*omega*y2 is the Floquet
    /// mode (u(T) = e^{i mu T} u(0)); NaN otherwise.
    double matched_omega = std::numeric_limits<double>::quiet_NaN();
    double det_residual = 0.0; // |det(monodromy) - 1|
};

/// Band half-width for the marginal classification |trace| = 2.
inline constexpr double kMarginalBand = 1e-8;

FloquetResult monodromy(const HillParameters& params, double tol);

struct StabilityCell {
    double trace = 0.0;
    double mu = 0.0;
    Stability cls = Stability::failed;
};

struct StabilityGrid {
    std::vector<double> a_values;
    std::vector<double> q_values;
    std::vector<StabilityCell> cells; // row-major: [a_index * n_q + q_index]

    const StabilityCell& at(std::size_t ia, std::size_t iq) const {
        return cells[ia * q_values.size() + iq];
    }
};

/// Rasterize Floquet classification over the (a, q_m) rectangle. Per-cell
/// integration failures are recorded as Stability::failed and never abort the
/// scan. Cells may be evaluated concurrently; assembly is by cell index, so
/// the result is independent of the worker partitioning.
StabilityGrid stability_scan(double a_min, double a_max, double q_min, double q_max,
                             int n_a, int n_q, const HillParameters& base, double tol);

/// alpha, beta, tau with zeta = exp(alpha + i tau) and 2 beta = alpha' - 4c.
struct ScalingTrace {
    std::vector<double> times;
    std::vector<double> alpha;
    std::vector<double> beta;
    std::vector<double> tau; // continuously unwound phase
};

/// Extract the evolution-operator scaling parameters from a sampled Hill
/// solution zeta. alpha' comes from the ODE data (Re zeta'/zeta), never from
/// finite differences. Throws BranchError if zeta crosses zero.
ScalingTrace scaling_parameters(const SolutionTrace& zeta_trace, const PeriodicFunction& c);

struct QuasienergySpectrum {
    double mu = 0.0;
    double e0 = 1.0;
    std::vector<double> levels; // levels[j] = mu * (2j + e0)
};

QuasienergySpectrum quasienergy_spectrum(double mu, double e0, int j_max);

} // namespace paulsim::hill
