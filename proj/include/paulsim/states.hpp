#pragma once

#include "paulsim/hill.hpp"
#include "paulsim/oracle.hpp"

#include <complex>
#include <memory>
#include <vector>

namespace paulsim::qstates {

using Complex = std::complex<double>;

/// Physicists' Hermite polynomial H_n(x) by the three-term recurrence.
double hermite_1d(int n, double x);

/// Orthonormal Hermite function H_n(x) e^{-x^2/2} / sqrt(2^n n! sqrt(pi)).
/// Stable for large n*|x| where the bare polynomial overflows.
double hermite_function(int n, double x);

/// Width convention for the Hermite argument of the excited quasienergy
/// states. `standard` uses sqrt(m w / hbar) x / |u| (the orthonormal family);
/// `printed` keeps the extra 1/sqrt(pi) inside the root. The orthonormality
/// test documents that only `standard` yields an orthonormal set.
enum class HermiteWidth { standard, printed };

#ifdef PAULSIM_PRINTED_HERMITE_ARG
inline constexpr HermiteWidth kDefaultHermiteWidth = HermiteWidth::printed;
#else
inline constexpr HermiteWidth kDefaultHermiteWidth = HermiteWidth::standard;
#endif

struct ContextOptions {
    double mass = 1.0;
    double hbar = 1.0;
    double tol = 1e-10;          // Hill integrator relative tolerance
    int grid_points = 1024;      // default grid: 1024 points over 12 ground widths
    double grid_half_width = 0;  // 0 = 6 ground widths scaled by max |u|
    HermiteWidth width = kDefaultHermiteWidth;
};

/// Everything needed to evaluate the quasienergy states: trap solution u(t)
/// with continuously tracked phase, mass, hbar, the reference omega from
/// u'(0) = i*omega, and a default sampling grid.
class OscillatorContext {
public:
    OscillatorContext(const hill::HillParameters& params, double omega, double t_end,
                      const ContextOptions& opts = {});

    double mass() const { return opts_.mass; }
    double hbar() const { return opts_.hbar; }
    double omega() const { return omega_; }
    double t_end() const { return solution_.t_end(); }
    const hill::SolutionTrace& trace() const { return trace_; }
    const oracle::GridSpec& grid() const { return grid_; }
    HermiteWidth width_convention() const { return opts_.width; }

    Complex u(double t) const { return solution_.u(t, omega_); }
    Complex u_dot(double t) const { return solution_.u_dot(t, omega_); }
    /// Phase of u(t), unwound continuously from arg u(0) = 0.
    double arg_u(double t) const;

private:
    hill::HillSolution solution_;
    hill::SolutionTrace trace_;
    oracle::GridSpec grid_;
    ContextOptions opts_;
    double omega_ = 1.0;
    std::vector<double> anchor_times_;
    std::vector<double> anchor_phases_;
};

struct WavefunctionSample {
    std::vector<double> grid;
    std::vector<Complex> values;
    double time = 0.0;
    int n = 0;
};

double sample_norm(const WavefunctionSample& s);
Complex sample_overlap(const WavefunctionSample& a, const WavefunctionSample& b);

/// Ground quasienergy wavefunction phi_0(x, t).
Complex phi0(double x, double t, const OscillatorContext& ctx);

/// Excited quasienergy wavefunction phi_n(x, t); phi_n(.., 0) is the static
/// oscillator eigenfunction and the family stays orthonormal at every t.
Complex phin(int n, double x, double t, const OscillatorContext& ctx);

/// phi_n sampled on the context grid.
WavefunctionSample sample_phin(int n, double t, const OscillatorContext& ctx);

/// phi_n rendered as an oracle state on the context grid (for evolution and
/// direct diffing against the spectral solver).
oracle::EvolvedState phin_state(int n, double t, const OscillatorContext& ctx);

/// Apply the Schroedinger-picture lowering operator
///   (i / sqrt(2 m hbar w)) (u p - m u' q)
/// to phi_n on the context grid, with p realized spectrally. The returned
/// sample equals sqrt(n) phi_{n-1} up to quadrature error and carries n-1.
WavefunctionSample annihilation_action(int n, double t, const OscillatorContext& ctx);

struct PseudoStates {
    double omega_p = 0.0;
    std::vector<double> grid;
    std::vector<std::vector<double>> values; // values[n] over the grid
};

/// Static oscillator eigenfunctions of the secular frequency w_p, which is the
/// stable Floquet phase rate. Throws InstabilityError off the stable region.
PseudoStates pseudopotential_states(int n_max, const OscillatorContext& ctx,
                                    const hill::FloquetResult& floquet);

/// f_n = <phi_pn | phi_n(t)> by quadrature on matching grids.
Complex overlap_fn(int n, double t, const OscillatorContext& ctx, const PseudoStates& pseudo);

} // namespace paulsim::qstates
