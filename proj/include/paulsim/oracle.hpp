#pragma once

#include "paulsim/potential.hpp"

#include <array>
#include <complex>
#include <functional>
#include <vector>

namespace paulsim::oracle {

using Complex = std::complex<double>;

/// Uniform periodic grid, power-of-two points per dimension, dims <= 2.
/// Axis d samples x_i = -half_width + i * (2*half_width/n), i = 0..n-1.
struct GridSpec {
    int dims = 1;
    std::array<int, 2> n{1024, 1};
    std::array<double, 2> half_width{12.0, 0.0};

    void validate() const;
    std::size_t size() const;
    double cell_volume() const;
    std::vector<double> axis(int d) const;
    std::vector<double> wavenumbers(int d) const;
    bool operator==(const GridSpec& other) const;
};

struct EvolvedState {
    GridSpec grid;
    std::vector<Complex> values; // row-major: index = i0 * n1 + i1 (2D)
    double time = 0.0;
    double boundary_mass = 0.0; // probability in the outer 5% of the box
};

/// Sample a callable psi(x) on the grid at time t. Does not normalize.
EvolvedState make_state(const GridSpec& grid,
                        const std::function<Complex(const Eigen::VectorXd&)>& psi, double t = 0.0);

double state_norm(const EvolvedState& s);
void normalize(EvolvedState& s);

/// Discrete inner product <a|b> = sum conj(a) * b * cell_volume. Grids must match.
Complex overlap(const EvolvedState& a, const EvolvedState& b);

/// L2 distance sqrt(|a - b|^2 * cell_volume). Grids must match.
double l2_distance(const EvolvedState& a, const EvolvedState& b);

/// Fraction of the probability mass within the outer 5% of the box.
double measure_boundary_mass(const EvolvedState& s);

struct EvolveOptions {
    double mass = 1.0;
    double hbar = 1.0;
    double boundary_mass_limit = 1e-8;
    /// With check_convergence set, the evolution is repeated at dt/2 and an
    /// InvariantError is raised if the endpoint L2 difference exceeds 1e-8.
    bool check_convergence = false;
};

/// Strang-split spectral propagation of i*hbar dpsi/dt = -(hbar^2/2m) Lap psi + V psi
/// over `steps` steps of size dt. The time-dependent potential is sampled at
/// each step's midpoint. Discrete norm is conserved by construction; the
/// boundary-mass monitor raises a box-too-small error past the limit.
EvolvedState split_step_evolve(const PotentialModel& potential, const EvolvedState& psi0,
                               double dt, long steps, const EvolveOptions& opts = {});

/// Spectral d/dx of 1D periodic samples over a box of length `box_length`.
std::vector<Complex> spectral_derivative(const std::vector<Complex>& values, double box_length);

/// Fraction of spectral energy in the top 25% wavenumber band; a resolution
/// diagnostic (well-resolved smooth states sit many orders below 1).
double high_band_fraction(const std::vector<Complex>& values);

} // namespace paulsim::oracle
