#pragma once

#include "paulsim/hill.hpp"
#include "paulsim/states.hpp"

#include <vector>

namespace paulsim::checks {

/// Outcome of evolving the quasienergy states with the spectral solver under
/// the trap potential and diffing against their closed form.
struct QuasienergyCheck {
    double mu = 0.0;            // Floquet phase rate from the monodromy
    double matched_omega = 0.0; // omega of the Floquet-mode solution u
    std::vector<double> max_l2_error; // per n, max over checkpoints in [0, periods*T]
    std::vector<double> period_phase; // unwrapped phase of <phi_n(0)|phi_n(T)>
    double mu_fit = 0.0; // from the linear fit phase(n) = mu_fit*(2n + e0)*T
    double e0_fit = 0.0;
};

struct QuasienergyCheckOptions {
    int n_max = 3;
    double periods = 2.0;
    int grid_points = 2048;
    double half_width = 0.0; // 0 = automatic from the state widths
    int steps_per_period = 8192;
    double tol = 1e-10; // Hill integrator tolerance
    double mass = 1.0;
    double hbar = 1.0;
};

/// Requires a stable operating point (InstabilityError otherwise).
QuasienergyCheck compare_quasienergy_states(const hill::HillParameters& params,
                                            const QuasienergyCheckOptions& opts = {});

} // namespace paulsim::checks
