#include "paulsim/validation.hpp"

#include "paulsim/errors.hpp"
#include "paulsim/potential.hpp"

#include <cmath>

namespace paulsim::checks {

QuasienergyCheck compare_quasienergy_states(const hill::HillParameters& params,
                                            const QuasienergyCheckOptions& opts) {
    const hill::FloquetResult floquet = hill::monodromy(params, opts.tol);
    if (floquet.stability != hill::Stability::stable)
        throw InstabilityError("compare_quasienergy_states: operating point is not stable");

    const double T = params.period();
    const double t_end = opts.periods * T;

    qstates::ContextOptions ctx_opts;
    ctx_opts.mass = opts.mass;
    ctx_opts.hbar = opts.hbar;
    ctx_opts.tol = opts.tol;
    ctx_opts.grid_points = opts.grid_points;
    // Wide enough for the highest excited state through its micromotion.
    ctx_opts.grid_half_width =
        opts.half_width > 0
            ? opts.half_width
            : 0.0; // resolved below once the context reports max |u|
    qstates::OscillatorContext ctx(params, floquet.matched_omega, t_end, ctx_opts);
    if (opts.half_width <= 0) {
        double u_max = 1.0;
        for (const auto& u : ctx.trace().u) u_max = std::max(u_max, std::abs(u));
        const double ground = std::sqrt(opts.hbar / (opts.mass * floquet.matched_omega));
        ctx_opts.grid_half_width =
            ground * u_max * (2.0 * std::sqrt(2.0 * opts.n_max + 1.0) + 8.0);
        ctx = qstates::OscillatorContext(params, floquet.matched_omega, t_end, ctx_opts);
    }

    const PotentialModel trap = paul_potential(params, opts.mass, 1);
    const double dt = T / opts.steps_per_period;

    QuasienergyCheck out;
    out.mu = floquet.mu;
    out.matched_omega = floquet.matched_omega;

    // Checkpoints each quarter period.
    const int n_checks = static_cast<int>(std::lround(4.0 * opts.periods));

    oracle::EvolveOptions evolve_opts;
    evolve_opts.mass = opts.mass;
    evolve_opts.hbar = opts.hbar;

    for (int n = 0; n <= opts.n_max; ++n) {
        oracle::EvolvedState psi = qstates::phin_state(n, 0.0, ctx);
        double worst = 0.0;
        std::complex<double> period_overlap{1.0, 0.0};
        const oracle::EvolvedState initial = psi;
        double t = 0.0;
        for (int chk = 1; chk <= n_checks; ++chk) {
            const double target = t_end * chk / n_checks;
            const long steps = std::lround((target - t) / dt);
            psi = oracle::split_step_evolve(trap, psi, dt, steps, evolve_opts);
            t = psi.time;
            const oracle::EvolvedState exact = qstates::phin_state(n, t, ctx);
            worst = std::max(worst, oracle::l2_distance(psi, exact));
            if (std::abs(t - T) < 0.25 * T / n_checks) period_overlap = overlap(initial, psi);
        }
        out.max_l2_error.push_back(worst);

        // Unwrap the period-T phase against the closed-form prediction
        // mu*T*(n + 1/2); the integer turn count is all the prediction fixes.
        const double predicted = floquet.mu * T * (n + 0.5);
        double phase = -std::arg(period_overlap);
        phase += 2.0 * M_PI * std::round((predicted - phase) / (2.0 * M_PI));
        out.period_phase.push_back(phase);
    }

    // Least-squares fit phase_n = slope*n + intercept, then
    // epsilon_n = mu_fit (2n + e0) with mu_fit = slope/(2T), e0 = 2*intercept/slope.
    const auto m = static_cast<double>(out.period_phase.size());
    if (m >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < out.period_phase.size(); ++i) {
            const double xi = static_cast<double>(i);
            sx += xi;
            sy += out.period_phase[i];
            sxx += xi * xi;
            sxy += xi * out.period_phase[i];
        }
        const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        const double intercept = (sy - slope * sx) / m;
        out.mu_fit = slope / (2.0 * T);
        out.e0_fit = 2.0 * intercept / slope;
    } else {
        out.mu_fit = floquet.mu / 2.0;
        out.e0_fit = 2.0 * out.period_phase.at(0) / (floquet.mu * T);
    }
    return out;
}

} // namespace paulsim::checks
