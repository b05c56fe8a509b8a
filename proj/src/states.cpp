#include "paulsim/states.hpp"

#include "paulsim/errors.hpp"
#include "paulsim/phase.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace paulsim::qstates {

double hermite_1d(int n, double x) {
    if (n < 0) throw Error("hermite_1d requires n >= 0");
    if (n == 0) return 1.0;
    double hm = 1.0;
    double h = 2.0 * x;
    for (int k = 2; k <= n; ++k) {
        const double hn = 2.0 * x * h - 2.0 * (k - 1) * hm;
        hm = h;
        h = hn;
    }
    return h;
}

double hermite_function(int n, double x) {
    if (n < 0) throw Error("hermite_function requires n >= 0");
    const double h0 = std::pow(M_PI, -0.25) * std::exp(-0.5 * x * x);
    if (n == 0) return h0;
    double hm = h0;
    double h = std::sqrt(2.0) * x * h0;
    for (int k = 2; k <= n; ++k) {
        const double hn = std::sqrt(2.0 / k) * x * h - std::sqrt((k - 1.0) / k) * hm;
        hm = h;
        h = hn;
    }
    return h;
}

namespace {

double log_factorial(int n) {
    double acc = 0.0;
    for (int k = 2; k <= n; ++k) acc += std::log(static_cast<double>(k));
    return acc;
}

} // namespace

OscillatorContext::OscillatorContext(const hill::HillParameters& params, double omega,
                                     double t_end, const ContextOptions& opts)
    : opts_(opts), omega_(omega) {
    if (!(opts.mass > 0) || !(opts.hbar > 0) || !(omega > 0))
        throw Error("OscillatorContext requires mass, hbar, omega > 0");
    solution_ = hill::integrate_hill_dense(params, t_end, opts.tol);
    trace_ = solution_.sample(
        [&] {
            const double T = params.period();
            const auto count = static_cast<std::size_t>(std::ceil(64.0 * t_end / T)) + 1;
            std::vector<double> times(count);
            for (std::size_t i = 0; i < count; ++i)
                times[i] = t_end * static_cast<double>(i) / static_cast<double>(count - 1);
            return times;
        }(),
        omega);

    double u_max = 1.0;
    for (const Complex& u : trace_.u) u_max = std::max(u_max, std::abs(u));

    grid_.dims = 1;
    grid_.n = {opts.grid_points, 1};
    // Auto width: 8 ground widths scaled by the micromotion maximum keeps the
    // state tails at the box edge below 1e-12, which the spectral ladder
    // operator needs.
    const double ground_width = std::sqrt(opts.hbar / (opts.mass * omega));
    grid_.half_width = {opts.grid_half_width > 0 ? opts.grid_half_width
                                                 : 8.0 * ground_width * u_max,
                        0.0};
    grid_.validate();

    // Anchor the unwound phase of u on a grid fine enough that queries only
    // ever bridge a fraction of a period.
    const double T = params.period();
    const auto n_anchor = static_cast<std::size_t>(std::ceil(64.0 * t_end / T)) + 1;
    anchor_times_.resize(n_anchor);
    anchor_phases_.resize(n_anchor);
    PhaseUnwinder unwinder([this](double t) { return u(t); });
    anchor_times_[0] = 0.0;
    anchor_phases_[0] = 0.0; // u(0) = 1
    for (std::size_t i = 1; i < n_anchor; ++i) {
        anchor_times_[i] = t_end * static_cast<double>(i) / static_cast<double>(n_anchor - 1);
        anchor_phases_[i] =
            unwinder.advance(anchor_times_[i - 1], anchor_phases_[i - 1], anchor_times_[i]);
    }
}

double OscillatorContext::arg_u(double t) const {
    auto it = std::upper_bound(anchor_times_.begin(), anchor_times_.end(), t);
    const std::size_t idx = (it == anchor_times_.begin())
                                ? 0
                                : static_cast<std::size_t>(it - anchor_times_.begin()) - 1;
    PhaseUnwinder unwinder([this](double s) { return u(s); });
    return unwinder.advance(anchor_times_[idx], anchor_phases_[idx], t);
}

double sample_norm(const WavefunctionSample& s) {
    if (s.grid.size() < 2) throw Error("sample_norm: need at least two grid points");
    const double dx = s.grid[1] - s.grid[0];
    double acc = 0.0;
    for (const Complex& v : s.values) acc += std::norm(v);
    return std::sqrt(acc * dx);
}

Complex sample_overlap(const WavefunctionSample& a, const WavefunctionSample& b) {
    if (a.grid.size() != b.grid.size() || a.grid.empty() ||
        std::abs(a.grid.front() - b.grid.front()) > 1e-12 ||
        std::abs(a.grid.back() - b.grid.back()) > 1e-12)
        throw DimensionError("sample_overlap: grids differ");
    const double dx = a.grid[1] - a.grid[0];
    Complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < a.values.size(); ++i)
        acc += std::conj(a.values[i]) * b.values[i];
    return acc * dx;
}

Complex phin(int n, double x, double t, const OscillatorContext& ctx) {
    if (n < 0) throw Error("phin requires n >= 0");
    const Complex u = ctx.u(t);
    const double au = std::abs(u);
    if (!(au > 1e-12)) {
        std::ostringstream os;
        os << "phin: u(t) vanished at t = " << t << " (node collapse)";
        throw BranchError(os.str(), t);
    }
    const Complex du = ctx.u_dot(t);
    const double m = ctx.mass();
    const double hbar = ctx.hbar();
    const double w = ctx.omega();
    const double theta = ctx.arg_u(t);
    const double beta = 0.5 * m * (du / u).real() / hbar; // quadratic phase coefficient
    const double xi = std::sqrt(m * w / hbar) * x / au;

    if (ctx.width_convention() == HermiteWidth::standard) {
        const double amplitude =
            std::pow(m * w / hbar, 0.25) / std::sqrt(au) * hermite_function(n, xi);
        return amplitude * std::polar(1.0, -(n + 0.5) * theta + beta * x * x);
    }

    // Printed variant: Hermite argument keeps the 1/sqrt(pi); the Gaussian
    // factor is unchanged. Small n only (bare polynomial).
    const Complex phi_0 = std::pow(m * w / (M_PI * hbar), 0.25) / std::sqrt(au) *
                          std::polar(1.0, -0.5 * theta + beta * x * x) *
                          std::exp(-0.5 * xi * xi);
    const double norm_factor = std::exp(-0.5 * (n * std::log(2.0) + log_factorial(n)));
    return norm_factor * std::polar(1.0, -n * theta) *
           hermite_1d(n, xi / std::sqrt(M_PI)) * phi_0;
}

Complex phi0(double x, double t, const OscillatorContext& ctx) { return phin(0, x, t, ctx); }

WavefunctionSample sample_phin(int n, double t, const OscillatorContext& ctx) {
    WavefunctionSample s;
    s.grid = ctx.grid().axis(0);
    s.time = t;
    s.n = n;
    s.values.resize(s.grid.size());
    for (std::size_t i = 0; i < s.grid.size(); ++i) s.values[i] = phin(n, s.grid[i], t, ctx);
    return s;
}

oracle::EvolvedState phin_state(int n, double t, const OscillatorContext& ctx) {
    oracle::EvolvedState st;
    st.grid = ctx.grid();
    st.time = t;
    st.values.resize(st.grid.size());
    const auto axis = st.grid.axis(0);
    for (std::size_t i = 0; i < axis.size(); ++i) st.values[i] = phin(n, axis[i], t, ctx);
    st.boundary_mass = oracle::measure_boundary_mass(st);
    return st;
}

WavefunctionSample annihilation_action(int n, double t, const OscillatorContext& ctx) {
    if (n < 0) throw Error("annihilation_action requires n >= 0");
    const WavefunctionSample phi = sample_phin(n, t, ctx);

    const double tail = oracle::high_band_fraction(phi.values);
    if (tail > 1e-10) {
        std::ostringstream os;
        os << "annihilation_action: spectral tail fraction " << tail
           << " indicates an under-resolved grid";
        throw ResolutionError(os.str());
    }

    // Zero-pad to twice the box so the periodic seam sits far from the data.
    const std::size_t count = phi.values.size();
    std::vector<Complex> padded(2 * count, Complex(0.0, 0.0));
    for (std::size_t i = 0; i < count; ++i) padded[count / 2 + i] = phi.values[i];
    const double box = 2.0 * ctx.grid().half_width[0];
    const auto dpadded = oracle::spectral_derivative(padded, 2.0 * box);
    std::vector<Complex> dphi(count);
    for (std::size_t i = 0; i < count; ++i) dphi[i] = dpadded[count / 2 + i];

    const Complex u = ctx.u(t);
    const Complex du = ctx.u_dot(t);
    const double m = ctx.mass();
    const double hbar = ctx.hbar();
    const Complex pref = Complex(0.0, 1.0) / std::sqrt(2.0 * m * hbar * ctx.omega());

    WavefunctionSample out;
    out.grid = phi.grid;
    out.time = t;
    out.n = std::max(0, n - 1);
    out.values.resize(phi.values.size());
    for (std::size_t i = 0; i < phi.values.size(); ++i) {
        const Complex p_phi = Complex(0.0, -hbar) * dphi[i];
        out.values[i] = pref * (u * p_phi - m * du * phi.grid[i] * phi.values[i]);
    }
    return out;
}

PseudoStates pseudopotential_states(int n_max, const OscillatorContext& ctx,
                                    const hill::FloquetResult& floquet) {
    if (n_max < 0) throw Error("pseudopotential_states requires n_max >= 0");
    if (floquet.stability != hill::Stability::stable)
        throw InstabilityError(
            "pseudopotential_states: no pseudopotential at an unstable operating point");
    const double omega_p = floquet.mu;
    if (!(omega_p > 0)) throw InstabilityError("pseudopotential_states: mu must be positive");

    PseudoStates out;
    out.omega_p = omega_p;
    out.grid = ctx.grid().axis(0);
    out.values.resize(static_cast<std::size_t>(n_max) + 1);
    const double scale = std::sqrt(ctx.mass() * omega_p / ctx.hbar());
    for (int n = 0; n <= n_max; ++n) {
        auto& vals = out.values[static_cast<std::size_t>(n)];
        vals.resize(out.grid.size());
        for (std::size_t i = 0; i < out.grid.size(); ++i)
            vals[i] = std::sqrt(scale) * hermite_function(n, scale * out.grid[i]);
    }
    return out;
}

Complex overlap_fn(int n, double t, const OscillatorContext& ctx, const PseudoStates& pseudo) {
    if (n < 0 || static_cast<std::size_t>(n) >= pseudo.values.size())
        throw Error("overlap_fn: n out of range of the pseudopotential family");
    const auto axis = ctx.grid().axis(0);
    if (pseudo.grid.size() != axis.size() ||
        std::abs(pseudo.grid.front() - axis.front()) > 1e-12 ||
        std::abs(pseudo.grid.back() - axis.back()) > 1e-12)
        throw DimensionError("overlap_fn: pseudopotential grid differs from the context grid");

    const double dx = axis[1] - axis[0];
    Complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < axis.size(); ++i)
        acc += pseudo.values[static_cast<std::size_t>(n)][i] * phin(n, axis[i], t, ctx);
    return acc * dx;
}

} // namespace paulsim::qstates
