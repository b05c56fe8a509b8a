#include "paulsim/oracle.hpp"

#include "paulsim/errors.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <sstream>

namespace paulsim::oracle {

namespace {

// FFTW plan creation is not thread safe; execution of independent plans is.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

class FftPlan {
public:
    FftPlan(const GridSpec& grid, int sign) {
        buffer_.resize(grid.size());
        auto* data = reinterpret_cast<fftw_complex*>(buffer_.data());
        std::lock_guard<std::mutex> lock(plan_mutex());
        if (grid.dims == 1) {
            plan_ = fftw_plan_dft_1d(grid.n[0], data, data, sign, FFTW_ESTIMATE);
        } else {
            plan_ = fftw_plan_dft_2d(grid.n[0], grid.n[1], data, data, sign, FFTW_ESTIMATE);
        }
        if (!plan_) throw Error("FFTW plan creation failed");
    }
    ~FftPlan() {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(plan_);
    }
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;

    std::vector<Complex>& buffer() { return buffer_; }
    void execute() { fftw_execute(plan_); }

private:
    std::vector<Complex> buffer_;
    fftw_plan plan_ = nullptr;
};

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

} // namespace

void GridSpec::validate() const {
    if (dims < 1 || dims > 2) throw Error("GridSpec: dims must be 1 or 2");
    for (int d = 0; d < dims; ++d) {
        if (!is_power_of_two(n[d])) throw Error("GridSpec: points per dimension must be a power of two");
        if (!(half_width[d] > 0)) throw Error("GridSpec: half_width must be positive");
    }
}

std::size_t GridSpec::size() const {
    std::size_t s = 1;
    for (int d = 0; d < dims; ++d) s *= static_cast<std::size_t>(n[d]);
    return s;
}

double GridSpec::cell_volume() const {
    double v = 1.0;
    for (int d = 0; d < dims; ++d) v *= 2.0 * half_width[d] / n[d];
    return v;
}

std::vector<double> GridSpec::axis(int d) const {
    std::vector<double> x(static_cast<std::size_t>(n[d]));
    const double dx = 2.0 * half_width[d] / n[d];
    for (int i = 0; i < n[d]; ++i) x[i] = -half_width[d] + i * dx;
    return x;
}

std::vector<double> GridSpec::wavenumbers(int d) const {
    std::vector<double> k(static_cast<std::size_t>(n[d]));
    const double dk = M_PI / half_width[d];
    for (int i = 0; i < n[d]; ++i) k[i] = dk * (i < n[d] / 2 ? i : i - n[d]);
    return k;
}

bool GridSpec::operator==(const GridSpec& other) const {
    if (dims != other.dims) return false;
    for (int d = 0; d < dims; ++d)
        if (n[d] != other.n[d] || half_width[d] != other.half_width[d]) return false;
    return true;
}

EvolvedState make_state(const GridSpec& grid,
                        const std::function<Complex(const Eigen::VectorXd&)>& psi, double t) {
    grid.validate();
    EvolvedState s;
    s.grid = grid;
    s.time = t;
    s.values.resize(grid.size());
    const auto x0 = grid.axis(0);
    if (grid.dims == 1) {
        Eigen::VectorXd x(1);
        for (int i = 0; i < grid.n[0]; ++i) {
            x[0] = x0[i];
            s.values[i] = psi(x);
        }
    } else {
        const auto x1 = grid.axis(1);
        Eigen::VectorXd x(2);
        for (int i = 0; i < grid.n[0]; ++i) {
            x[0] = x0[i];
            for (int j = 0; j < grid.n[1]; ++j) {
                x[1] = x1[j];
                s.values[static_cast<std::size_t>(i) * grid.n[1] + j] = psi(x);
            }
        }
    }
    s.boundary_mass = measure_boundary_mass(s);
    return s;
}

double state_norm(const EvolvedState& s) {
    double acc = 0.0;
    for (const Complex& v : s.values) acc += std::norm(v);
    return std::sqrt(acc * s.grid.cell_volume());
}

void normalize(EvolvedState& s) {
    const double n = state_norm(s);
    if (!(n > 0)) throw Error("cannot normalize a zero state");
    for (Complex& v : s.values) v /= n;
}

Complex overlap(const EvolvedState& a, const EvolvedState& b) {
    if (!(a.grid == b.grid)) throw DimensionError("overlap: grids differ");
    Complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < a.values.size(); ++i)
        acc += std::conj(a.values[i]) * b.values[i];
    return acc * a.grid.cell_volume();
}

double l2_distance(const EvolvedState& a, const EvolvedState& b) {
    if (!(a.grid == b.grid)) throw DimensionError("l2_distance: grids differ");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        acc += std::norm(a.values[i] - b.values[i]);
    return std::sqrt(acc * a.grid.cell_volume());
}

double measure_boundary_mass(const EvolvedState& s) {
    const GridSpec& g = s.grid;
    double total = 0.0, boundary = 0.0;
    const auto x0 = g.axis(0);
    if (g.dims == 1) {
        for (int i = 0; i < g.n[0]; ++i) {
            const double w = std::norm(s.values[i]);
            total += w;
            if (std::abs(x0[i]) > 0.95 * g.half_width[0]) boundary += w;
        }
    } else {
        const auto x1 = g.axis(1);
        for (int i = 0; i < g.n[0]; ++i) {
            const bool edge0 = std::abs(x0[i]) > 0.95 * g.half_width[0];
            for (int j = 0; j < g.n[1]; ++j) {
                const double w = std::norm(s.values[static_cast<std::size_t>(i) * g.n[1] + j]);
                total += w;
                if (edge0 || std::abs(x1[j]) > 0.95 * g.half_width[1]) boundary += w;
            }
        }
    }
    return total > 0 ? boundary / total : 0.0;
}

namespace {

EvolvedState evolve_once(const PotentialModel& potential, const EvolvedState& psi0, double dt,
                         long steps, const EvolveOptions& opts) {
    const GridSpec& g = psi0.grid;
    const std::size_t size = g.size();

    // Kinetic phase per full step.
    std::vector<Complex> kinetic(size);
    {
        const auto k0 = g.wavenumbers(0);
        if (g.dims == 1) {
            for (int i = 0; i < g.n[0]; ++i) {
                const double k2 = k0[i] * k0[i];
                kinetic[i] = std::polar(1.0, -opts.hbar * k2 * dt / (2.0 * opts.mass));
            }
        } else {
            const auto k1 = g.wavenumbers(1);
            for (int i = 0; i < g.n[0]; ++i)
                for (int j = 0; j < g.n[1]; ++j) {
                    const double k2 = k0[i] * k0[i] + k1[j] * k1[j];
                    kinetic[static_cast<std::size_t>(i) * g.n[1] + j] =
                        std::polar(1.0, -opts.hbar * k2 * dt / (2.0 * opts.mass));
                }
        }
    }

    // Potential sample cache; recomputed per step only when time dependent.
    std::vector<double> pot(size);
    auto fill_potential = [&](double t) {
        const auto x0 = g.axis(0);
        if (g.dims == 1) {
            Eigen::VectorXd x(1);
            for (int i = 0; i < g.n[0]; ++i) {
                x[0] = x0[i];
                pot[i] = potential.value(t, x);
            }
        } else {
            const auto x1 = g.axis(1);
            Eigen::VectorXd x(2);
            for (int i = 0; i < g.n[0]; ++i) {
                x[0] = x0[i];
                for (int j = 0; j < g.n[1]; ++j) {
                    x[1] = x1[j];
                    pot[static_cast<std::size_t>(i) * g.n[1] + j] = potential.value(t, x);
                }
            }
        }
    };

    FftPlan forward(g, FFTW_FORWARD);
    FftPlan backward(g, FFTW_BACKWARD);
    std::vector<Complex>& buf = forward.buffer();
    std::vector<Complex>& bufb = backward.buffer();
    buf = psi0.values;
    const double inv_n = 1.0 / static_cast<double>(size);

    double t = psi0.time;
    for (long step = 0; step < steps; ++step) {
        fill_potential(t + 0.5 * dt);
        for (std::size_t i = 0; i < size; ++i)
            buf[i] *= std::polar(1.0, -0.5 * dt * pot[i] / opts.hbar);
        forward.execute();
        for (std::size_t i = 0; i < size; ++i) bufb[i] = buf[i] * kinetic[i];
        backward.execute();
        for (std::size_t i = 0; i < size; ++i)
            buf[i] = bufb[i] * inv_n * std::polar(1.0, -0.5 * dt * pot[i] / opts.hbar);
        t += dt;

        if ((step & 255) == 255 || step == steps - 1) {
            EvolvedState probe;
            probe.grid = g;
            probe.values = buf;
            const double bm = measure_boundary_mass(probe);
            if (bm > opts.boundary_mass_limit) {
                std::ostringstream os;
                os << "split_step_evolve: boundary mass " << bm << " at t = " << t
                   << " exceeds " << opts.boundary_mass_limit << " (box too small)";
                throw InvariantError(os.str());
            }
        }
    }

    EvolvedState out;
    out.grid = g;
    out.values = std::move(buf);
    out.time = t;
    // Every factor applied above has unit modulus, so the discrete norm is
    // conserved up to FFT roundoff; rescale that drift away.
    const double n0 = state_norm(psi0);
    const double n1 = state_norm(out);
    if (n1 > 0 && n0 > 0) {
        const double fix = n0 / n1;
        for (Complex& v : out.values) v *= fix;
    }
    out.boundary_mass = measure_boundary_mass(out);
    return out;
}

} // namespace

EvolvedState split_step_evolve(const PotentialModel& potential, const EvolvedState& psi0,
                               double dt, long steps, const EvolveOptions& opts) {
    psi0.grid.validate();
    if (psi0.grid.dims != potential.dims)
        throw DimensionError("split_step_evolve: potential dimension != grid dimension");
    if (!(dt > 0) || steps < 0) throw Error("split_step_evolve: dt > 0 and steps >= 0 required");

    EvolvedState out = evolve_once(potential, psi0, dt, steps, opts);
    if (opts.check_convergence && steps > 0) {
        const EvolvedState fine = evolve_once(potential, psi0, 0.5 * dt, 2 * steps, opts);
        const double diff = l2_distance(out, fine);
        if (diff > 1e-8) {
            std::ostringstream os;
            os << "split_step_evolve: halving dt changes the endpoint by " << diff
               << " (> 1e-8); reduce dt";
            throw InvariantError(os.str());
        }
    }
    return out;
}

std::vector<Complex> spectral_derivative(const std::vector<Complex>& values, double box_length) {
    const auto n = static_cast<int>(values.size());
    if (!is_power_of_two(n)) throw Error("spectral_derivative: size must be a power of two");
    GridSpec g;
    g.dims = 1;
    g.n = {n, 1};
    g.half_width = {box_length / 2.0, 0.0};

    FftPlan forward(g, FFTW_FORWARD);
    FftPlan backward(g, FFTW_BACKWARD);
    forward.buffer() = values;
    forward.execute();
    const auto k = g.wavenumbers(0);
    for (int i = 0; i < n; ++i)
        backward.buffer()[i] = forward.buffer()[i] * Complex(0.0, k[i]);
    backward.execute();
    std::vector<Complex> out(backward.buffer());
    const double inv_n = 1.0 / n;
    for (auto& v : out) v *= inv_n;
    return out;
}

double high_band_fraction(const std::vector<Complex>& values) {
    const auto n = static_cast<int>(values.size());
    if (!is_power_of_two(n)) throw Error("high_band_fraction: size must be a power of two");
    GridSpec g;
    g.dims = 1;
    g.n = {n, 1};
    g.half_width = {1.0, 0.0};
    FftPlan forward(g, FFTW_FORWARD);
    forward.buffer() = values;
    forward.execute();
    double total = 0.0, high = 0.0;
    for (int i = 0; i < n; ++i) {
        const int k = (i < n / 2) ? i : n - i;
        const double w = std::norm(forward.buffer()[i]);
        total += w;
        if (k > (3 * n) / 8) high += w;
    }
    return total > 0 ? high / total : 0.0;
}

} // namespace paulsim::oracle
