#include "paulsim/hagedorn.hpp"

#include "paulsim/errors.hpp"

#include <cmath>
#include <map>
#include <sstream>

namespace paulsim::hagedorn {

namespace {

double log_factorial(int n) {
    double acc = 0.0;
    for (int k = 2; k <= n; ++k) acc += std::log(static_cast<double>(k));
    return acc;
}

// Hermitian positive square root inverse of A^dag A; throws on near-singular A.
MatrixXcd inv_abs_a(const MatrixXcd& a) {
    const MatrixXcd gram = a.adjoint() * a;
    Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(gram);
    if (eig.info() != Eigen::Success) throw Error("multivariate_hermite: eigendecomposition failed");
    const Eigen::VectorXd ev = eig.eigenvalues();
    if (ev.minCoeff() < 1e-14)
        throw Error("multivariate_hermite: A is singular (|A| eigenvalue below 1e-14)");
    Eigen::VectorXd inv_sqrt = ev.array().sqrt().inverse().matrix();
    return eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().adjoint();
}

// Mixed-radix index over multi-indices 0 <= m <= k (componentwise).
class MultiIndexTable {
public:
    explicit MultiIndexTable(const std::vector<int>& k) : k_(k) {
        strides_.resize(k.size());
        std::size_t s = 1;
        for (std::size_t j = 0; j < k.size(); ++j) {
            strides_[j] = s;
            s *= static_cast<std::size_t>(k[j] + 1);
        }
        size_ = s;
    }
    std::size_t size() const { return size_; }
    std::size_t flat(const std::vector<int>& m) const {
        std::size_t idx = 0;
        for (std::size_t j = 0; j < m.size(); ++j)
            idx += strides_[j] * static_cast<std::size_t>(m[j]);
        return idx;
    }

private:
    std::vector<int> k_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 1;
};

} // namespace

int PacketState::excitation() const {
    int total = 0;
    for (int kj : index) total += kj;
    return total;
}

double PacketState::invariant_residual() const {
    const MatrixXcd ba_inv = b_matrix * a_matrix.inverse();
    const double sym = (ba_inv - ba_inv.transpose()).cwiseAbs().maxCoeff();
    const MatrixXcd norm = a_matrix.adjoint() * b_matrix + b_matrix.adjoint() * a_matrix -
                           2.0 * MatrixXcd::Identity(dims, dims);
    return std::max(sym, norm.cwiseAbs().maxCoeff());
}

void PacketState::validate(double tol) const {
    if (a_matrix.rows() != dims || a_matrix.cols() != dims || b_matrix.rows() != dims ||
        b_matrix.cols() != dims || q.size() != dims || p.size() != dims ||
        static_cast<int>(index.size()) != dims)
        throw DimensionError("PacketState: inconsistent dimensions");
    if (!(hbar > 0) || !(mass > 0)) throw Error("PacketState: hbar and mass must be positive");
    for (int kj : index)
        if (kj < 0) throw Error("PacketState: multi-index entries must be >= 0");
    const double det_mag = std::abs(a_matrix.determinant());
    if (!(det_mag > 1e-12)) throw InvariantError("PacketState: A is not invertible");
    const double res = invariant_residual();
    if (res > tol) {
        std::ostringstream os;
        os << "PacketState: matrix constraints violated (residual " << res << " > " << tol << ")";
        throw InvariantError(os.str());
    }
}

PacketState make_packet(const MatrixXcd& a, const MatrixXcd& b, const VectorXd& q,
                        const VectorXd& p, double hbar, double mass,
                        const std::vector<int>& index) {
    PacketState s;
    s.dims = static_cast<int>(a.rows());
    s.a_matrix = a;
    s.b_matrix = b;
    s.q = q;
    s.p = p;
    s.hbar = hbar;
    s.mass = mass;
    s.index = index;
    s.log_det_a = std::log(a.determinant());
    s.validate();
    return s;
}

Complex multivariate_hermite(const MatrixXcd& a, const std::vector<int>& k, const VectorXcd& x) {
    const auto n = static_cast<int>(a.rows());
    if (a.cols() != n || static_cast<int>(k.size()) != n || x.size() != n)
        throw DimensionError("multivariate_hermite: inconsistent dimensions");
    for (int kj : k)
        if (kj < 0) throw Error("multivariate_hermite: multi-index entries must be >= 0");

    // v_j = j-th column of A (A^dag A)^{-1/2}. The linear factor conjugates
    // the first slot; the polynomial-reduction coefficients conjugate both
    // slots (V^dag conj(V)), which is what keeps the family orthonormal for
    // complex A and reduces to the classic recurrence for real A. V is
    // unitary, so a V^dag V reduction term would be the identity and the
    // excited states would pick up non-orthogonal cross terms.
    const MatrixXcd v = a * inv_abs_a(a);
    const MatrixXcd gram = v.adjoint() * v.conjugate();
    const VectorXcd proj = v.adjoint() * x;

    MultiIndexTable table(k);
    std::vector<Complex> memo(table.size(), Complex(0.0, 0.0));
    std::vector<bool> known(table.size(), false);
    memo[0] = Complex(1.0, 0.0);
    known[0] = true;

    // Fill in order of increasing |m|; every reduction lowers |m|.
    std::vector<int> m(k.size(), 0);
    std::function<Complex(std::vector<int>&)> value = [&](std::vector<int>& mi) -> Complex {
        const std::size_t idx = table.flat(mi);
        if (known[idx]) return memo[idx];
        int last = -1;
        for (int j = n - 1; j >= 0; --j)
            if (mi[j] > 0) {
                last = j;
                break;
            }
        // last >= 0 since mi != 0 here.
        mi[last] -= 1;
        const Complex head = 2.0 * proj[last] * value(mi);
        Complex tail{0.0, 0.0};
        for (int d = 0; d < n; ++d) {
            if (mi[d] == 0) continue;
            const double count = mi[d];
            mi[d] -= 1;
            tail += 2.0 * count * gram(last, d) * value(mi);
            mi[d] += 1;
        }
        mi[last] += 1;
        const Complex result = head - tail;
        memo[idx] = result;
        known[idx] = true;
        return result;
    };

    std::vector<int> kk = k;
    return value(kk);
}

Complex multivariate_hermite(const MatrixXcd& a, const std::vector<int>& k, const VectorXd& x) {
    return multivariate_hermite(a, k, VectorXcd(x.cast<Complex>()));
}

Complex evaluate_packet(const PacketState& state, const VectorXd& x) {
    state.validate();
    if (x.size() != state.dims) throw DimensionError("evaluate_packet: wrong point dimension");

    const int n = state.dims;
    const double hbar = state.hbar;
    const VectorXd dx = x - state.q;

    double log_kfact = 0.0;
    for (int kj : state.index) log_kfact += log_factorial(kj);
    const double abs_k = state.excitation();

    // 2^{-|k|/2} (pi hbar)^{-n/4} (k! det A)^{-1/2} with det A on the tracked branch.
    const Complex prefactor =
        std::exp(Complex(-0.5 * (abs_k * std::log(2.0) + log_kfact) -
                             0.25 * n * std::log(M_PI * hbar),
                         0.0) -
                 0.5 * state.log_det_a);

    const VectorXcd herm_arg =
        (inv_abs_a(state.a_matrix) * dx.cast<Complex>()) / std::sqrt(hbar);
    const Complex herm = multivariate_hermite(state.a_matrix, state.index, herm_arg);

    const MatrixXcd ba_inv = state.b_matrix * state.a_matrix.inverse();
    const Complex quad = dx.cast<Complex>().transpose() * ba_inv * dx.cast<Complex>();
    const Complex exponent =
        -quad / (2.0 * hbar) + Complex(0.0, 1.0) * state.p.dot(dx) / hbar;

    return prefactor * herm * std::exp(exponent);
}

oracle::EvolvedState packet_state(const PacketState& state, const oracle::GridSpec& grid,
                                  bool include_action_phase, double time) {
    if (grid.dims != state.dims)
        throw DimensionError("packet_state: grid dimension differs from the packet");
    const Complex phase =
        include_action_phase ? std::polar(1.0, state.action / state.hbar) : Complex(1.0, 0.0);
    return oracle::make_state(
        grid, [&](const VectorXd& x) { return phase * evaluate_packet(state, x); }, time);
}

Trajectory::Trajectory(ode::DenseSolution dense, int dims, double mass)
    : dense_(std::move(dense)), dims_(dims), mass_(mass) {}

VectorXd Trajectory::position(double t) const { return dense_.eval(t).head(dims_); }

VectorXd Trajectory::momentum(double t) const { return dense_.eval(t).segment(dims_, dims_); }

double Trajectory::action(double t) const { return dense_.eval(t)[2 * dims_]; }

Trajectory classical_trajectory(const PotentialModel& potential, const VectorXd& q0,
                                const VectorXd& p0, double mass, double t_end, double tol,
                                double escape_bound) {
    if (q0.size() != potential.dims || p0.size() != potential.dims)
        throw DimensionError("classical_trajectory: q0/p0 dimension differs from the potential");
    if (!(mass > 0)) throw Error("classical_trajectory requires mass > 0");
    check_potential_consistency(potential, 0.0, q0);

    const int n = potential.dims;
    auto rhs = [&potential, mass, n, escape_bound](double t, const VectorXd& y, VectorXd& d) {
        const VectorXd q = y.head(n);
        if (q.cwiseAbs().maxCoeff() > escape_bound) {
            std::ostringstream os;
            os << "classical trajectory escaped |q| > " << escape_bound << " at t = " << t;
            throw EscapeError(os.str(), t);
        }
        const VectorXd p = y.segment(n, n);
        d.resize(2 * n + 1);
        d.head(n) = p / mass;
        d.segment(n, n) = -potential.gradient(t, q);
        d[2 * n] = p.squaredNorm() / (2.0 * mass) - potential.value(t, q);
    };

    VectorXd y0(2 * n + 1);
    y0.head(n) = q0;
    y0.segment(n, n) = p0;
    y0[2 * n] = 0.0;

    ode::Options opts;
    opts.rtol = tol;
    opts.atol = tol / 100.0;
    return Trajectory(ode::integrate(rhs, y0, 0.0, t_end, opts), n, mass);
}

namespace {

// Real packing of (A, B, log det A): [Re A, Im A, Re B, Im B, Re L, Im L].
void unpack_ab(const VectorXd& y, int n, MatrixXcd& a, MatrixXcd& b) {
    const int nn = n * n;
    a.resize(n, n);
    b.resize(n, n);
    for (int col = 0, idx = 0; col < n; ++col)
        for (int row = 0; row < n; ++row, ++idx) {
            a(row, col) = Complex(y[idx], y[nn + idx]);
            b(row, col) = Complex(y[2 * nn + idx], y[3 * nn + idx]);
        }
}

void pack_ab(const MatrixXcd& a, const MatrixXcd& b, const Complex& logdet, VectorXd& y) {
    const int n = static_cast<int>(a.rows());
    const int nn = n * n;
    y.resize(4 * nn + 2);
    for (int col = 0, idx = 0; col < n; ++col)
        for (int row = 0; row < n; ++row, ++idx) {
            y[idx] = a(row, col).real();
            y[nn + idx] = a(row, col).imag();
            y[2 * nn + idx] = b(row, col).real();
            y[3 * nn + idx] = b(row, col).imag();
        }
    y[4 * nn] = logdet.real();
    y[4 * nn + 1] = logdet.imag();
}

} // namespace

ABSolution::ABSolution(ode::DenseSolution dense, int dims)
    : dense_(std::move(dense)), dims_(dims) {}

MatrixXcd ABSolution::a_matrix(double t) const {
    MatrixXcd a, b;
    unpack_ab(dense_.eval(t), dims_, a, b);
    return a;
}

MatrixXcd ABSolution::b_matrix(double t) const {
    MatrixXcd a, b;
    unpack_ab(dense_.eval(t), dims_, a, b);
    return b;
}

Complex ABSolution::log_det_a(double t) const {
    const VectorXd y = dense_.eval(t);
    const int nn = dims_ * dims_;
    return {y[4 * nn], y[4 * nn + 1]};
}

ABSolution propagate_AB(const PotentialModel& potential, const Trajectory& traj,
                        const MatrixXcd& a0, const MatrixXcd& b0, double tol) {
    const int n = traj.dims();
    if (a0.rows() != n || b0.rows() != n)
        throw DimensionError("propagate_AB: matrix dimension differs from the trajectory");
    {
        PacketState probe;
        probe.dims = n;
        probe.a_matrix = a0;
        probe.b_matrix = b0;
        probe.q = VectorXd::Zero(n);
        probe.p = VectorXd::Zero(n);
        probe.index.assign(n, 0);
        probe.mass = traj.mass();
        probe.validate();
    }

    const double mass = traj.mass();
    auto rhs = [&potential, &traj, mass, n](double t, const VectorXd& y, VectorXd& d) {
        MatrixXcd a, b;
        unpack_ab(y, n, a, b);
        const MatrixXcd a_dot = Complex(0.0, 1.0 / mass) * b;
        const MatrixXcd b_dot =
            Complex(0.0, 1.0) * potential.hessian(t, traj.position(t)) * a;
        const Complex logdet_dot = (a.inverse() * a_dot).trace();
        pack_ab(a_dot, b_dot, logdet_dot, d);
    };

    VectorXd y0;
    pack_ab(a0, b0, std::log(a0.determinant()), y0);
    ode::Options opts;
    opts.rtol = tol;
    opts.atol = tol / 100.0;
    ABSolution out(ode::integrate(rhs, y0, 0.0, traj.t_end(), opts), n);

    // Re-verify the matrix constraints at the endpoint.
    PacketState final_state;
    final_state.dims = n;
    final_state.a_matrix = out.a_matrix(traj.t_end());
    final_state.b_matrix = out.b_matrix(traj.t_end());
    final_state.q = VectorXd::Zero(n);
    final_state.p = VectorXd::Zero(n);
    final_state.index.assign(n, 0);
    final_state.mass = mass;
    const double res = final_state.invariant_residual();
    if (res > 1e-7) {
        std::ostringstream os;
        os << "propagate_AB: invariant drift " << res << " exceeds 1e-7; use a smaller tol";
        throw InvariantError(os.str());
    }
    return out;
}

PacketTrace propagate_packet(const PotentialModel& potential, const PacketState& initial,
                             double t_end, double tol,
                             const std::vector<double>& sample_times) {
    initial.validate();
    if (potential.dims != initial.dims)
        throw DimensionError("propagate_packet: potential dimension differs from the packet");
    check_potential_consistency(potential, 0.0, initial.q);

    const int n = initial.dims;
    const int nn = n * n;
    const double mass = initial.mass;

    // Coupled system: [q, p, S, Re A, Im A, Re B, Im B, Re L, Im L].
    auto rhs = [&potential, mass, n, nn](double t, const VectorXd& y, VectorXd& d) {
        const VectorXd q = y.head(n);
        const VectorXd p = y.segment(n, n);
        MatrixXcd a, b;
        unpack_ab(y.segment(2 * n + 1, 4 * nn + 2), n, a, b);

        d.resize(y.size());
        d.head(n) = p / mass;
        d.segment(n, n) = -potential.gradient(t, q);
        d[2 * n] = p.squaredNorm() / (2.0 * mass) - potential.value(t, q);

        const MatrixXcd a_dot = Complex(0.0, 1.0 / mass) * b;
        const MatrixXcd b_dot = Complex(0.0, 1.0) * potential.hessian(t, q) * a;
        const Complex logdet_dot = (a.inverse() * a_dot).trace();
        VectorXd ab;
        pack_ab(a_dot, b_dot, logdet_dot, ab);
        d.segment(2 * n + 1, 4 * nn + 2) = ab;
    };

    VectorXd y0(2 * n + 1 + 4 * nn + 2);
    y0.head(n) = initial.q;
    y0.segment(n, n) = initial.p;
    y0[2 * n] = initial.action;
    VectorXd ab0;
    pack_ab(initial.a_matrix, initial.b_matrix, initial.log_det_a, ab0);
    y0.segment(2 * n + 1, 4 * nn + 2) = ab0;

    ode::Options opts;
    opts.rtol = tol;
    opts.atol = tol / 100.0;
    const ode::DenseSolution dense = ode::integrate(rhs, y0, 0.0, t_end, opts);

    std::vector<double> times = sample_times;
    if (times.empty()) times = {t_end};

    PacketTrace trace;
    trace.times = times;
    trace.states.reserve(times.size());
    for (double t : times) {
        const VectorXd y = dense.eval(t);
        PacketState s = initial;
        s.q = y.head(n);
        s.p = y.segment(n, n);
        s.action = y[2 * n];
        MatrixXcd a, b;
        unpack_ab(y.segment(2 * n + 1, 4 * nn + 2), n, a, b);
        s.a_matrix = a;
        s.b_matrix = b;
        s.log_det_a = Complex(y[2 * n + 1 + 4 * nn], y[2 * n + 1 + 4 * nn + 1]);
        trace.states.push_back(std::move(s));
    }
    return trace;
}

PacketState propagate_to(const PotentialModel& potential, const PacketState& initial,
                         double t_end, double tol) {
    return propagate_packet(potential, initial, t_end, tol).states.back();
}

} // namespace paulsim::hagedorn
