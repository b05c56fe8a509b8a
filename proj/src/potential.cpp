#include "paulsim/potential.hpp"

#include "paulsim/errors.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace paulsim {

using Eigen::MatrixXd;
using Eigen::VectorXd;

PotentialModel free_potential(int dims) {
    PotentialModel m;
    m.dims = dims;
    m.quadratic = true;
    m.value = [](double, const VectorXd&) { return 0.0; };
    m.gradient = [dims](double, const VectorXd&) { return VectorXd::Zero(dims).eval(); };
    m.hessian = [dims](double, const VectorXd&) { return MatrixXd::Zero(dims, dims).eval(); };
    return m;
}

PotentialModel harmonic_potential(double mass, double omega, int dims) {
    const double k = mass * omega * omega;
    PotentialModel m;
    m.dims = dims;
    m.quadratic = true;
    m.value = [k](double, const VectorXd& x) { return 0.5 * k * x.squaredNorm(); };
    m.gradient = [k](double, const VectorXd& x) { return (k * x).eval(); };
    m.hessian = [k, dims](double, const VectorXd&) {
        return (k * MatrixXd::Identity(dims, dims)).eval();
    };
    return m;
}

PotentialModel quadratic_potential(const MatrixXd& k_matrix) {
    if (k_matrix.rows() != k_matrix.cols()) throw Error("quadratic_potential: K must be square");
    if (!k_matrix.isApprox(k_matrix.transpose(), 1e-12))
        throw Error("quadratic_potential: K must be symmetric");
    const int dims = static_cast<int>(k_matrix.rows());
    PotentialModel m;
    m.dims = dims;
    m.quadratic = true;
    m.value = [k_matrix](double, const VectorXd& x) { return 0.5 * x.dot(k_matrix * x); };
    m.gradient = [k_matrix](double, const VectorXd& x) { return (k_matrix * x).eval(); };
    m.hessian = [k_matrix](double, const VectorXd&) { return k_matrix; };
    return m;
}

PotentialModel paul_potential(const hill::HillParameters& params, double mass, int dims) {
    params.validate();
    PotentialModel m;
    m.dims = dims;
    m.quadratic = true;
    m.value = [params, mass](double t, const VectorXd& x) {
        return 0.5 * mass * hill::hill_coefficient(t, params) * x.squaredNorm();
    };
    m.gradient = [params, mass](double t, const VectorXd& x) {
        return (mass * hill::hill_coefficient(t, params) * x).eval();
    };
    m.hessian = [params, mass, dims](double t, const VectorXd&) {
        return (mass * hill::hill_coefficient(t, params) * MatrixXd::Identity(dims, dims)).eval();
    };
    return m;
}

PotentialModel quartic_potential(double mass, double omega, double lambda) {
    const double k = mass * omega * omega;
    PotentialModel m;
    m.dims = 1;
    m.quadratic = (lambda == 0.0);
    m.value = [k, lambda](double, const VectorXd& x) {
        const double v = x[0];
        return 0.5 * k * v * v + lambda * v * v * v * v;
    };
    m.gradient = [k, lambda](double, const VectorXd& x) {
        VectorXd g(1);
        const double v = x[0];
        g[0] = k * v + 4.0 * lambda * v * v * v;
        return g;
    };
    m.hessian = [k, lambda](double, const VectorXd& x) {
        MatrixXd h(1, 1);
        const double v = x[0];
        h(0, 0) = k + 12.0 * lambda * v * v;
        return h;
    };
    return m;
}

void check_potential_consistency(const PotentialModel& model, double t, const VectorXd& x_ref,
                                 double rel_tol, int n_probes, std::uint64_t seed) {
    if (!model.value || !model.gradient || !model.hessian)
        throw Error("PotentialModel: value, gradient and hessian must all be set");
    const int n = model.dims;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const double scale = std::max(1.0, x_ref.norm());
    const double h = 1e-5 * scale;

    for (int probe = 0; probe < n_probes; ++probe) {
        VectorXd x = x_ref;
        for (int i = 0; i < n; ++i) x[i] += 0.1 * scale * unit(rng);

        const VectorXd g = model.gradient(t, x);
        const MatrixXd hess = model.hessian(t, x);
        if (!hess.isApprox(hess.transpose(), 1e-12))
            throw InvariantError("PotentialModel: Hessian is not symmetric");

        for (int i = 0; i < n; ++i) {
            VectorXd xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            const double fd = (model.value(t, xp) - model.value(t, xm)) / (2.0 * h);
            const double denom = std::max({1.0, std::abs(g[i]), std::abs(fd)});
            if (std::abs(fd - g[i]) / denom > rel_tol) {
                std::ostringstream os;
                os << "PotentialModel: gradient component " << i
                   << " disagrees with finite differences (" << g[i] << " vs " << fd << ")";
                throw InvariantError(os.str());
            }
            const VectorXd gp = model.gradient(t, xp);
            const VectorXd gm = model.gradient(t, xm);
            for (int j = 0; j < n; ++j) {
                const double fd2 = (gp[j] - gm[j]) / (2.0 * h);
                const double denom2 = std::max({1.0, std::abs(hess(j, i)), std::abs(fd2)});
                if (std::abs(fd2 - hess(j, i)) / denom2 > rel_tol) {
                    std::ostringstream os;
                    os << "PotentialModel: Hessian entry (" << j << "," << i
                       << ") disagrees with finite differences";
                    throw InvariantError(os.str());
                }
            }
        }
    }
}

} // namespace paulsim
