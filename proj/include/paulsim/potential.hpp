#pragma once

#include "paulsim/hill.hpp"

#include <Eigen/Dense>

#include <functional>

namespace paulsim {

/// Potential for the single/many-mode Schroedinger problem and for packet
/// propagation: value, gradient and Hessian as callables over (t, x).
struct PotentialModel {
    int dims = 1;
    bool quadratic = false; // exactness of packet propagation expected
    std::function<double(double, const Eigen::VectorXd&)> value;
    std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> gradient;
    std::function<Eigen::MatrixXd(double, const Eigen::VectorXd&)> hessian;
};

PotentialModel free_potential(int dims);

/// V = (m/2) omega^2 |x|^2.
PotentialModel harmonic_potential(double mass, double omega, int dims = 1);

/// V = (1/2) x^T K x with constant symmetric K.
PotentialModel quadratic_potential(const Eigen::MatrixXd& k_matrix);

/// Time-dependent trap potential V(t, x) = (m/2) W(t) |x|^2 with W from the
/// Hill coefficient.
PotentialModel paul_potential(const hill::HillParameters& params, double mass, int dims = 1);

/// 1D V = (m/2) omega^2 x^2 + lambda x^4.
PotentialModel quartic_potential(double mass, double omega, double lambda);

/// Check gradient and Hessian against central finite differences of the value
/// (resp. gradient) at probe points near x_ref; throws InvariantError when the
/// relative mismatch exceeds rel_tol. Probes are drawn deterministically.
void check_potential_consistency(const PotentialModel& model, double t,
                                 const Eigen::VectorXd& x_ref, double rel_tol = 1e-6,
                                 int n_probes = 4, std::uint64_t seed = 12345);

} // namespace paulsim
