#pragma once

#include "paulsim/ode.hpp"
#include "paulsim/oracle.hpp"
#include "paulsim/potential.hpp"

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace paulsim::hagedorn {

using Complex = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Gaussian-Hermite packet data: width matrices A, B, center (q, p), classical
/// action S, and the excitation multi-index k. A and B satisfy the symplectic
/// normalization A^dag B + B^dag A = 2I with B A^{-1} symmetric; log_det_a is
/// the continuously tracked branch of log det A.
struct PacketState {
    int dims = 1;
    MatrixXcd a_matrix;
    MatrixXcd b_matrix;
    VectorXd q;
    VectorXd p;
    double action = 0.0;
    double hbar = 1.0;
    double mass = 1.0;
    std::vector<int> index; // multi-index k
    Complex log_det_a{0.0, 0.0};

    int excitation() const; // |k|
    /// Max-abs residual over the two matrix constraints.
    double invariant_residual() const;
    /// Throws InvariantError when a constraint exceeds tol (default 1e-10).
    void validate(double tol = 1e-10) const;
};

/// Build a packet, initializing log_det_a on the principal branch.
PacketState make_packet(const MatrixXcd& a, const MatrixXcd& b, const VectorXd& q,
                        const VectorXd& p, double hbar, double mass,
                        const std::vector<int>& index);

/// Multivariate Hermite polynomial H_k(A; x) from the two-term recursion with
/// direction vectors v_s = A (A^dag A)^{-1/2} u_s (coordinate order, each
/// direction repeated k_j times). Accepts complex arguments since |A|^{-1}
/// maps real offsets to complex vectors in general.
Complex multivariate_hermite(const MatrixXcd& a, const std::vector<int>& k, const VectorXcd& x);
Complex multivariate_hermite(const MatrixXcd& a, const std::vector<int>& k, const VectorXd& x);

/// Packet value at x (no action phase; see packet_state for e^{iS/hbar}).
Complex evaluate_packet(const PacketState& state, const VectorXd& x);

/// Sample the packet over a grid, multiplying by the semiclassical phase
/// e^{i S / hbar} when requested.
oracle::EvolvedState packet_state(const PacketState& state, const oracle::GridSpec& grid,
                                  bool include_action_phase = true, double time = 0.0);

/// Classical trajectory (q, p) with the action integrated alongside.
class Trajectory {
public:
    Trajectory() = default;
    Trajectory(ode::DenseSolution dense, int dims, double mass);

    int dims() const { return dims_; }
    double mass() const { return mass_; }
    double t_end() const { return dense_.t_end(); }

    VectorXd position(double t) const;
    VectorXd momentum(double t) const;
    double action(double t) const;

private:
    ode::DenseSolution dense_;
    int dims_ = 1;
    double mass_ = 1.0;
};

/// Integrate q' = p/m, p' = -grad V, S' = p^2/2m - V. The potential's
/// gradient/Hessian are checked against finite differences before the run.
/// Throws EscapeError when |q| exceeds escape_bound.
Trajectory classical_trajectory(const PotentialModel& potential, const VectorXd& q0,
                                const VectorXd& p0, double mass, double t_end, double tol,
                                double escape_bound = 1e6);

/// A, B matrices along a precomputed trajectory: A' = (i/m) B,
/// B' = i V_H(t, q(t)) A, with log det A accumulated from tr(A^{-1} A').
class ABSolution {
public:
    ABSolution() = default;
    ABSolution(ode::DenseSolution dense, int dims);

    double t_end() const { return dense_.t_end(); }
    MatrixXcd a_matrix(double t) const;
    MatrixXcd b_matrix(double t) const;
    Complex log_det_a(double t) const;

private:
    ode::DenseSolution dense_;
    int dims_ = 1;
};

ABSolution propagate_AB(const PotentialModel& potential, const Trajectory& traj,
                        const MatrixXcd& a0, const MatrixXcd& b0, double tol);

struct PacketTrace {
    std::vector<double> times;
    std::vector<PacketState> states;
};

/// Propagate the full packet as one coupled system (q, p, S, A, B, log det A).
/// sample_times defaults to {t_end}. Composition over subintervals agrees with
/// single-interval propagation to integrator accuracy.
PacketTrace propagate_packet(const PotentialModel& potential, const PacketState& initial,
                             double t_end, double tol,
                             const std::vector<double>& sample_times = {});

/// Final state only.
PacketState propagate_to(const PotentialModel& potential, const PacketState& initial,
                         double t_end, double tol);

} // namespace paulsim::hagedorn
