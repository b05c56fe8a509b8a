#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace paulsim::crystal {

/// One interaction term of the trap potential family:
/// V_{mu,nu} = s^{-mu} * sum_{alpha != beta} (r_{alpha beta}^2)^{nu - 1},
/// where the double sum runs over ordered pairs (each unordered pair twice).
struct PairTerm {
    double mu = 0.0;
    double nu = 0.5;
    double coeff = 0.0; // C_{mu,nu}
};

enum class CalogeroForm {
    inverse_square, // g * sum (x_a - x_b)^{-2}: Hermite-zero equilibria
    printed_square  // g * sum (x_a - x_b)^{+2}: kept for comparison
};

struct CrystalParameters {
    int n_ions = 1;
    int dims = 1;
    double b = 1.0;   // harmonic coefficient on the collective variable s
    double a_c = 0.0; // interaction strength (prefactor 2 a_c on every term)
    std::vector<PairTerm> terms;
    double calogero_g = 0.0; // 1D pair coupling, applied as 2 a_c g * sum(...)
    CalogeroForm calogero_form = CalogeroForm::inverse_square;

    void validate() const; // enforces C_{mu,nu} = 0 whenever mu == nu
};

/// Positions are N x d (row = ion).
using PositionMatrix = Eigen::MatrixXd;

struct CollectiveCoordinates {
    Eigen::MatrixXd relative; // y: positions minus per-coordinate centroid
    double s = 0.0;           // sum of squared relative coordinates
};

CollectiveCoordinates collective_coordinates(const PositionMatrix& positions);

struct PotentialBreakdown {
    double total = 0.0;
    double harmonic = 0.0;
    std::vector<double> v_values; // raw V_{mu,nu}, one per term
    std::vector<double> per_term; // 2 a_c C V_{mu,nu} contributions
    double calogero = 0.0;
};

/// W = b s / 2 + 2 a_c sum C_{mu,nu} V_{mu,nu} (+ Calogero part). Throws
/// SingularityError naming the pair when coincident ions meet a singular term.
PotentialBreakdown potential_terms(const PositionMatrix& positions,
                                   const CrystalParameters& params);

/// Gradient of W with respect to the positions (N x d); vanishes at
/// equilibrium. Cross-validated against finite differences by the test suite.
Eigen::MatrixXd equilibrium_residual(const PositionMatrix& positions,
                                     const CrystalParameters& params);

struct CrystalConfiguration {
    PositionMatrix positions;
    Eigen::MatrixXd relative;
    double s = 0.0;
    double residual = 0.0; // max-abs of equilibrium_residual
    double energy = 0.0;
    std::uint64_t seed = 0;
    bool verified = true; // residual check outcome (calogero_equilibrium)
};

struct SolveOptions {
    double tol = 1e-10; // max-abs residual target
    int max_iterations = 300;
    std::uint64_t seed = 0; // recorded in the output for reproducibility
};

/// Damped Newton descent on W in relative coordinates (Armijo backtracking,
/// gradient-descent fallback off the positive-definite cone). Deterministic
/// for a fixed init. Throws IterationLimitError with the best configuration
/// so far if the residual target is not met.
CrystalConfiguration solve_equilibrium(const CrystalParameters& params,
                                       const PositionMatrix& init,
                                       const SolveOptions& opts = {});

class IterationLimitError;

/// Zeros of the physicists' Hermite polynomial H_n, ascending, as eigenvalues
/// of the symmetric Jacobi matrix of the recurrence. n <= 200.
std::vector<double> hermite_zeros(int n);

/// Equilibrium of the 1D Calogero trap: scaled coordinates are the Hermite
/// zeros. scale = 0 picks the derived factor (4 a_c g / b)^{1/4}, which makes
/// the configuration an exact equilibrium of the inverse-square form; any
/// explicit scale is verified in the scaled frame where the factor cancels.
/// A failed residual check is reported via verified = false, never silently.
CrystalConfiguration calogero_equilibrium(const CrystalParameters& params, double scale = 0.0);

/// Multi-start helper: n_starts seeded random inits, solved independently
/// (concurrently when workers are available), merged deterministically by
/// init index; returns all configurations in init order.
std::vector<CrystalConfiguration> solve_multi_start(const CrystalParameters& params,
                                                    int n_starts, double spread,
                                                    const SolveOptions& opts = {});

} // namespace paulsim::crystal

#include "paulsim/errors.hpp"

namespace paulsim::crystal {

/// Newton descent hit the iteration limit; carries the best configuration.
class IterationLimitError : public Error {
public:
    IterationLimitError(const std::string& what, CrystalConfiguration best_so_far)
        : Error(what), best(std::move(best_so_far)) {}
    CrystalConfiguration best;
};

} // namespace paulsim::crystal
