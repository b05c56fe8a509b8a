#include "paulsim/crystal.hpp"

#include "paulsim/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace paulsim::crystal {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kCoincidenceTol = 1e-12;

[[noreturn]] void singular_pair(int alpha, int beta) {
    std::ostringstream os;
    os << "ions " << alpha << " and " << beta << " coincide on a singular interaction term";
    throw SingularityError(os.str());
}

// Squared separation of ions alpha, beta.
double pair_r2(const PositionMatrix& x, int alpha, int beta) {
    return (x.row(alpha) - x.row(beta)).squaredNorm();
}

bool term_is_singular_at_zero(const PairTerm& t) { return t.nu < 1.0; }

} // namespace

void CrystalParameters::validate() const {
    if (n_ions < 1) throw Error("CrystalParameters: n_ions >= 1 required");
    if (dims < 1 || dims > 3) throw Error("CrystalParameters: dims must be 1, 2 or 3");
    for (const PairTerm& t : terms) {
        if (t.mu == t.nu && t.coeff != 0.0)
            throw Error("CrystalParameters: C_{mu,nu} must vanish when mu == nu "
                        "(integrability condition)");
    }
    if (calogero_g != 0.0 && dims != 1)
        throw Error("CrystalParameters: the Calogero interaction is 1D only");
}

CollectiveCoordinates collective_coordinates(const PositionMatrix& positions) {
    if (!positions.allFinite()) throw Error("collective_coordinates: positions must be finite");
    CollectiveCoordinates out;
    out.relative = positions.rowwise() - positions.colwise().mean();
    out.s = out.relative.squaredNorm();
    return out;
}

PotentialBreakdown potential_terms(const PositionMatrix& positions,
                                   const CrystalParameters& params) {
    params.validate();
    const int n = params.n_ions;
    if (positions.rows() != n || positions.cols() != params.dims)
        throw DimensionError("potential_terms: positions must be n_ions x dims");

    const auto cc = collective_coordinates(positions);
    PotentialBreakdown out;
    out.harmonic = 0.5 * params.b * cc.s;
    out.total = out.harmonic;
    out.per_term.reserve(params.terms.size());

    for (const PairTerm& term : params.terms) {
        if (n < 2) {
            out.v_values.push_back(0.0);
            out.per_term.push_back(0.0);
            continue;
        }
        if (cc.s <= kCoincidenceTol && term.mu != 0.0)
            throw SingularityError("potential_terms: s = 0 with a mu != 0 term "
                                   "(all ions coincide)");
        double pair_sum = 0.0;
        for (int alpha = 0; alpha < n; ++alpha)
            for (int beta = 0; beta < n; ++beta) {
                if (alpha == beta) continue;
                const double r2 = pair_r2(positions, alpha, beta);
                if (r2 <= kCoincidenceTol && term_is_singular_at_zero(term))
                    singular_pair(alpha, beta);
                pair_sum += std::pow(r2, term.nu - 1.0);
            }
        const double v = std::pow(cc.s, -term.mu) * pair_sum;
        const double contribution = 2.0 * params.a_c * term.coeff * v;
        out.v_values.push_back(v);
        out.per_term.push_back(contribution);
        out.total += contribution;
    }

    if (params.calogero_g != 0.0 && n > 1) {
        const double expo = (params.calogero_form == CalogeroForm::inverse_square) ? -2.0 : 2.0;
        double pair_sum = 0.0;
        for (int alpha = 0; alpha < n; ++alpha)
            for (int beta = 0; beta < n; ++beta) {
                if (alpha == beta) continue;
                const double diff = positions(alpha, 0) - positions(beta, 0);
                if (std::abs(diff) <= kCoincidenceTol && expo < 0) singular_pair(alpha, beta);
                pair_sum += std::pow(diff, expo);
            }
        out.calogero = 2.0 * params.a_c * params.calogero_g * pair_sum;
        out.total += out.calogero;
    }
    return out;
}

MatrixXd equilibrium_residual(const PositionMatrix& positions, const CrystalParameters& params) {
    params.validate();
    const int n = params.n_ions;
    const int d = params.dims;
    if (positions.rows() != n || positions.cols() != d)
        throw DimensionError("equilibrium_residual: positions must be n_ions x dims");

    const auto cc = collective_coordinates(positions);
    MatrixXd grad = params.b * cc.relative; // d(b s / 2)/dx = b y

    for (const PairTerm& term : params.terms) {
        if (term.coeff == 0.0 || n < 2) continue;
        if (cc.s <= kCoincidenceTol && term.mu != 0.0)
            throw SingularityError("equilibrium_residual: s = 0 with a mu != 0 term");

        double pair_sum = 0.0;
        for (int alpha = 0; alpha < n; ++alpha)
            for (int beta = 0; beta < n; ++beta) {
                if (alpha == beta) continue;
                const double r2 = pair_r2(positions, alpha, beta);
                if (r2 <= kCoincidenceTol && term_is_singular_at_zero(term))
                    singular_pair(alpha, beta);
                pair_sum += std::pow(r2, term.nu - 1.0);
            }
        const double s_pow = std::pow(cc.s, -term.mu);
        const double c2a = 2.0 * params.a_c * term.coeff;

        // d/dx of s^{-mu}: -mu s^{-mu-1} * 2 y.
        if (term.mu != 0.0)
            grad += c2a * (-term.mu) * std::pow(cc.s, -term.mu - 1.0) * pair_sum * 2.0 *
                    cc.relative;

        // d/dx of the ordered pair sum: 4 (nu-1) sum_beta (x_a - x_b) (r^2)^{nu-2}.
        if (term.nu != 1.0) {
            for (int alpha = 0; alpha < n; ++alpha)
                for (int beta = 0; beta < n; ++beta) {
                    if (alpha == beta) continue;
                    const double r2 = pair_r2(positions, alpha, beta);
                    grad.row(alpha) += c2a * s_pow * 4.0 * (term.nu - 1.0) *
                                       std::pow(r2, term.nu - 2.0) *
                                       (positions.row(alpha) - positions.row(beta));
                }
        }
    }

    if (params.calogero_g != 0.0 && n > 1) {
        const bool inv = params.calogero_form == CalogeroForm::inverse_square;
        const double c2ag = 2.0 * params.a_c * params.calogero_g;
        for (int alpha = 0; alpha < n; ++alpha) {
            double acc = 0.0;
            for (int beta = 0; beta < n; ++beta) {
                if (alpha == beta) continue;
                const double diff = positions(alpha, 0) - positions(beta, 0);
                if (std::abs(diff) <= kCoincidenceTol && inv) singular_pair(alpha, beta);
                // ordered-pair derivative: each unordered pair contributes twice
                acc += inv ? -4.0 * std::pow(diff, -3.0) : 4.0 * diff;
            }
            grad(alpha, 0) += c2ag * acc;
        }
    }
    return grad;
}

namespace {

double evaluate_or_inf(const CrystalParameters& params, const PositionMatrix& x) {
    try {
        return potential_terms(x, params).total;
    } catch (const SingularityError&) {
        return std::numeric_limits<double>::infinity();
    }
}

void recenter(PositionMatrix& x, const Eigen::RowVectorXd& centroid) {
    x.rowwise() -= (x.colwise().mean() - centroid).eval();
}

CrystalConfiguration summarize(const CrystalParameters& params, const PositionMatrix& x,
                               std::uint64_t seed) {
    CrystalConfiguration cfg;
    cfg.positions = x;
    const auto cc = collective_coordinates(x);
    cfg.relative = cc.relative;
    cfg.s = cc.s;
    cfg.residual = equilibrium_residual(x, params).cwiseAbs().maxCoeff();
    cfg.energy = potential_terms(x, params).total;
    cfg.seed = seed;
    return cfg;
}

} // namespace

CrystalConfiguration solve_equilibrium(const CrystalParameters& params,
                                       const PositionMatrix& init, const SolveOptions& opts) {
    params.validate();
    const int n = params.n_ions;
    const int d = params.dims;
    if (init.rows() != n || init.cols() != d)
        throw DimensionError("solve_equilibrium: init must be n_ions x dims");
    const int dof = n * d;

    PositionMatrix x = init;
    const Eigen::RowVectorXd centroid = init.colwise().mean();

    if (n == 1) {
        // Degenerate single ion: the origin of the relative frame.
        return summarize(params, x, opts.seed);
    }

    auto flatten = [&](const MatrixXd& m) {
        return VectorXd(Eigen::Map<const VectorXd>(m.data(), dof));
    };

    CrystalConfiguration best = summarize(params, x, opts.seed);

    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        const MatrixXd grad_mat = equilibrium_residual(x, params);
        const double res = grad_mat.cwiseAbs().maxCoeff();
        if (res <= best.residual) best = summarize(params, x, opts.seed);
        if (res < opts.tol) return summarize(params, x, opts.seed);

        const VectorXd g = flatten(grad_mat);

        // Hessian by central differences of the analytic gradient; cheap at
        // crystal sizes and accurate enough for Newton directions.
        const double h = 1e-6 * std::max(1.0, x.cwiseAbs().maxCoeff());
        MatrixXd hess(dof, dof);
        for (int kcol = 0; kcol < dof; ++kcol) {
            PositionMatrix xp = x, xm = x;
            xp.data()[kcol] += h;
            xm.data()[kcol] -= h;
            hess.col(kcol) =
                (flatten(equilibrium_residual(xp, params)) -
                 flatten(equilibrium_residual(xm, params))) /
                (2.0 * h);
        }
        hess = 0.5 * (hess + hess.transpose()).eval();

        // Pin the translational null space.
        const double stiff = std::max(std::abs(params.b), 1.0);
        for (int j = 0; j < d; ++j) {
            VectorXd e = VectorXd::Zero(dof);
            for (int alpha = 0; alpha < n; ++alpha) e[j * n + alpha] = 1.0;
            hess += (stiff / n) * e * e.transpose();
        }

        VectorXd direction;
        Eigen::LDLT<MatrixXd> ldlt(hess);
        bool newton_ok = (ldlt.info() == Eigen::Success && ldlt.isPositive());
        if (newton_ok) {
            direction = ldlt.solve(-g);
            newton_ok = direction.allFinite() &&
                        g.dot(direction) < -1e-14 * g.norm() * direction.norm();
        }
        if (!newton_ok) direction = -g; // indefinite Hessian: plain descent

        // Armijo backtracking on W, with rounding slack so the endgame (where
        // W changes fall below double precision) still makes progress.
        const double w0 = evaluate_or_inf(params, x);
        const double slope = g.dot(direction);
        const double slack = 4.0 * std::numeric_limits<double>::epsilon() * std::abs(w0);
        double lambda = 1.0;
        PositionMatrix x_next = x;
        bool moved = false;
        while (lambda > 1e-14) {
            PositionMatrix trial = x;
            Eigen::Map<VectorXd>(trial.data(), dof) += lambda * direction;
            recenter(trial, centroid);
            const double w_trial = evaluate_or_inf(params, trial);
            if (w_trial <= w0 + 1e-4 * lambda * slope + slack) {
                x_next = trial;
                moved = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!moved && newton_ok) {
            // Newton contracts the residual near the root even when W is flat
            // to machine precision; accept the full step on that evidence.
            PositionMatrix trial = x;
            Eigen::Map<VectorXd>(trial.data(), dof) += direction;
            recenter(trial, centroid);
            try {
                if (equilibrium_residual(trial, params).cwiseAbs().maxCoeff() < res) {
                    x_next = trial;
                    moved = true;
                }
            } catch (const SingularityError&) {
            }
        }
        if (!moved) break; // line search stalled; report best-so-far below
        x = x_next;
    }

    const CrystalConfiguration last = summarize(params, x, opts.seed);
    if (last.residual < best.residual) best = last;
    if (best.residual < opts.tol) return best;
    std::ostringstream os;
    os << "solve_equilibrium: residual " << best.residual << " above tol " << opts.tol
       << " after " << opts.max_iterations << " iterations";
    throw IterationLimitError(os.str(), best);
}

std::vector<double> hermite_zeros(int n) {
    if (n < 1) throw Error("hermite_zeros requires n >= 1");
    if (n > 200) throw Error("hermite_zeros: n > 200 rejected");
    if (n == 1) return {0.0};

    MatrixXd jacobi = MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double off = std::sqrt(k / 2.0);
        jacobi(k - 1, k) = off;
        jacobi(k, k - 1) = off;
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(jacobi);
    if (eig.info() != Eigen::Success) throw Error("hermite_zeros: eigensolver failed");
    std::vector<double> zeros(eig.eigenvalues().data(), eig.eigenvalues().data() + n);
    std::sort(zeros.begin(), zeros.end());
    // The spectrum is symmetric; enforce it exactly.
    for (int i = 0; i < n / 2; ++i) {
        const double z = 0.5 * (zeros[n - 1 - i] - zeros[i]);
        zeros[i] = -z;
        zeros[n - 1 - i] = z;
    }
    if (n % 2 == 1) zeros[n / 2] = 0.0;
    return zeros;
}

CrystalConfiguration calogero_equilibrium(const CrystalParameters& params, double scale) {
    params.validate();
    if (params.dims != 1) throw Error("calogero_equilibrium: 1D only");
    if (params.calogero_g == 0.0)
        throw Error("calogero_equilibrium: calogero_g must be nonzero");
    const int n = params.n_ions;

    double kappa = scale;
    if (kappa == 0.0) {
        const double arg = 4.0 * params.a_c * params.calogero_g / params.b;
        if (!(arg > 0))
            throw Error("calogero_equilibrium: derived scale requires a_c*g/b > 0");
        kappa = std::pow(arg, 0.25);
    }

    const std::vector<double> zeros = hermite_zeros(n);
    PositionMatrix x(n, 1);
    for (int i = 0; i < n; ++i) x(i, 0) = kappa * zeros[i];

    CrystalConfiguration cfg = summarize(params, x, 0);

    // Residual check in the scaled frame, where the factor cancels: the
    // normalized inverse-square trap (b = 1, 2 a_c g = 1/2) has the Hermite
    // zeros as exact critical points.
    CrystalParameters normalized = params;
    normalized.b = 1.0;
    normalized.a_c = 1.0;
    normalized.calogero_g = 0.25;
    normalized.terms.clear();
    PositionMatrix xi(n, 1);
    for (int i = 0; i < n; ++i) xi(i, 0) = zeros[i];
    const double scaled_residual =
        (n > 1) ? equilibrium_residual(xi, normalized).cwiseAbs().maxCoeff() : 0.0;
    cfg.verified = scaled_residual < 1e-8;
    return cfg;
}

std::vector<CrystalConfiguration> solve_multi_start(const CrystalParameters& params,
                                                    int n_starts, double spread,
                                                    const SolveOptions& opts) {
    if (n_starts < 1) throw Error("solve_multi_start requires n_starts >= 1");
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> box(-spread, spread);

    std::vector<PositionMatrix> inits;
    inits.reserve(static_cast<std::size_t>(n_starts));
    for (int s = 0; s < n_starts; ++s) {
        PositionMatrix init(params.n_ions, params.dims);
        for (int i = 0; i < params.n_ions; ++i)
            for (int j = 0; j < params.dims; ++j) init(i, j) = box(rng);
        inits.push_back(std::move(init));
    }

    std::vector<CrystalConfiguration> out(static_cast<std::size_t>(n_starts));
    parallel_for(static_cast<std::size_t>(n_starts), [&](std::size_t idx) {
        out[idx] = solve_equilibrium(params, inits[idx], opts);
    });
    return out;
}

} // namespace paulsim::crystal
