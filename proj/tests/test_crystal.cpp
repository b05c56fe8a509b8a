#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "paulsim/crystal.hpp"
#include "paulsim/errors.hpp"

#include <cmath>
#include <random>

using namespace paulsim;
using crystal::CalogeroForm;
using crystal::CrystalParameters;
using crystal::PositionMatrix;
using Eigen::MatrixXd;

namespace {

CrystalParameters coulomb_chain(int n, double b = 1.0, double a_c = 1.0) {
    CrystalParameters p;
    p.n_ions = n;
    p.dims = 1;
    p.b = b;
    p.a_c = a_c;
    p.terms.push_back({0.0, 0.5, 1.0});
    return p;
}

PositionMatrix positions1d(std::initializer_list<double> xs) {
    PositionMatrix m(static_cast<int>(xs.size()), 1);
    int i = 0;
    for (double x : xs) m(i++, 0) = x;
    return m;
}

// Finite-difference gradient of W for the cross-validation property.
MatrixXd fd_gradient(const PositionMatrix& x, const CrystalParameters& p, double h = 1e-6) {
    MatrixXd g(x.rows(), x.cols());
    for (int i = 0; i < x.rows(); ++i)
        for (int j = 0; j < x.cols(); ++j) {
            PositionMatrix xp = x, xm = x;
            xp(i, j) += h;
            xm(i, j) -= h;
            g(i, j) = (crystal::potential_terms(xp, p).total -
                       crystal::potential_terms(xm, p).total) /
                      (2.0 * h);
        }
    return g;
}

double bisect(const std::function<double(double)>& f, double lo, double hi) {
    REQUIRE(f(lo) * f(hi) < 0.0);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(lo) * f(mid) <= 0.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST_CASE("collective_coordinates: centering, invariance, single ion") {
    const auto cc = crystal::collective_coordinates(positions1d({1.0, -1.0}));
    CHECK(cc.relative(0, 0) == doctest::Approx(1.0));
    CHECK(cc.relative(1, 0) == doctest::Approx(-1.0));
    CHECK(cc.s == doctest::Approx(2.0));

    const auto shifted = crystal::collective_coordinates(positions1d({1.0 + 5.3, -1.0 + 5.3}));
    CHECK((shifted.relative - cc.relative).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(shifted.s == doctest::Approx(cc.s).epsilon(1e-12));

    const auto single = crystal::collective_coordinates(positions1d({4.2}));
    CHECK(single.relative(0, 0) == doctest::Approx(0.0));
    CHECK(single.s == doctest::Approx(0.0));
}

TEST_CASE("potential_terms: Coulomb pair at distance 2 and the harmonic part") {
    auto p = coulomb_chain(2, 1.0, 0.5);
    const auto w = crystal::potential_terms(positions1d({-1.0, 1.0}), p);
    // ordered double sum: V_{0,1/2} = 2 * (1/2) = 1
    CHECK(w.v_values[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(w.harmonic == doctest::Approx(1.0).epsilon(1e-14)); // b s / 2 with s = 2
    CHECK(w.total == doctest::Approx(w.harmonic + 2.0 * 0.5 * 1.0 * 1.0).epsilon(1e-14));
}

TEST_CASE("potential_terms: scaling degrees of V_{mu,nu}") {
    CrystalParameters p;
    p.n_ions = 3;
    p.dims = 2;
    p.b = 0.0;
    p.a_c = 1.0;
    p.terms.push_back({1.0, 2.0, 1.0}); // degree 2(nu-1) - 2mu = 0: scale invariant
    PositionMatrix x(3, 2);
    x << 0.3, -0.7, 1.2, 0.4, -0.9, 0.1;
    const double v1 = crystal::potential_terms(x, p).v_values[0];
    const double v2 = crystal::potential_terms((2.5 * x).eval(), p).v_values[0];
    CHECK(v1 == doctest::Approx(v2).epsilon(1e-12));

    p.terms[0] = {1.0, 1.0, 0.0}; // mu == nu needs zero coefficient
    CHECK_NOTHROW(p.validate());
    p.terms[0] = {1.0, 1.0, 1.0};
    CHECK_THROWS_AS(p.validate(), Error);

    // (mu=0, nu=1): ordered pair count N(N-1), scale free by inspection
    p.terms[0] = {0.0, 1.0, 1.0};
    CHECK(crystal::potential_terms(x, p).v_values[0] == doctest::Approx(6.0));
}

TEST_CASE("equilibrium_residual matches finite differences of W") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> box(-2.0, 2.0);

    std::vector<CrystalParameters> cases;
    cases.push_back(coulomb_chain(4));
    {
        CrystalParameters mixed;
        mixed.n_ions = 3;
        mixed.dims = 2;
        mixed.b = 0.8;
        mixed.a_c = 0.6;
        mixed.terms.push_back({0.0, 0.5, 1.0});
        mixed.terms.push_back({1.0, 2.0, 0.3});
        cases.push_back(mixed);
    }
    {
        CrystalParameters cal;
        cal.n_ions = 4;
        cal.dims = 1;
        cal.b = 1.2;
        cal.a_c = 0.9;
        cal.calogero_g = 0.7;
        cases.push_back(cal);
        cal.calogero_form = CalogeroForm::printed_square;
        cases.push_back(cal);
    }

    for (const auto& params : cases) {
        for (int probe = 0; probe < 20; ++probe) {
            PositionMatrix x(params.n_ions, params.dims);
            for (int i = 0; i < x.size(); ++i) x.data()[i] = box(rng);
            // keep probes away from coincidences
            bool degenerate = false;
            for (int i = 0; i < params.n_ions && !degenerate; ++i)
                for (int j = i + 1; j < params.n_ions; ++j)
                    if ((x.row(i) - x.row(j)).norm() < 0.3) degenerate = true;
            if (degenerate) continue;

            const MatrixXd analytic = crystal::equilibrium_residual(x, params);
            const MatrixXd fd = fd_gradient(x, params);
            const double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
            CHECK((analytic - fd).cwiseAbs().maxCoeff() / scale < 1e-6);
        }
    }
}

TEST_CASE("two-ion Coulomb equilibrium matches the scalar cubic") {
    // outer force balance: b r / 2 = 4 a_c / r^2, i.e. r = (8 a_c / b)^{1/3}
    const double b = 1.3, a_c = 0.4;
    const auto p = coulomb_chain(2, b, a_c);
    const double r_star = bisect([&](double r) { return b * r / 2.0 - 4.0 * a_c / (r * r); },
                                 0.1, 10.0);
    CHECK(r_star == doctest::Approx(std::cbrt(8.0 * a_c / b)).epsilon(1e-10));

    const auto cfg = crystal::solve_equilibrium(p, positions1d({-0.3, 0.8}), {});
    const double r_solved = std::abs(cfg.positions(1, 0) - cfg.positions(0, 0));
    CHECK(std::abs(r_solved - r_star) < 1e-9);
    CHECK(cfg.residual < 1e-10);
}

TEST_CASE("scaling away from equilibrium produces an outward residual") {
    const auto p = coulomb_chain(2);
    const auto cfg = crystal::solve_equilibrium(p, positions1d({-0.7, 0.9}), {});
    const PositionMatrix stretched = 1.1 * cfg.relative;
    const MatrixXd res = crystal::equilibrium_residual(stretched, p);
    // Directional derivative along the scaling direction is positive past the
    // minimum and matches finite differences of W along the ray.
    double dir = 0.0;
    for (int i = 0; i < res.size(); ++i) dir += res.data()[i] * cfg.relative.data()[i];
    CHECK(dir > 0.0);
    const double h = 1e-6;
    const double w_plus =
        crystal::potential_terms(((1.1 + h) * cfg.relative).eval(), p).total;
    const double w_minus =
        crystal::potential_terms(((1.1 - h) * cfg.relative).eval(), p).total;
    CHECK(dir == doctest::Approx((w_plus - w_minus) / (2.0 * h)).epsilon(1e-6));
}

TEST_CASE("three-ion chain: spacing oracle, ordering, symmetry, multi-start") {
    const auto p = coulomb_chain(3);
    // Symmetric ansatz (-d, 0, d): outer ion balance b d = 4 a_c (1/d^2 + 1/(4 d^2)).
    const double d_star =
        bisect([&](double d) { return d - 5.0 / (d * d); }, 0.5, 5.0); // b = a_c = 1
    CHECK(d_star == doctest::Approx(std::cbrt(5.0)).epsilon(1e-10));

    const auto runs = crystal::solve_multi_start(p, 5, 2.0, {1e-10, 300, 42});
    for (const auto& cfg : runs) {
        CHECK(cfg.residual < 1e-10);
        std::vector<double> xs = {cfg.relative(0, 0), cfg.relative(1, 0), cfg.relative(2, 0)};
        std::sort(xs.begin(), xs.end());
        CHECK(xs[0] < xs[1]);
        CHECK(xs[1] < xs[2]);
        CHECK(std::abs(xs[1]) < 1e-8);                   // center ion at the centroid
        CHECK(std::abs(xs[0] + xs[2]) < 1e-8);           // reflection symmetric
        CHECK(std::abs(xs[2] - d_star) < 1e-8);          // spacing matches the oracle
    }
}

TEST_CASE("translation invariance of the solved configuration") {
    const auto p = coulomb_chain(3);
    const auto base = crystal::solve_equilibrium(p, positions1d({-1.0, 0.2, 1.3}), {});
    const auto moved = crystal::solve_equilibrium(p, positions1d({-1.0 + 7.7, 0.2 + 7.7, 1.3 + 7.7}), {});
    CHECK((base.relative - moved.relative).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("energy at the solution is a local minimum") {
    const auto p = coulomb_chain(3);
    const auto cfg = crystal::solve_equilibrium(p, positions1d({-2.0, 0.1, 1.7}), {});
    // Finite-difference Hessian of W at the solution has no negative directions
    // beyond the tolerance (translations sit at exactly zero).
    const int dof = 3;
    MatrixXd hess(dof, dof);
    const double h = 1e-5;
    for (int k = 0; k < dof; ++k) {
        PositionMatrix xp = cfg.positions, xm = cfg.positions;
        xp(k, 0) += h;
        xm(k, 0) -= h;
        const MatrixXd gp = crystal::equilibrium_residual(xp, p);
        const MatrixXd gm = crystal::equilibrium_residual(xm, p);
        for (int r = 0; r < dof; ++r) hess(r, k) = (gp(r, 0) - gm(r, 0)) / (2.0 * h);
    }
    const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (hess + hess.transpose()));
    CHECK(eig.eigenvalues().minCoeff() > -1e-6);
}

TEST_CASE("degenerate single ion") {
    CrystalParameters p;
    p.n_ions = 1;
    p.dims = 2;
    p.b = 1.0;
    PositionMatrix x(1, 2);
    x << 0.4, -0.2;
    const auto cfg = crystal::solve_equilibrium(p, x, {});
    CHECK(cfg.residual == doctest::Approx(0.0));
    CHECK(cfg.s == doctest::Approx(0.0));
}

TEST_CASE("coincident ions raise SingularityError") {
    const auto p = coulomb_chain(2);
    CHECK_THROWS_AS(crystal::potential_terms(positions1d({0.5, 0.5}), p), SingularityError);
    CHECK_THROWS_AS(crystal::equilibrium_residual(positions1d({0.5, 0.5}), p),
                    SingularityError);
}

TEST_CASE("iteration limit carries the best configuration so far") {
    const auto p = coulomb_chain(3);
    crystal::SolveOptions opts;
    opts.max_iterations = 1;
    opts.tol = 1e-12;
    try {
        crystal::solve_equilibrium(p, positions1d({-9.0, 0.3, 11.0}), opts);
        FAIL("expected IterationLimitError");
    } catch (const crystal::IterationLimitError& e) {
        CHECK(e.best.positions.rows() == 3);
        CHECK(std::isfinite(e.best.residual));
    }
}

TEST_CASE("hermite_zeros: small closed forms") {
    CHECK(crystal::hermite_zeros(1) == std::vector<double>{0.0});

    const auto z2 = crystal::hermite_zeros(2);
    CHECK(z2[0] == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(z2[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

    const auto z3 = crystal::hermite_zeros(3);
    CHECK(z3[0] == doctest::Approx(-std::sqrt(1.5)).epsilon(1e-12));
    CHECK(z3[1] == doctest::Approx(0.0));
    CHECK(z3[2] == doctest::Approx(std::sqrt(1.5)).epsilon(1e-12));

    // H5 = 32x^5 - 160x^3 + 120x: nonzero roots at sqrt((5 +- sqrt(10))/2).
    const auto z5 = crystal::hermite_zeros(5);
    CHECK(z5[4] == doctest::Approx(std::sqrt((5.0 + std::sqrt(10.0)) / 2.0)).epsilon(1e-12));
    CHECK(z5[3] == doctest::Approx(std::sqrt((5.0 - std::sqrt(10.0)) / 2.0)).epsilon(1e-12));

    CHECK_THROWS_AS(crystal::hermite_zeros(0), Error);
    CHECK_THROWS_AS(crystal::hermite_zeros(201), Error);
}

TEST_CASE("hermite_zeros: residual and symmetry properties up to n = 40") {
    for (int n : {4, 9, 16, 25, 40}) {
        const auto zeros = crystal::hermite_zeros(n);
        for (int i = 0; i < n; ++i) {
            // |H_n(z)| < 1e-8 max(1, |H_n'(z)|) with H_n' = 2 n H_{n-1}
            auto hermite = [](int m, double x) {
                double hm = 1.0, h = 2.0 * x;
                if (m == 0) return hm;
                for (int k = 2; k <= m; ++k) {
                    const double hn = 2.0 * x * h - 2.0 * (k - 1) * hm;
                    hm = h;
                    h = hn;
                }
                return h;
            };
            const double value = hermite(n, zeros[i]);
            const double deriv = 2.0 * n * hermite(n - 1, zeros[i]);
            CHECK(std::abs(value) < 1e-8 * std::max(1.0, std::abs(deriv)));
            CHECK(std::abs(zeros[i] + zeros[n - 1 - i]) < 1e-12);
        }
    }
}

TEST_CASE("calogero_equilibrium: scaled Hermite zeros with verified residual") {
    for (int n : {2, 3, 5}) {
        CrystalParameters p;
        p.n_ions = n;
        p.dims = 1;
        p.b = 1.7;
        p.a_c = 0.8;
        p.calogero_g = 0.6;
        const auto cfg = crystal::calogero_equilibrium(p);
        CHECK(cfg.verified);
        CHECK(cfg.residual < 1e-8);

        const double kappa = std::pow(4.0 * p.a_c * p.calogero_g / p.b, 0.25);
        const auto zeros = crystal::hermite_zeros(n);
        for (int i = 0; i < n; ++i)
            CHECK(std::abs(cfg.positions(i, 0) / kappa - zeros[i]) < 1e-8);

        // Reflection symmetry about the centroid.
        for (int i = 0; i < n; ++i)
            CHECK(std::abs(cfg.relative(i, 0) + cfg.relative(n - 1 - i, 0)) < 1e-10);
    }
}

TEST_CASE("calogero_equilibrium: Newton descent lands on the same configuration") {
    CrystalParameters p;
    p.n_ions = 3;
    p.dims = 1;
    p.b = 1.0;
    p.a_c = 1.0;
    p.calogero_g = 0.5;
    const auto analytic = crystal::calogero_equilibrium(p);
    const auto solved =
        crystal::solve_equilibrium(p, positions1d({-1.9, 0.2, 1.6}), {1e-11, 300, 0});
    std::vector<double> a{analytic.relative(0, 0), analytic.relative(1, 0),
                          analytic.relative(2, 0)};
    std::vector<double> s{solved.relative(0, 0), solved.relative(1, 0), solved.relative(2, 0)};
    std::sort(a.begin(), a.end());
    std::sort(s.begin(), s.end());
    for (int i = 0; i < 3; ++i) CHECK(std::abs(a[i] - s[i]) < 1e-8);
}

TEST_CASE("printed Calogero form has no Hermite-zero equilibrium (documented)") {
    CrystalParameters p;
    p.n_ions = 3;
    p.dims = 1;
    p.b = 1.0;
    p.a_c = 1.0;
    p.calogero_g = 0.5;
    p.calogero_form = CalogeroForm::printed_square;
    const auto cfg = crystal::calogero_equilibrium(p);
    CHECK_FALSE(cfg.verified);
}
