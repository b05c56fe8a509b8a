#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "paulsim/errors.hpp"
#include "paulsim/ode.hpp"

#include <cmath>

using paulsim::ode::DenseSolution;
using paulsim::ode::integrate;
using paulsim::ode::Options;
using Eigen::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> v) {
    VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

} // namespace

TEST_CASE("exponential growth matches closed form, including dense output") {
    auto f = [](double, const VectorXd& y, VectorXd& d) { d = y; };
    const auto sol = integrate(f, vec({1.0}), 0.0, 5.0);

    CHECK(sol.eval(5.0)[0] == doctest::Approx(std::exp(5.0)).epsilon(1e-10));
    // Interpolant accuracy between step endpoints.
    for (double t = 0.0; t <= 5.0; t += 0.0137) {
        CHECK(std::abs(sol.eval(t)[0] - std::exp(t)) < 1e-8 * std::exp(t));
    }
}

TEST_CASE("harmonic oscillator stays on the circle over many periods") {
    auto f = [](double, const VectorXd& y, VectorXd& d) {
        d.resize(2);
        d[0] = y[1];
        d[1] = -y[0];
    };
    const double t_end = 100.0 * 2.0 * M_PI;
    Options opts;
    opts.rtol = 1e-12;
    opts.atol = 1e-14;
    const auto sol = integrate(f, vec({1.0, 0.0}), 0.0, t_end, opts);

    const VectorXd yf = sol.eval(t_end);
    CHECK(std::abs(yf[0] - 1.0) < 1e-8);
    CHECK(std::abs(yf[1]) < 1e-8);
    // Dense samples preserve the energy invariant to interpolant accuracy.
    for (int i = 0; i <= 1000; ++i) {
        const double t = t_end * i / 1000.0;
        const VectorXd y = sol.eval(t);
        CHECK(std::abs(y.squaredNorm() - 1.0) < 1e-9);
    }
}

TEST_CASE("time-dependent coefficient: y' = 2t y") {
    auto f = [](double t, const VectorXd& y, VectorXd& d) { d = 2.0 * t * y; };
    const auto sol = integrate(f, vec({1.0}), 0.0, 2.0);
    for (double t = 0.0; t <= 2.0; t += 0.1) {
        CHECK(sol.eval(t)[0] == doctest::Approx(std::exp(t * t)).epsilon(1e-9));
    }
}

TEST_CASE("non-finite RHS raises IntegrationError naming the time") {
    auto f = [](double t, const VectorXd& y, VectorXd& d) {
        d = y / (1.0 - t); // pole at t = 1
    };
    CHECK_THROWS_AS(integrate(f, vec({1.0}), 0.0, 2.0), paulsim::IntegrationError);
}

TEST_CASE("evaluation outside the span is rejected") {
    auto f = [](double, const VectorXd& y, VectorXd& d) { d = -y; };
    const auto sol = integrate(f, vec({1.0}), 0.0, 1.0);
    CHECK_THROWS_AS(sol.eval(2.0), paulsim::Error);
    CHECK_THROWS_AS(sol.eval(-1.0), paulsim::Error);
}

TEST_CASE("tolerance refinement reduces the endpoint error") {
    auto f = [](double t, const VectorXd& y, VectorXd& d) {
        d.resize(2);
        d[0] = y[1];
        d[1] = -std::sin(y[0]) - 0.1 * y[1] + 0.3 * std::cos(t);
    };
    Options coarse, fine;
    coarse.rtol = 1e-6;
    coarse.atol = 1e-8;
    fine.rtol = 1e-12;
    fine.atol = 1e-14;
    const auto ref = integrate(f, vec({1.2, 0.0}), 0.0, 30.0, fine);
    const auto lo = integrate(f, vec({1.2, 0.0}), 0.0, 30.0, coarse);
    const double err = (lo.eval(30.0) - ref.eval(30.0)).norm();
    CHECK(err < 1e-4);
    CHECK(err > 0.0);
}
