// Acceptance suite: one pass/fail line per criterion, exit code = failures.
// Each criterion pins its tolerance in code; runtimes are reported alongside.

#include "paulsim/cli.hpp"
#include "paulsim/crystal.hpp"
#include "paulsim/hagedorn.hpp"
#include "paulsim/hill.hpp"
#include "paulsim/io.hpp"
#include "paulsim/oracle.hpp"
#include "paulsim/states.hpp"
#include "paulsim/validation.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <unistd.h>
#include <vector>

using namespace paulsim;
using Complex = std::complex<double>;

namespace {

int failures = 0;

void criterion(int number, const std::string& title, const std::function<bool(std::string&)>& body) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %2d: %s (%.1fs)%s%s\n", ok ? "PASS" : "FAIL", number, title.c_str(),
                seconds, detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

hill::HillParameters mathieu(double a, double q_m, double omega = 2.0) {
    hill::HillParameters p;
    p.a = a;
    p.q_m = q_m;
    p.drive_omega = omega;
    return p;
}

std::string fmt(double v) { return io::format_double(v); }

// 1. Wronskian conservation at 20 random stable points over 100 periods.
bool wronskian_conservation(std::string& detail) {
    std::mt19937_64 rng(20240817);
    std::uniform_real_distribution<double> a_dist(0.0, 0.15);
    std::uniform_real_distribution<double> q_dist(0.05, 0.6);
    std::uniform_real_distribution<double> w_dist(0.3, 1.5);

    int tested = 0;
    double worst = 0.0;
    while (tested < 20) {
        const auto p = mathieu(a_dist(rng), q_dist(rng));
        if (hill::monodromy(p, 1e-8).stability != hill::Stability::stable) continue;
        const auto trace =
            hill::integrate_hill(p, w_dist(rng), 100.0 * p.period()); // default tolerance
        worst = std::max(worst, trace.wronskian_drift);
        ++tested;
    }
    detail = "max drift " + fmt(worst);
    return worst < 1e-9;
}

// 2. Constant-coefficient exactness: u = e^{i w0 t} and mu = Omega sqrt(a)/2.
bool constant_coefficient_exactness(std::string& detail) {
    double worst_u = 0.0, worst_mu = 0.0;
    for (double a : {0.25, 1.0, 2.0}) {
        const auto p = mathieu(a, 0.0);
        const double w0 = p.drive_omega * std::sqrt(a) / 2.0;
        const auto trace = hill::integrate_hill(p, w0, 3.0 * p.period(), 1e-12);
        for (std::size_t i = 0; i < trace.times.size(); ++i) {
            const Complex expect = std::exp(Complex(0.0, w0 * trace.times[i]));
            worst_u = std::max(worst_u, std::abs(trace.u[i] - expect));
        }
        worst_mu = std::max(worst_mu, std::abs(hill::monodromy(p, 1e-12).mu - w0));
    }
    detail = "max |u - e^{iwt}| " + fmt(worst_u) + ", max |mu - w0| " + fmt(worst_mu);
    return worst_u < 1e-9 && worst_mu < 1e-9;
}

// 3. Mathieu first-zone edge along a = 0 at q ~ 0.908, two tolerances.
bool mathieu_boundary(std::string& detail) {
    auto edge_at = [](double tol) {
        double lo = 0.8, hi = 1.0;
        auto excess = [&](double q) {
            return std::abs(hill::monodromy(mathieu(0.0, q), tol).trace) - 2.0;
        };
        if (!(excess(lo) < 0.0 && excess(hi) > 0.0)) return -1.0;
        while (hi - lo > 1e-6) {
            const double mid = 0.5 * (lo + hi);
            (excess(mid) < 0.0 ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    const double e1 = edge_at(1e-8);
    const double e2 = edge_at(1e-10);
    detail = "edge " + fmt(e1) + " / " + fmt(e2);
    return std::abs(e1 - 0.908) <= 0.005 && std::abs(e2 - 0.908) <= 0.005 &&
           std::abs(e1 - e2) < 1e-4;
}

// 4. Quasienergy-state correctness against the spectral oracle; E0 fit.
bool quasienergy_states(std::string& detail) {
    checks::QuasienergyCheckOptions opts;
    opts.n_max = 3;
    opts.periods = 2.0;
    opts.grid_points = 2048;
    opts.steps_per_period = 8192;
    opts.tol = 1e-11;
    const auto r = checks::compare_quasienergy_states(mathieu(0.0, 0.4), opts);
    double worst = 0.0;
    for (double e : r.max_l2_error) worst = std::max(worst, e);
    detail = "max L2 " + fmt(worst) + ", E0 " + fmt(r.e0_fit);
    return worst < 1e-5 && std::abs(r.e0_fit - 1.0) <= 1e-3;
}

// 5. Orthonormality of phi_0..phi_6 and the ladder property for n <= 5.
bool orthonormality_and_ladder(std::string& detail) {
    const auto params = mathieu(0.0, 0.4);
    const auto floquet = hill::monodromy(params, 1e-11);
    qstates::ContextOptions copts;
    copts.tol = 1e-11;
    qstates::OscillatorContext ctx(params, floquet.matched_omega, 1.2 * params.period(), copts);

    const double T = params.period();
    double worst_gram = 0.0, worst_ladder = 0.0;
    for (double t : {0.0, T / 3.0, 0.8 * T}) {
        std::vector<qstates::WavefunctionSample> family;
        for (int n = 0; n <= 6; ++n) family.push_back(qstates::sample_phin(n, t, ctx));
        for (int i = 0; i <= 6; ++i)
            for (int j = 0; j <= 6; ++j) {
                const Complex g = qstates::sample_overlap(family[i], family[j]);
                worst_gram = std::max(worst_gram, std::abs(g - (i == j ? 1.0 : 0.0)));
            }
        for (int n = 1; n <= 5; ++n) {
            auto lowered = qstates::annihilation_action(n, t, ctx);
            const auto& target = family[static_cast<std::size_t>(n - 1)];
            double acc = 0.0;
            const double dx = lowered.grid[1] - lowered.grid[0];
            for (std::size_t i = 0; i < lowered.values.size(); ++i)
                acc += std::norm(lowered.values[i] - std::sqrt(double(n)) * target.values[i]);
            worst_ladder = std::max(worst_ladder, std::sqrt(acc * dx));
        }
    }
    detail = "Gram dev " + fmt(worst_gram) + ", ladder dev " + fmt(worst_ladder);
    return worst_gram < 1e-7 && worst_ladder < 1e-6;
}

// 6. Hagedorn matrix invariants over 100 periods, 1D and coupled 2D.
bool hagedorn_invariants(std::string& detail) {
    using Eigen::MatrixXcd;
    using Eigen::VectorXd;
    double worst = 0.0;

    {
        const auto potential = harmonic_potential(1.0, 1.0, 1);
        auto s0 = hagedorn::make_packet(MatrixXcd::Identity(1, 1), MatrixXcd::Identity(1, 1),
                                        VectorXd::Zero(1), VectorXd::Zero(1), 1.0, 1.0, {0});
        const auto s = hagedorn::propagate_to(potential, s0, 100.0 * 2.0 * M_PI, 1e-12);
        worst = std::max(worst, s.invariant_residual());
    }
    {
        Eigen::MatrixXd k(2, 2);
        k << 2.0, 0.3, 0.3, 1.0;
        const auto potential = quadratic_potential(k);
        auto s0 = hagedorn::make_packet(MatrixXcd::Identity(2, 2), MatrixXcd::Identity(2, 2),
                                        VectorXd::Zero(2), VectorXd::Zero(2), 1.0, 1.0, {0, 0});
        // 100 periods of the slower normal mode.
        const double w_slow = std::sqrt(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(k)
                                            .eigenvalues()
                                            .minCoeff());
        const auto s =
            hagedorn::propagate_to(potential, s0, 100.0 * 2.0 * M_PI / w_slow, 1e-12);
        worst = std::max(worst, s.invariant_residual());
    }
    detail = "max invariant residual " + fmt(worst);
    return worst < 1e-9;
}

// 7. Quadratic exactness: packet vs oracle for the driven trap over 5 periods.
bool quadratic_exactness(std::string& detail) {
    const auto trap = mathieu(0.0, 0.4);
    const auto potential = paul_potential(trap, 1.0, 1);
    const double T = trap.period();
    const double t_end = 5.0 * T;

    // Width near the secular match keeps the breathing inside the box.
    auto s0 = hagedorn::make_packet(2.0 * Eigen::MatrixXcd::Identity(1, 1),
                                    0.5 * Eigen::MatrixXcd::Identity(1, 1),
                                    Eigen::VectorXd::Constant(1, 0.4),
                                    Eigen::VectorXd::Constant(1, 0.2), 1.0, 1.0, {0});
    const auto s_final = hagedorn::propagate_to(potential, s0, t_end, 1e-12);

    oracle::GridSpec grid;
    grid.n = {2048, 1};
    grid.half_width = {18.0, 0.0};
    const auto psi0 = hagedorn::packet_state(s0, grid, true);
    long steps_per_period = 16384;
    double err = 0.0;
    for (int attempt = 0; attempt < 2; ++attempt) {
        const long steps = steps_per_period * 5;
        const auto evolved = oracle::split_step_evolve(potential, psi0, t_end / steps, steps);
        const auto predicted = hagedorn::packet_state(s_final, grid, true, t_end);
        err = oracle::l2_distance(evolved, predicted);
        if (err < 5e-7) break;
        steps_per_period *= 2; // split-step error dominated; refine once
    }
    detail = "L2 distance " + fmt(err);
    return err < 1e-6;
}

// 8. Semiclassical error law: slope of log error vs log hbar is 1/2.
bool semiclassical_error_law(std::string& detail) {
    const auto potential = quartic_potential(1.0, 1.0, 0.1);
    const double t_end = 1.0;

    struct Run {
        double hbar;
        int grid_n;
        long steps;
    };
    const std::vector<Run> runs = {{1e-2, 2048, 4096}, {1e-3, 8192, 8192}, {1e-4, 16384, 16384}};

    std::vector<double> log_h, log_e;
    std::string errs;
    for (const auto& run : runs) {
        auto s0 = hagedorn::make_packet(Eigen::MatrixXcd::Identity(1, 1),
                                        Eigen::MatrixXcd::Identity(1, 1),
                                        Eigen::VectorXd::Constant(1, 1.0),
                                        Eigen::VectorXd::Zero(1), run.hbar, 1.0, {0});
        const auto s_final = hagedorn::propagate_to(potential, s0, t_end, 1e-12);

        oracle::GridSpec grid;
        grid.n = {run.grid_n, 1};
        grid.half_width = {2.0, 0.0};
        oracle::EvolveOptions eopts;
        eopts.hbar = run.hbar;

        const auto psi0 = hagedorn::packet_state(s0, grid, true);
        long steps = run.steps;
        double err = 0.0;
        for (int attempt = 0; attempt < 3; ++attempt) {
            const auto evolved =
                oracle::split_step_evolve(potential, psi0, t_end / steps, steps, eopts);
            const auto check = oracle::split_step_evolve(potential, psi0, t_end / (2 * steps),
                                                         2 * steps, eopts);
            const double oracle_err = oracle::l2_distance(evolved, check);
            const auto predicted = hagedorn::packet_state(s_final, grid, true, t_end);
            err = oracle::l2_distance(check, predicted);
            if (oracle_err < 0.05 * err) break;
            steps *= 2;
        }
        log_h.push_back(std::log(run.hbar));
        log_e.push_back(std::log(err));
        errs += " " + fmt(err);
    }

    // Least-squares slope.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto m = static_cast<double>(log_h.size());
    for (std::size_t i = 0; i < log_h.size(); ++i) {
        sx += log_h[i];
        sy += log_e[i];
        sxx += log_h[i] * log_h[i];
        sxy += log_h[i] * log_e[i];
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    detail = "slope " + fmt(slope) + ", errors" + errs;
    return std::abs(slope - 0.5) <= 0.1;
}

// 9. Calogero equilibria are scaled Hermite zeros.
bool calogero_equilibria(std::string& detail) {
    double worst_coord = 0.0, worst_residual = 0.0;
    for (int n : {2, 3, 5}) {
        crystal::CrystalParameters params;
        params.n_ions = n;
        params.dims = 1;
        params.b = 1.0;
        params.a_c = 1.0;
        params.calogero_g = 0.5;
        const auto cfg = crystal::calogero_equilibrium(params);
        if (!cfg.verified) return false;
        worst_residual = std::max(worst_residual, cfg.residual);
        const double kappa = std::pow(4.0 * params.a_c * params.calogero_g / params.b, 0.25);
        const auto zeros = crystal::hermite_zeros(n);
        for (int i = 0; i < n; ++i)
            worst_coord =
                std::max(worst_coord, std::abs(cfg.positions(i, 0) / kappa - zeros[i]));
    }
    detail = "max coord dev " + fmt(worst_coord) + ", max residual " + fmt(worst_residual);
    return worst_coord < 1e-8 && worst_residual < 1e-8;
}

// 10. Coulomb chain sanity for N = 3.
bool coulomb_chain_sanity(std::string& detail) {
    crystal::CrystalParameters params;
    params.n_ions = 3;
    params.dims = 1;
    params.b = 1.0;
    params.a_c = 1.0;
    params.terms.push_back({0.0, 0.5, 1.0});
    crystal::SolveOptions opts;
    opts.seed = 7;
    const auto runs = crystal::solve_multi_start(params, 5, 2.0, opts);

    std::vector<double> reference;
    double worst = 0.0;
    for (const auto& cfg : runs) {
        std::vector<double> xs = {cfg.relative(0, 0), cfg.relative(1, 0), cfg.relative(2, 0)};
        std::sort(xs.begin(), xs.end());
        if (!(xs[0] < xs[1] && xs[1] < xs[2])) return false;          // strictly ordered
        if (std::abs(xs[0] + xs[2]) > 1e-8) return false;             // reflection symmetric
        if (reference.empty()) reference = xs;
        for (int i = 0; i < 3; ++i)
            worst = std::max(worst, std::abs(xs[static_cast<std::size_t>(i)] -
                                             reference[static_cast<std::size_t>(i)]));
    }
    detail = "max start-to-start deviation " + fmt(worst);
    return worst < 1e-8;
}

// 11. CLI reproducibility: identical config + seed gives byte-identical files.
bool cli_reproducibility(std::string& detail) {
    namespace fs = std::filesystem;
    const fs::path dir =
        fs::temp_directory_path() / ("paulsim_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const std::string out = (dir / "grid.csv").string();

    auto run_once = [&]() {
        const char* argv[] = {"paulsim", "stability", "--a",  "0:0.2:3",   "--qm",
                              "0:0.8:4", "--omega",   "2",    "--out", out.c_str()};
        return cli::run(10, argv);
    };
    auto slurp = [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream os;
        os << in.rdbuf();
        return os.str();
    };

    bool ok = run_once() == 0;
    const std::string csv1 = slurp(out);
    const std::string pgm1 = slurp((dir / "grid.pgm").string());
    const std::string man1 = slurp(out + ".manifest.json");
    ok = ok && run_once() == 0;
    ok = ok && csv1 == slurp(out) && pgm1 == slurp((dir / "grid.pgm").string()) &&
         man1 == slurp(out + ".manifest.json") && !csv1.empty() && !pgm1.empty();

    // crystal with a fixed seed, twice
    const std::string cout_path = (dir / "c.json").string();
    auto run_crystal = [&]() {
        const char* argv[] = {"paulsim", "crystal", "--model", "coulomb", "--n", "3",
                              "--seed",  "5",       "--out",   cout_path.c_str()};
        return cli::run(10, argv);
    };
    ok = ok && run_crystal() == 0;
    const std::string c1 = slurp(cout_path);
    ok = ok && run_crystal() == 0 && c1 == slurp(cout_path) && !c1.empty();

    fs::remove_all(dir);
    detail = ok ? "byte-identical CSV, PGM, manifest, crystal JSON" : "mismatch";
    return ok;
}

} // namespace

int main() {
    std::printf("paulsim acceptance suite\n");
    criterion(1, "Wronskian conservation over 100 drive periods", wronskian_conservation);
    criterion(2, "constant-coefficient exactness (u and mu)", constant_coefficient_exactness);
    criterion(3, "Mathieu first-zone boundary at q_M = 0.908 +- 0.005", mathieu_boundary);
    criterion(4, "quasienergy states vs spectral oracle, E0 = 1", quasienergy_states);
    criterion(5, "orthonormality and ladder property", orthonormality_and_ladder);
    criterion(6, "Hagedorn matrix invariants over 100 periods", hagedorn_invariants);
    criterion(7, "quadratic exactness vs oracle over 5 drive periods", quadratic_exactness);
    criterion(8, "semiclassical error law: slope 1/2 in hbar", semiclassical_error_law);
    criterion(9, "Calogero equilibria at scaled Hermite zeros", calogero_equilibria);
    criterion(10, "Coulomb chain: ordered, symmetric, multi-start consistent",
              coulomb_chain_sanity);
    criterion(11, "CLI reproducibility: byte-identical reruns", cli_reproducibility);

    if (failures == 0) {
        std::printf("all criteria passed\n");
    } else {
        std::printf("%d criterion(s) failed\n", failures);
    }
    return failures;
}
