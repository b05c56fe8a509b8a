#include "paulsim/io.hpp"

#include "paulsim/errors.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

namespace paulsim::io {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_stability_csv(std::ostream& os, const hill::StabilityGrid& grid) {
    os << "a,q_M,trace,mu,class\n";
    for (std::size_t ia = 0; ia < grid.a_values.size(); ++ia) {
        for (std::size_t iq = 0; iq < grid.q_values.size(); ++iq) {
            const auto& cell = grid.at(ia, iq);
            os << format_double(grid.a_values[ia]) << ',' << format_double(grid.q_values[iq])
               << ',' << format_double(cell.trace) << ',' << format_double(cell.mu) << ','
               << hill::to_string(cell.cls) << '\n';
        }
    }
}

void write_stability_pgm(std::ostream& os, const hill::StabilityGrid& grid) {
    const std::size_t w = grid.q_values.size();
    const std::size_t h = grid.a_values.size();
    os << "P5\n" << w << ' ' << h << "\n255\n";
    for (std::size_t ia = 0; ia < h; ++ia) {
        for (std::size_t iq = 0; iq < w; ++iq) {
            unsigned char value = 128;
            switch (grid.at(ia, iq).cls) {
                case hill::Stability::stable:
                case hill::Stability::marginal: value = 255; break;
                case hill::Stability::unstable: value = 0; break;
                case hill::Stability::failed: value = 128; break;
            }
            os.put(static_cast<char>(value));
        }
    }
}

void write_wavefunction_csv(std::ostream& os, const qstates::WavefunctionSample& sample) {
    os << "x,re_psi,im_psi\n";
    for (std::size_t i = 0; i < sample.grid.size(); ++i) {
        os << format_double(sample.grid[i]) << ',' << format_double(sample.values[i].real())
           << ',' << format_double(sample.values[i].imag()) << '\n';
    }
}

void write_wavefunction_jsonl(std::ostream& os, const qstates::WavefunctionSample& sample) {
    nlohmann::json rec;
    rec["n"] = sample.n;
    rec["t"] = sample.time;
    rec["x"] = sample.grid;
    std::vector<double> re(sample.values.size()), im(sample.values.size());
    for (std::size_t i = 0; i < sample.values.size(); ++i) {
        re[i] = sample.values[i].real();
        im[i] = sample.values[i].imag();
    }
    rec["re"] = re;
    rec["im"] = im;
    os << rec.dump() << '\n';
}

nlohmann::json floquet_json(const hill::FloquetResult& result, double a, double q_m,
                            double omega) {
    nlohmann::json j;
    j["a"] = a;
    j["q_m"] = q_m;
    j["omega"] = omega;
    j["trace"] = result.trace;
    j["mu"] = result.mu;
    j["class"] = hill::to_string(result.stability);
    j["det_residual"] = result.det_residual;
    j["monodromy"] = {{result.monodromy(0, 0), result.monodromy(0, 1)},
                      {result.monodromy(1, 0), result.monodromy(1, 1)}};
    if (result.stability == hill::Stability::stable)
        j["matched_omega"] = result.matched_omega;
    return j;
}

nlohmann::json crystal_json(const crystal::CrystalConfiguration& config) {
    nlohmann::json j;
    std::vector<std::vector<double>> pos(static_cast<std::size_t>(config.positions.rows()));
    for (Eigen::Index i = 0; i < config.positions.rows(); ++i) {
        pos[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(config.positions.cols()));
        for (Eigen::Index k = 0; k < config.positions.cols(); ++k)
            pos[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = config.positions(i, k);
    }
    j["positions"] = pos;
    j["s"] = config.s;
    j["residual"] = config.residual;
    j["energy"] = config.energy;
    j["seed"] = config.seed;
    j["verified"] = config.verified;
    return j;
}

void write_packet_trace_jsonl(std::ostream& os, const hagedorn::PacketTrace& trace) {
    for (std::size_t i = 0; i < trace.states.size(); ++i) {
        const hagedorn::PacketState& s = trace.states[i];
        nlohmann::json rec;
        rec["t"] = trace.times[i];
        rec["q"] = std::vector<double>(s.q.data(), s.q.data() + s.q.size());
        rec["p"] = std::vector<double>(s.p.data(), s.p.data() + s.p.size());
        rec["S"] = s.action;
        const auto flatten = [](const Eigen::MatrixXcd& m, bool real_part) {
            std::vector<double> out;
            out.reserve(static_cast<std::size_t>(m.size()));
            for (Eigen::Index col = 0; col < m.cols(); ++col)
                for (Eigen::Index row = 0; row < m.rows(); ++row)
                    out.push_back(real_part ? m(row, col).real() : m(row, col).imag());
            return out;
        };
        rec["A_re"] = flatten(s.a_matrix, true);
        rec["A_im"] = flatten(s.a_matrix, false);
        rec["B_re"] = flatten(s.b_matrix, true);
        rec["B_im"] = flatten(s.b_matrix, false);
        rec["invariant_residual"] = s.invariant_residual();
        os << rec.dump() << '\n';
    }
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open output file: " + path);
    out << content;
    if (!out) throw Error("failed writing output file: " + path);
}

} // namespace paulsim::io
