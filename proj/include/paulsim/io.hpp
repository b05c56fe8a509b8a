#pragma once

#include "paulsim/crystal.hpp"
#include "paulsim/hagedorn.hpp"
#include "paulsim/hill.hpp"
#include "paulsim/states.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace paulsim::io {

/// Round-trip exact decimal rendering (printf %.17g), locale independent.
std::string format_double(double v);

/// Columns: a, q_M, trace, mu, class. Row order: a outer, q_M inner.
void write_stability_csv(std::ostream& os, const hill::StabilityGrid& grid);

/// Binary P5, 8-bit, width = n_q, height = n_a, row i = a_values[i] ascending.
/// 255 = stable (and marginal), 0 = unstable, 128 = failed.
void write_stability_pgm(std::ostream& os, const hill::StabilityGrid& grid);

/// Columns: x, Re psi, Im psi.
void write_wavefunction_csv(std::ostream& os, const qstates::WavefunctionSample& sample);

/// One JSON record keyed by (n, t) holding the full sample.
void write_wavefunction_jsonl(std::ostream& os, const qstates::WavefunctionSample& sample);

nlohmann::json floquet_json(const hill::FloquetResult& result, double a, double q_m,
                            double omega);

nlohmann::json crystal_json(const crystal::CrystalConfiguration& config);

/// One record per output time: q, p, S, flattened Re/Im of A and B, and the
/// invariant residual.
void write_packet_trace_jsonl(std::ostream& os, const hagedorn::PacketTrace& trace);

void write_text_file(const std::string& path, const std::string& content);

} // namespace paulsim::io
