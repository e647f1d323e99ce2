#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nanonmr/protocol.hpp"
#include "nanonmr/simulate.hpp"

namespace nanonmr {

// Trace file: '#' comment lines, a header `spacing_s=<float> seed=<uint64>`,
// then one nonnegative integer count per line.
void write_trace(const std::string& path, const PhotonTrace& trace);
PhotonTrace read_trace(const std::string& path);

// Time-tag file: one nondecreasing integer nanosecond timestamp per line,
// '#' comments allowed.
std::vector<std::int64_t> read_timetags(const std::string& path);

// Bin photon arrival tags into per-measurement counts. Measurement j counts
// tags in the half-open window [j tau~ + offset, j tau~ + offset + length).
// n_measurements == 0 infers the length from the last tag.
PhotonTrace ingest_timetags(const std::vector<std::int64_t>& tags_ns,
                            double tau_tilde,
                            double window_offset,
                            double window_length,
                            std::int64_t n_measurements = 0);

// Readout trace CSV with header `t_ns,counts0,counts1`.
ReadoutTrace read_readout_trace_csv(const std::string& path);

// Float formatting used by every emitted table: 17 significant digits so
// values round-trip exactly.
std::string format_double(double v);

}  // namespace nanonmr
