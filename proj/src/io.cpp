#include "nanonmr/io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nanonmr {

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_trace(const std::string& path, const PhotonTrace& trace)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("write_trace: cannot open " + path);
    out << "# photon trace, one count per measurement\n";
    if (trace.meta.config_digest != 0)
        out << "# config_digest=" << trace.meta.config_digest << "\n";
    out << "spacing_s=" << format_double(trace.spacing) << " seed=" << trace.meta.seed
        << "\n";
    for (const auto c : trace.counts)
        out << c << "\n";
    if (!out)
        throw std::runtime_error("write_trace: write failed for " + path);
}

PhotonTrace read_trace(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("read_trace: cannot open " + path);
    PhotonTrace trace;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        if (!have_header) {
            double spacing = 0.0;
            std::uint64_t seed = 0;
            if (std::sscanf(line.c_str(), "spacing_s=%lg seed=%" SCNu64, &spacing, &seed) != 2)
                throw std::runtime_error("read_trace: bad header line: " + line);
            if (!(spacing > 0.0))
                throw std::runtime_error("read_trace: nonpositive spacing");
            trace.spacing = spacing;
            trace.meta.seed = seed;
            have_header = true;
            continue;
        }
        long long v = 0;
        if (std::sscanf(line.c_str(), "%lld", &v) != 1 || v < 0)
            throw std::runtime_error("read_trace: bad count line: " + line);
        trace.counts.push_back(static_cast<std::uint32_t>(v));
    }
    if (!have_header)
        throw std::runtime_error("read_trace: missing header in " + path);
    return trace;
}

std::vector<std::int64_t> read_timetags(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("read_timetags: cannot open " + path);
    std::vector<std::int64_t> tags;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        long long v = 0;
        if (std::sscanf(line.c_str(), "%lld", &v) != 1)
            throw std::runtime_error("read_timetags: bad line: " + line);
        if (!tags.empty() && v < tags.back())
            throw std::runtime_error("read_timetags: timestamps decrease at " + line);
        tags.push_back(v);
    }
    return tags;
}

PhotonTrace ingest_timetags(const std::vector<std::int64_t>& tags_ns,
                            double tau_tilde,
                            double window_offset,
                            double window_length,
                            std::int64_t n_measurements)
{
    if (!(tau_tilde > 0.0))
        throw std::invalid_argument("ingest_timetags: tau_tilde must be > 0");
    if (!(window_offset >= 0.0) || !(window_length > 0.0)
        || window_offset + window_length > tau_tilde)
        throw std::invalid_argument("ingest_timetags: window must fit inside tau_tilde");
    for (std::size_t i = 1; i < tags_ns.size(); ++i)
        if (tags_ns[i] < tags_ns[i - 1])
            throw std::invalid_argument("ingest_timetags: timestamps must be nondecreasing");

    std::int64_t n = n_measurements;
    if (n == 0 && !tags_ns.empty()) {
        const double t_last = static_cast<double>(tags_ns.back()) * 1e-9;
        n = static_cast<std::int64_t>(std::floor((t_last - window_offset) / tau_tilde)) + 1;
        if (n < 0)
            n = 0;
    }

    PhotonTrace trace;
    trace.spacing = tau_tilde;
    trace.counts.assign(static_cast<std::size_t>(n), 0);
    for (const std::int64_t tag : tags_ns) {
        const double t = static_cast<double>(tag) * 1e-9;
        const double j_real = std::floor((t - window_offset) / tau_tilde);
        if (j_real < 0.0 || j_real >= static_cast<double>(n))
            continue;
        const auto j = static_cast<std::size_t>(j_real);
        const double in_window = t - (static_cast<double>(j) * tau_tilde + window_offset);
        // half-open window: a tag exactly at the end is excluded
        if (in_window >= 0.0 && in_window < window_length)
            ++trace.counts[j];
    }
    return trace;
}

ReadoutTrace read_readout_trace_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("read_readout_trace_csv: cannot open " + path);
    ReadoutTrace trace;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        if (!have_header) {
            if (line != "t_ns,counts0,counts1")
                throw std::runtime_error(
                    "read_readout_trace_csv: expected header t_ns,counts0,counts1");
            have_header = true;
            continue;
        }
        double t_ns = 0.0, c0 = 0.0, c1 = 0.0;
        if (std::sscanf(line.c_str(), "%lg,%lg,%lg", &t_ns, &c0, &c1) != 3)
            throw std::runtime_error("read_readout_trace_csv: bad row: " + line);
        trace.time_axis.push_back(t_ns * 1e-9);
        trace.counts0.push_back(c0);
        trace.counts1.push_back(c1);
    }
    if (!have_header)
        throw std::runtime_error("read_readout_trace_csv: empty file");
    return trace;
}

}  // namespace nanonmr
