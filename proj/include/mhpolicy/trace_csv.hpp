#pragma once

#include <cstdio>
#include <ostream>
#include <span>
#include <string>

#include "mhpolicy/mh_sampler.hpp"

namespace mhpolicy {

/// Shortest form that always round-trips a double (17 significant digits).
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline constexpr const char* kTraceCsvHeader = "iteration,reward,accepted,greedy,temperature,elapsed_s";

inline void write_trace_csv(std::ostream& out, const ChainTrace& trace) {
    out << kTraceCsvHeader << '\n';
    for (const auto& r : trace.records) {
        out << r.iteration << ',' << format_double(r.reward) << ',' << (r.accepted ? 1 : 0) << ','
            << (r.greedy ? 1 : 0) << ',' << format_double(r.temperature) << ',' << format_double(r.elapsed_s)
            << '\n';
    }
}

inline void write_aggregate_csv(std::ostream& out, std::span<const double> mean, std::span<const double> stddev) {
    out << "iteration,mean,std\n";
    for (std::size_t i = 0; i < mean.size(); ++i)
        out << (i + 1) << ',' << format_double(mean[i]) << ',' << format_double(stddev[i]) << '\n';
}

} // namespace mhpolicy
