#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "../error.hpp"

namespace levelplug::harness {

/// One row per (n, a, replication).
///
/// d_H_bound = 6 A a supnorm with A from the run's constants. `violation` is
/// set when d_H exceeds d_H_bound plus a discretization slack of 2 h sqrt(d)
/// (one cell diameter per directed distance), or when the estimated boundary
/// is empty, in which case d_H is NaN. p_n is already divided by
/// a^(dp/(p+1)); band_vol is read at eps_n = (p_n / v_n)^(1/p).
struct ExperimentRecord {
    std::size_t n = 0;
    double a = 1.0;
    double T_n = 0.0;
    double h = 0.0;
    double supnorm = 0.0;
    double d_H = 0.0;
    double d_H_bound = 0.0;
    bool violation = false;
    double d_lambda = 0.0;
    double p_n = 0.0;
    double p_n_d_lambda = 0.0;
    double band_vol = 0.0;
    double band_vol_bound = 0.0;
    std::uint64_t seed = 0;
    double wall_ms = 0.0;
};

inline constexpr const char* kRecordHeader =
    "n,a,T_n,h,supnorm,d_H,d_H_bound,violation,d_lambda,p_n,p_n_d_lambda,band_vol,band_vol_bound,seed,wall_ms";

namespace detail {

inline std::string g17(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

inline std::string format_record(const ExperimentRecord& r) {
    using detail::g17;
    std::ostringstream os;
    os << r.n << ',' << g17(r.a) << ',' << g17(r.T_n) << ',' << g17(r.h) << ',' << g17(r.supnorm) << ','
       << g17(r.d_H) << ',' << g17(r.d_H_bound) << ',' << (r.violation ? 1 : 0) << ',' << g17(r.d_lambda) << ','
       << g17(r.p_n) << ',' << g17(r.p_n_d_lambda) << ',' << g17(r.band_vol) << ',' << g17(r.band_vol_bound)
       << ',' << r.seed << ',' << g17(r.wall_ms);
    return os.str();
}

inline void write_records(const std::vector<ExperimentRecord>& records, std::ostream& out) {
    out << kRecordHeader << '\n';
    for (const auto& r : records) out << format_record(r) << '\n';
}

inline void write_records(const std::vector<ExperimentRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write records file: " + path);
    write_records(records, out);
    if (!out) throw IoError("write failed: " + path);
}

inline std::vector<ExperimentRecord> read_records(std::istream& in, const std::string& name = "records") {
    std::string line;
    if (!std::getline(in, line) || line != kRecordHeader) throw IoError(name + ": missing or unexpected header");
    std::vector<ExperimentRecord> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 15) throw IoError(name + ":" + std::to_string(lineno) + ": expected 15 fields");
        try {
            ExperimentRecord r;
            r.n = std::stoull(f[0]);
            r.a = std::stod(f[1]);
            r.T_n = std::stod(f[2]);
            r.h = std::stod(f[3]);
            r.supnorm = std::stod(f[4]);
            r.d_H = std::stod(f[5]);
            r.d_H_bound = std::stod(f[6]);
            r.violation = f[7] == "1";
            r.d_lambda = std::stod(f[8]);
            r.p_n = std::stod(f[9]);
            r.p_n_d_lambda = std::stod(f[10]);
            r.band_vol = std::stod(f[11]);
            r.band_vol_bound = std::stod(f[12]);
            r.seed = std::stoull(f[13]);
            r.wall_ms = std::stod(f[14]);
            out.push_back(r);
        } catch (const std::logic_error&) {
            throw IoError(name + ":" + std::to_string(lineno) + ": malformed number");
        }
    }
    return out;
}

inline std::vector<ExperimentRecord> read_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open records file: " + path);
    return read_records(in, path);
}

}  // namespace levelplug::harness
