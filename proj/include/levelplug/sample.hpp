#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"

namespace levelplug {

/// n observations in the nonnegative orthant of R^d, stored row-major.
class Sample {
public:
    Sample(std::size_t dim, std::vector<double> coords) : dim_(dim), coords_(std::move(coords)) {
        detail::require(dim_ >= 1, "Sample: dimension must be >= 1");
        detail::require(!coords_.empty() && coords_.size() % dim_ == 0,
                        "Sample: coordinate count must be a positive multiple of the dimension");
        for (double v : coords_) {
            if (!(v >= 0.0) || !std::isfinite(v))
                throw ParameterError("Sample: coordinates must be finite and nonnegative");
        }
    }

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return coords_.size() / dim_; }

    std::span<const double> point(std::size_t i) const noexcept {
        return {coords_.data() + i * dim_, dim_};
    }

    const std::vector<double>& coords() const noexcept { return coords_; }

    bool operator==(const Sample&) const = default;

private:
    std::size_t dim_;
    std::vector<double> coords_;
};

/// Reads d comma-separated columns per row, no header. Blank lines are skipped.
inline Sample load_sample_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open sample file: " + path);

    std::vector<double> coords;
    std::size_t dim = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::stringstream row(line);
        std::string cell;
        std::size_t cols = 0;
        while (std::getline(row, cell, ',')) {
            try {
                std::size_t used = 0;
                coords.push_back(std::stod(cell, &used));
                if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
            } catch (const std::logic_error&) {
                throw IoError(path + ":" + std::to_string(lineno) + ": not a number: '" + cell + "'");
            }
            ++cols;
        }
        if (dim == 0) dim = cols;
        if (cols != dim)
            throw IoError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(dim) +
                          " columns, found " + std::to_string(cols));
    }
    if (coords.empty()) throw IoError("sample file has no rows: " + path);
    try {
        return Sample(dim, std::move(coords));
    } catch (const ParameterError& e) {
        throw IoError(path + ": " + e.what());
    }
}

inline void write_sample_csv(const Sample& sample, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write sample file: " + path);
    out << std::setprecision(17);
    for (std::size_t i = 0; i < sample.size(); ++i) {
        auto p = sample.point(i);
        for (std::size_t k = 0; k < p.size(); ++k) out << (k ? "," : "") << p[k];
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace levelplug
