#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fishtank/oracle.hpp"

namespace fishtank {

enum class OffsetMode : uint8_t { None = 0, Uniform = 1, Random = 2 };

// Parameters shared by the bit-matrix and register sketches: base q > 1,
// m independent copies, W columns / maximum register value, and the
// per-copy offset scheme.
struct SketchParams {
    double q = 2.0;
    uint32_t m = 1;
    uint32_t w = 64;
    OffsetMode offsets = OffsetMode::None;

    void validate() const {
        if (!(q > 1.0)) throw std::invalid_argument("base q must be > 1");
        if (m < 1) throw std::invalid_argument("m must be >= 1");
        if (w < 1) throw std::invalid_argument("W must be >= 1");
    }

    bool operator==(const SketchParams&) const = default;
};

// Default truncation: enough columns to cover a 2^64 universe.
inline uint32_t default_w(double q) {
    return uint32_t(std::ceil(64.0 * std::log(2.0) / std::log(q)));
}

// Offset vector r, one entry per copy.  Random offsets are drawn once from
// the seed and are part of the algorithm, not of any particular stream.
inline std::vector<double> make_offsets(const SketchParams& p, OracleSeed seed) {
    std::vector<double> r(p.m, 0.0);
    switch (p.offsets) {
        case OffsetMode::None:
            break;
        case OffsetMode::Uniform:
            for (uint32_t i = 0; i < p.m; ++i) r[i] = double(i) / double(p.m);
            break;
        case OffsetMode::Random:
            for (uint32_t i = 0; i < p.m; ++i) {
                const uint64_t w = oracle_word(seed, i, purpose::kOffsets, 0);
                r[i] = double(w >> 11) * 0x1.0p-53;  // [0, 1)
            }
            break;
    }
    return r;
}

// Hit probability of cell (i, j): q^{-(j + r_i)}.
inline double cell_probability(const SketchParams& p, const std::vector<double>& offsets,
                               uint32_t i, uint32_t j) {
    if (i >= p.m || j >= p.w) throw std::out_of_range("cell index out of range");
    return std::exp(-(double(j) + offsets[i]) * std::log(p.q));
}

}  // namespace fishtank
