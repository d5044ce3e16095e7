#pragma once

#include <cmath>
#include <cstdint>

namespace fishtank {

// Deterministic stand-in for a uniformly random hash function.  Every draw is
// a pure function of (seed, element, purpose label, index), so identical
// inputs always reproduce identical randomness across runs and platforms.

struct OracleSeed {
    uint64_t value = 0;
};

using ElementId = uint64_t;

// Purpose labels.  Each call-site owns one label so that no two uses ever
// consume the same stream.
namespace purpose {
inline constexpr uint32_t kPcsaCells = 0;      // bit-matrix hit process
inline constexpr uint32_t kLlKeepCoin = 1;     // register keep/withhold coin
inline constexpr uint32_t kLlValue = 2;        // register candidate value
inline constexpr uint32_t kPoissonMult = 3;    // per-element multiplicity
inline constexpr uint32_t kStateSample = 4;    // direct final-state sampling
inline constexpr uint32_t kTrialStream = 5;    // per-trial element ids
inline constexpr uint32_t kHbbIndex = 6;       // HyperBitBit word index
inline constexpr uint32_t kHbbLevel = 7;       // HyperBitBit geometric level
inline constexpr uint32_t kOffsets = 8;        // random offset vector
inline constexpr uint32_t kCalibration = 9;    // estimator calibration trials
}  // namespace purpose

// splitmix64 finalizer; full-avalanche 64-bit mixer.
inline uint64_t mix64(uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

inline uint64_t oracle_word(OracleSeed seed, ElementId element, uint32_t label, uint64_t index) {
    uint64_t x = seed.value;
    x = mix64(x ^ (element * 0x9e3779b97f4a7c15ULL));
    x = mix64(x ^ (uint64_t(label) * 0xd6e8feb86659fd93ULL));
    x = mix64(x ^ (index * 0xa24baed4963ee407ULL));
    return x;
}

// Uniform draw in (0, 1] with 53 bits of precision.
inline double oracle_uniform(OracleSeed seed, ElementId element, uint32_t label, uint64_t index) {
    const uint64_t w = oracle_word(seed, element, label, index);
    return double((w >> 11) + 1) * 0x1.0p-53;
}

// Exponential(1) draw; used by the cell hit process.
inline double oracle_exponential(OracleSeed seed, ElementId element, uint32_t label, uint64_t index) {
    return -std::log(oracle_uniform(seed, element, label, index));
}

// Poisson(1) multiplicity by CDF inversion of a single uniform.
inline uint32_t poisson_multiplicity(OracleSeed seed, ElementId element) {
    const double u = oracle_uniform(seed, element, purpose::kPoissonMult, 0);
    double term = std::exp(-1.0);  // P(X = 0)
    double cdf = term;
    uint32_t k = 0;
    while (u > cdf && k < 64) {
        ++k;
        term /= double(k);
        cdf += term;
    }
    return k;
}

// Independent sub-seed for trial number `trial`.
inline OracleSeed derive_subseed(OracleSeed seed, uint64_t trial) {
    return OracleSeed{mix64(seed.value ^ mix64(trial + 0x165667b19e3779f9ULL))};
}

// Virtual element id for the n-th element of a trial stream.
inline ElementId stream_element(OracleSeed trial_seed, uint64_t n) {
    return oracle_word(trial_seed, n, purpose::kTrialStream, 0);
}

// Virtual id of the c-th Poissonized copy of an element (c >= 1).
inline ElementId poisson_copy_id(ElementId element, uint32_t copy) {
    return mix64(element ^ (uint64_t(copy) * 0x9fb21c651e98df25ULL + 0x6a09e667f3bcc909ULL));
}

}  // namespace fishtank
