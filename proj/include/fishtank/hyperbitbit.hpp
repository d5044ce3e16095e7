#pragma once

#include <cstdint>
#include <vector>

#include "fishtank/oracle.hpp"

namespace fishtank {

// 134-bit heuristic sketch kept as a negative example: it is neither
// commutative nor history independent, and two equal-cardinality inputs can
// drive its estimate to opposite extremes.
struct HyperBitBitState {
    uint32_t level = 0;  // L
    uint64_t s0 = 0;
    uint64_t s1 = 0;

    bool operator==(const HyperBitBitState&) const = default;
};

// Hash of an element: word index j uniform in [64] and trailing-zero level
// k with Pr(k = K) = 2^-(K+1), clamped at 62.
struct HbbHash {
    uint32_t j;
    uint32_t k;
};
HbbHash hbb_hash(OracleSeed seed, ElementId element);

// Sets S0(j) when k > L and S1(j) when k > L+1; when S0 fills to weight 32
// the sketch rotates: L += 1, S0 <- S1, S1 <- 0.
void hbb_insert(HyperBitBitState* state, OracleSeed seed, ElementId element);

// 2^(L + 5.4 + weight(S0)/32).
double hbb_estimate(const HyperBitBitState& state);

// Test sequences of equal cardinality lambda:
//   lo: 1, 2, ..., lambda
//   hi: (1,2), (1,2,3), ..., (1,...,lambda) concatenated
std::vector<ElementId> gen_sequence_lo(uint64_t lambda);
std::vector<ElementId> gen_sequence_hi(uint64_t lambda);

// Final state after streaming one sequence; the hi variant exploits that
// replayed elements act only through bits that are still unset, so it skips
// settled ids while remaining insertion-for-insertion equivalent to the
// literal stream.
HyperBitBitState hbb_run_lo(OracleSeed seed, uint64_t lambda);
HyperBitBitState hbb_run_hi(OracleSeed seed, uint64_t lambda);

// Streams until the state first matches (level, weight(S0)) = (level, hw);
// returns the number of distinct elements seen at that moment (0 if the
// state is never reached before `max_distinct`).
uint64_t hbb_run_until_lo(OracleSeed seed, uint32_t level, uint32_t hw, uint64_t max_distinct);
uint64_t hbb_run_until_hi(OracleSeed seed, uint32_t level, uint32_t hw, uint64_t max_distinct);

}  // namespace fishtank
