#pragma once

#include <cstdint>

#include "fishtank/loglog.hpp"
#include "fishtank/pcsa.hpp"

namespace fishtank {

// Draws final sketch states directly from their distribution at cardinality
// lambda, bypassing element-by-element streaming.  The sampled law is the
// same as streaming `lambda` distinct elements (or a Poissonized stream when
// `poissonized`), which is all that error studies observe.  Deterministic in
// (seed, trial).

// Bit matrix: cells are independent; Pr(bit = 0) is (1-p)^lambda in the
// discrete process and exp(-lambda p) when Poissonized.
PcsaSketch sample_pcsa_state(const SketchParams& params, OracleSeed sketch_seed,
                             const std::vector<double>& offsets, double lambda, uint64_t trial,
                             bool poissonized);

// Registers: the running maximum of lambda i.i.d. per-element contributions
// is inverted from one uniform per register.
LlSketch sample_ll_state(const SketchParams& params, OracleSeed sketch_seed,
                         const std::vector<double>& offsets, double lambda, uint64_t trial,
                         bool poissonized);

}  // namespace fishtank
