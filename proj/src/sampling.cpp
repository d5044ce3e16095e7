#include "fishtank/sampling.hpp"

#include <cmath>

namespace fishtank {

PcsaSketch sample_pcsa_state(const SketchParams& params, OracleSeed sketch_seed,
                             const std::vector<double>& offsets, double lambda, uint64_t trial,
                             bool poissonized) {
    PcsaSketch s(params, sketch_seed, offsets);
    if (lambda <= 0.0) return s;
    const OracleSeed ts = derive_subseed(sketch_seed, trial);
    const auto& prob = s.tables().prob;
    const uint32_t n = params.m * params.w;
    for (uint32_t cell = 0; cell < n; ++cell) {
        const double p = prob[cell];
        const double p_set =
            poissonized ? -std::expm1(-lambda * p) : -std::expm1(lambda * std::log1p(-p));
        const double u = oracle_uniform(ts, 0, purpose::kStateSample, cell);
        if (u <= p_set) s.set_cell(cell);
    }
    return s;
}

LlSketch sample_ll_state(const SketchParams& params, OracleSeed sketch_seed,
                         const std::vector<double>& offsets, double lambda, uint64_t trial,
                         bool poissonized) {
    LlSketch s(params, sketch_seed, offsets);
    if (lambda <= 0.0) return s;
    const OracleSeed ts = derive_subseed(sketch_seed, trial);
    const double lnq = std::log(params.q);
    for (uint32_t i = 0; i < params.m; ++i) {
        const double u = oracle_uniform(ts, 1, purpose::kStateSample, i);
        // Smallest k with Pr(reg <= k)^... >= u.  Discrete: per-element
        // CDF F(k) = 1 - keep q^{-(k+1)}; register <= k iff all lambda
        // contributions are, so invert F(k) >= u^{1/lambda}.
        const double v = poissonized ? -std::log(u) / lambda : -std::expm1(std::log(u) / lambda);
        double k;
        if (v <= 0.0) {
            k = double(params.w);
        } else {
            k = std::ceil(-std::log(v) / lnq - offsets[i] - 1.0);
        }
        if (k < 0.0) k = 0.0;
        if (k > double(params.w)) k = double(params.w);
        s.set_register(i, uint16_t(k));
    }
    return s;
}

}  // namespace fishtank
