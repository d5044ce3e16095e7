#pragma once

#include <cstdint>
#include <vector>

#include "fishtank/oracle.hpp"
#include "fishtank/params.hpp"

namespace fishtank {

// Base-q register sketch: m registers in [0, W].  Each element is withheld
// from register i with probability 1 - q^{-r_i}; if kept, a fresh uniform
// produces a candidate with Pr(candidate > k) = q^{-(k+1)} and the register
// keeps the running maximum.
class LlSketch {
public:
    LlSketch(const SketchParams& params, OracleSeed seed);
    LlSketch(const SketchParams& params, OracleSeed seed, std::vector<double> offsets);

    bool insert(ElementId element);
    void merge(const LlSketch& other);  // pointwise max
    double transition_probability() const;

    uint16_t reg(uint32_t i) const { return regs_[i]; }
    const std::vector<uint16_t>& registers() const { return regs_; }
    // Sets a register directly (deserialization, direct sampling).
    void set_register(uint32_t i, uint16_t value);

    const SketchParams& params() const { return params_; }
    OracleSeed seed() const { return seed_; }
    const std::vector<double>& offsets() const { return offsets_; }
    const std::vector<double>& keep_probs() const { return keep_; }

    void clear();
    bool same_state(const LlSketch& other) const { return regs_ == other.regs_; }
    bool compatible(const LlSketch& other) const;

    // Candidate value derived from one uniform in (0, 1].
    static uint16_t candidate(double u, double q, uint32_t w);

private:
    SketchParams params_;
    OracleSeed seed_;
    std::vector<double> offsets_;
    std::vector<double> keep_;  // q^{-r_i}
    std::vector<uint16_t> regs_;
    double sum_log1m_trans_ = 0.0;  // sum_i log1p(-keep_i q^{-(S_i+1)}), S_i < W
    uint32_t saturated_regs_ = 0;

    double trans_term(uint32_t i) const;
    void rebuild_counters();
};

}  // namespace fishtank
