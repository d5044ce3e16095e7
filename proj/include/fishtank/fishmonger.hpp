#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fishtank/likelihood.hpp"
#include "fishtank/pcsa.hpp"

namespace fishtank {

// Entropy-compressed smoothed bit-matrix sketch with a hard space budget.
// The working state is a base-e matrix with uniform offsets (row i offset
// i/m); it is stored arithmetic-coded against its own estimate-parameterized
// model, and any insertion whose re-encoding would exceed the budget is
// rolled back.

struct FishmongerParams {
    uint32_t m = 64;
    uint32_t u_bits = 64;   // log2 of the universe size
    double delta = 0.05;    // entropy slack factor

    uint32_t w() const;               // ceil(ln 2^u_bits) columns
    uint32_t mantissa_bits() const;   // ceil(log2(m * u_bits))
    uint32_t lambda_field_bits() const { return mantissa_bits() + 16; }
    uint64_t redundancy_bits() const; // ceil(2 sqrt(m ln m)) + ceil(log2 u_bits)^2 + 64
    uint64_t budget_bits() const;     // ceil((1+delta) m h0) + redundancy
    SketchParams sketch_params() const;

    bool operator==(const FishmongerParams&) const = default;
};

// Rounded-up floating-point estimate with an implicit leading bit:
// value = (2^nb + mantissa) * 2^(exponent - nb), so the representable grid
// is relatively (1 + 2^-nb)-dense and quantizing up lands within a factor
// 1 + 1/(m * u_bits) of the input.
struct QuantizedEstimate {
    uint32_t mantissa = 0;
    int32_t exponent = 0;
    bool zero = true;

    double value(uint32_t nb) const;
    static QuantizedEstimate quantize_up(double x, uint32_t nb);
    bool operator==(const QuantizedEstimate&) const = default;
};

// Per-cell model probability of a zero bit, exp(-z) with z = lambda * p,
// quantized to 32-bit fixed point (minority symbol rounded up, floor 2^-30).
uint32_t model_p0_scaled(double z);

// Arithmetic-codes all m*W bits row-major under the lambda_tilde model.
std::pair<std::vector<uint8_t>, uint64_t> encode_state(const PcsaSketch& state,
                                                       double lambda_tilde);
// Exact inverse; `nbits` as reported by encode_state.
void decode_state(const uint8_t* data, uint64_t nbits, double lambda_tilde, PcsaSketch* out);

class FishmongerSketch {
public:
    enum class InsertOutcome { Unchanged, Committed, Reverted };

    FishmongerSketch(FishmongerParams params, OracleSeed seed);

    InsertOutcome insert(ElementId element);
    double estimate() const { return lt_.value(params_.mantissa_bits()); }
    double lambda_hat() const { return lambda_hat_; }

    uint64_t payload_bits() const { return payload_bits_; }
    uint64_t budget_bits() const { return budget_bits_; }
    uint64_t size_bits() const;
    uint64_t revert_count() const { return revert_count_; }
    const QuantizedEstimate& quantized() const { return lt_; }
    const std::vector<uint8_t>& payload() const { return payload_; }

    const PcsaSketch& state() const { return cached_; }
    const FishmongerParams& params() const { return params_; }
    OracleSeed seed() const { return seed_; }

    // Decode-OR-reestimate-reencode union; throws if the union overflows
    // the budget.
    void merge(const FishmongerSketch& other);

    std::vector<uint8_t> serialize() const;
    static FishmongerSketch deserialize(const std::vector<uint8_t>& bytes);

    static constexpr uint64_t kHeaderBits = 296;  // serialized header + CRC

private:
    FishmongerParams params_;
    OracleSeed seed_;
    uint64_t budget_bits_;
    PcsaSketch cached_;
    QuantizedEstimate lt_;
    std::vector<uint8_t> payload_;
    uint64_t payload_bits_ = 0;
    uint64_t revert_count_ = 0;
    double lambda_hat_ = 0.0;
    std::vector<uint32_t> flips_;

    void reencode();
};

}  // namespace fishtank
