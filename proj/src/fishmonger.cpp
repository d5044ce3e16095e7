#include "fishtank/fishmonger.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "fishtank/infotheory.hpp"
#include "fishtank/rangecoder.hpp"
#include "fishtank/serialize.hpp"
#include "fishtank/util_math.hpp"

namespace fishtank {

uint32_t FishmongerParams::w() const {
    return uint32_t(std::ceil(double(u_bits) * kLn2));
}

uint32_t FishmongerParams::mantissa_bits() const {
    return uint32_t(std::ceil(std::log2(double(m) * double(u_bits))));
}

uint64_t FishmongerParams::redundancy_bits() const {
    const double bern = std::ceil(2.0 * std::sqrt(double(m) * std::log(double(m))));
    const double loglog = std::ceil(std::log2(double(u_bits)));
    return uint64_t(bern) + uint64_t(loglog * loglog) + 64;
}

uint64_t FishmongerParams::budget_bits() const {
    static const double kH0 = h0();
    return uint64_t(std::ceil((1.0 + delta) * double(m) * kH0)) + redundancy_bits();
}

SketchParams FishmongerParams::sketch_params() const {
    SketchParams p;
    p.q = std::exp(1.0);
    p.m = m;
    p.w = w();
    p.offsets = OffsetMode::Uniform;
    return p;
}

double QuantizedEstimate::value(uint32_t nb) const {
    if (zero) return 0.0;
    return std::ldexp(double((uint64_t(1) << nb) + mantissa), exponent - int(nb));
}

QuantizedEstimate QuantizedEstimate::quantize_up(double x, uint32_t nb) {
    if (!(x > 0.0)) return {};
    int e;
    const double f = std::frexp(x, &e);  // x = f 2^e, f in [0.5, 1)
    uint64_t mant_full = uint64_t(std::ceil(std::ldexp(f, int(nb) + 1)));
    int32_t exp = e - 1;
    if (mant_full >= (uint64_t(2) << nb)) {
        mant_full >>= 1;
        ++exp;
    }
    QuantizedEstimate q;
    q.zero = false;
    q.mantissa = uint32_t(mant_full - (uint64_t(1) << nb));
    q.exponent = exp;
    return q;
}

uint32_t model_p0_scaled(double z) {
    // z >= 21 means p0 < 2^-30, the model floor.
    if (z >= 21.0) return 4;
    if (z < 6e-10) return 0xfffffffcu;  // p1 below one grid step
    if (z < 1e-3) {
        // p1 = 1 - e^{-z} = z (1 - z/2 + z^2/6) to 1e-13 relative
        const double p1 = z * (1.0 - z * (0.5 - z / 6.0));
        uint64_t up1 = uint64_t(std::ceil(p1 * 4294967296.0));
        if (up1 < 4) up1 = 4;
        return uint32_t(0x100000000ull - up1);
    }
    const double p0 = fast_exp_neg(-z);
    if (p0 <= 0.5) {
        uint64_t up = uint64_t(std::ceil(p0 * 4294967296.0));
        if (up < 4) up = 4;
        if (up > 0x80000000ull) up = 0x80000000ull;
        return uint32_t(up);
    }
    // Work with p1 = 1 - e^{-z} directly to dodge cancellation.
    const double p1 = z < 0.03125 ? fast_expm1(z) * p0 : 1.0 - p0;
    uint64_t up1 = uint64_t(std::ceil(p1 * 4294967296.0));
    if (up1 < 4) up1 = 4;
    if (up1 > 0x80000000ull) up1 = 0x80000000ull;
    return uint32_t(0x100000000ull - up1);
}

std::pair<std::vector<uint8_t>, uint64_t> encode_state(const PcsaSketch& state,
                                                       double lambda_tilde) {
    BinaryEncoder enc;
    const auto& prob = state.tables().prob;
    const uint32_t n = state.params().m * state.params().w;
    for (uint32_t cell = 0; cell < n; ++cell) {
        const uint32_t p0 = model_p0_scaled(lambda_tilde * prob[cell]);
        enc.encode(state.bit_raw(cell), p0);
    }
    uint64_t bits = 0;
    auto bytes = enc.finish(&bits);
    return {std::move(bytes), bits};
}

void decode_state(const uint8_t* data, uint64_t nbits, double lambda_tilde, PcsaSketch* out) {
    BinaryDecoder dec(data, nbits);
    const auto& prob = out->tables().prob;
    const uint32_t n = out->params().m * out->params().w;
    for (uint32_t cell = 0; cell < n; ++cell) {
        const uint32_t p0 = model_p0_scaled(lambda_tilde * prob[cell]);
        if (dec.decode(p0)) out->set_cell(cell);
    }
}

FishmongerSketch::FishmongerSketch(FishmongerParams params, OracleSeed seed)
    : params_(params),
      seed_(seed),
      budget_bits_(params.budget_bits()),
      cached_(params.sketch_params(), seed) {
    if (params_.m < 1) throw std::invalid_argument("m must be >= 1");
    reencode();
}

void FishmongerSketch::reencode() {
    auto [bytes, bits] = encode_state(cached_, estimate());
    payload_ = std::move(bytes);
    payload_bits_ = bits;
}

uint64_t FishmongerSketch::size_bits() const {
    return payload_bits_ + params_.lambda_field_bits() + kHeaderBits;
}

FishmongerSketch::InsertOutcome FishmongerSketch::insert(ElementId element) {
    flips_.clear();
    if (!cached_.insert(element, &flips_)) return InsertOutcome::Unchanged;

    const double prev_lambda_hat = lambda_hat_;
    lambda_hat_ = pcsa_mle_refine(cached_, lambda_hat_ > 0.0 ? lambda_hat_ : 1.0);
    const QuantizedEstimate lt =
        QuantizedEstimate::quantize_up(lambda_hat_, params_.mantissa_bits());
    auto [bytes, bits] = encode_state(cached_, lt.value(params_.mantissa_bits()));

    if (bits > budget_bits_ - params_.lambda_field_bits()) {
        for (uint32_t cell : flips_) cached_.unset_cell(cell);
        lambda_hat_ = prev_lambda_hat;
        ++revert_count_;
        return InsertOutcome::Reverted;
    }
    lt_ = lt;
    payload_ = std::move(bytes);
    payload_bits_ = bits;
    return InsertOutcome::Committed;
}

void FishmongerSketch::merge(const FishmongerSketch& other) {
    if (!(params_ == other.params_) || seed_.value != other.seed_.value)
        throw std::invalid_argument("merge requires identical params and seed");
    cached_.merge(other.cached_);
    lambda_hat_ = pcsa_mle_refine(cached_, std::max(lambda_hat_, other.lambda_hat_));
    lt_ = QuantizedEstimate::quantize_up(lambda_hat_, params_.mantissa_bits());
    reencode();
    if (payload_bits_ > budget_bits_ - params_.lambda_field_bits())
        throw std::overflow_error("merged sketch exceeds the space budget");
}

std::vector<uint8_t> FishmongerSketch::serialize() const {
    ByteWriter w;
    w.bytes(reinterpret_cast<const uint8_t*>("FMGR"), 4);
    w.u8(1);  // version
    w.u32(params_.m);
    w.u32(params_.u_bits);
    w.f64(params_.delta);
    w.u64(seed_.value);
    w.u32(lt_.mantissa);
    w.i32(lt_.zero ? INT32_MIN : lt_.exponent);
    w.u32(uint32_t(payload_bits_));
    w.bytes(payload_.data(), payload_.size());
    w.u32(crc32(w.data().data(), w.data().size()));
    return w.take();
}

FishmongerSketch FishmongerSketch::deserialize(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < 4) throw std::runtime_error("truncated sketch data");
    const uint32_t stored =
        uint32_t(bytes[bytes.size() - 4]) | uint32_t(bytes[bytes.size() - 3]) << 8 |
        uint32_t(bytes[bytes.size() - 2]) << 16 | uint32_t(bytes[bytes.size() - 1]) << 24;
    if (crc32(bytes.data(), bytes.size() - 4) != stored)
        throw std::runtime_error("sketch checksum mismatch");
    ByteReader r(bytes.data(), bytes.size() - 4);
    char magic[4];
    r.bytes(reinterpret_cast<uint8_t*>(magic), 4);
    if (std::memcmp(magic, "FMGR", 4) != 0) throw std::runtime_error("bad sketch magic");
    if (r.u8() != 1) throw std::runtime_error("unsupported sketch version");
    FishmongerParams fp;
    fp.m = r.u32();
    fp.u_bits = r.u32();
    fp.delta = r.f64();
    const uint64_t seed = r.u64();
    QuantizedEstimate lt;
    lt.mantissa = r.u32();
    const int32_t exp = r.i32();
    lt.zero = exp == INT32_MIN;
    lt.exponent = lt.zero ? 0 : exp;
    const uint32_t nbits = r.u32();
    std::vector<uint8_t> payload((nbits + 7) / 8);
    r.bytes(payload.data(), payload.size());

    FishmongerSketch s(fp, OracleSeed{seed});
    s.lt_ = lt;
    s.payload_ = std::move(payload);
    s.payload_bits_ = nbits;
    s.cached_.clear();
    decode_state(s.payload_.data(), s.payload_bits_, s.estimate(), &s.cached_);
    s.lambda_hat_ = s.estimate();
    return s;
}

}  // namespace fishtank
