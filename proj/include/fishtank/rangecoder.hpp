#pragma once

#include <cstdint>
#include <vector>

namespace fishtank {

// Binary arithmetic coder over a 32-bit interval with pending-bit (underflow)
// renormalization, so no carry ever propagates into emitted bits.  Symbol
// probabilities are 32-bit fixed point; the split floors the more probable
// side, which keeps the worst-case per-symbol redundancy below 2^-28 bits.

class BitWriter {
public:
    void push(bool b) {
        if ((nbits_ & 7) == 0) bytes_.push_back(0);
        if (b) bytes_.back() |= uint8_t(1u << (nbits_ & 7));
        ++nbits_;
    }
    uint64_t bit_count() const { return nbits_; }
    std::vector<uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<uint8_t> bytes_;
    uint64_t nbits_ = 0;
};

class BitReader {
public:
    BitReader(const uint8_t* data, uint64_t nbits) : data_(data), nbits_(nbits) {}
    bool next() {
        if (pos_ >= nbits_) return false;  // zero padding past the end
        const bool b = (data_[pos_ >> 3] >> (pos_ & 7)) & 1;
        ++pos_;
        return b;
    }

private:
    const uint8_t* data_;
    uint64_t nbits_;
    uint64_t pos_ = 0;
};

namespace rc_detail {
constexpr uint64_t kHalf = 0x80000000ull;
constexpr uint64_t kQuarter = 0x40000000ull;
constexpr uint64_t kThreeQuarter = 0xc0000000ull;
constexpr uint64_t kMask = 0xffffffffull;

// Subinterval width assigned to symbol 0; the floor falls on the majority
// symbol so the minority side never loses width.
inline uint64_t split(uint64_t span, uint32_t p0) {
    uint64_t r0;
    if (p0 >= 0x80000000u) {
        r0 = (span * uint64_t(p0)) >> 32;
    } else {
        r0 = span - ((span * (0x100000000ull - uint64_t(p0))) >> 32);
    }
    if (r0 < 1) r0 = 1;
    if (r0 > span - 1) r0 = span - 1;
    return r0;
}
}  // namespace rc_detail

class BinaryEncoder {
public:
    // p0 = Pr(bit == 0) in units of 2^-32, clamped by the caller to
    // [4, 2^32 - 4].
    void encode(bool bit, uint32_t p0) {
        using namespace rc_detail;
        const uint64_t span = high_ - low_ + 1;
        const uint64_t r0 = split(span, p0);
        if (!bit)
            high_ = low_ + r0 - 1;
        else
            low_ += r0;
        for (;;) {
            if (high_ < kHalf) {
                emit(false);
            } else if (low_ >= kHalf) {
                emit(true);
                low_ -= kHalf;
                high_ -= kHalf;
            } else if (low_ >= kQuarter && high_ < kThreeQuarter) {
                ++pending_;
                low_ -= kQuarter;
                high_ -= kQuarter;
            } else {
                break;
            }
            low_ <<= 1;
            high_ = (high_ << 1) | 1;
        }
    }

    // Flushes the final disambiguating bits and returns (bytes, bit count).
    std::vector<uint8_t> finish(uint64_t* bit_count) {
        ++pending_;
        emit(low_ >= rc_detail::kQuarter);
        if (bit_count) *bit_count = out_.bit_count();
        return out_.take();
    }

private:
    void emit(bool b) {
        out_.push(b);
        while (pending_ > 0) {
            out_.push(!b);
            --pending_;
        }
    }

    uint64_t low_ = 0;
    uint64_t high_ = rc_detail::kMask;
    uint64_t pending_ = 0;
    BitWriter out_;
};

class BinaryDecoder {
public:
    BinaryDecoder(const uint8_t* data, uint64_t nbits) : in_(data, nbits) {
        for (int i = 0; i < 32; ++i) value_ = (value_ << 1) | uint64_t(in_.next());
    }

    bool decode(uint32_t p0) {
        using namespace rc_detail;
        const uint64_t span = high_ - low_ + 1;
        const uint64_t r0 = split(span, p0);
        const bool bit = value_ >= low_ + r0;
        if (!bit)
            high_ = low_ + r0 - 1;
        else
            low_ += r0;
        for (;;) {
            if (high_ < kHalf) {
                // nothing
            } else if (low_ >= kHalf) {
                low_ -= kHalf;
                high_ -= kHalf;
                value_ -= kHalf;
            } else if (low_ >= kQuarter && high_ < kThreeQuarter) {
                low_ -= kQuarter;
                high_ -= kQuarter;
                value_ -= kQuarter;
            } else {
                break;
            }
            low_ <<= 1;
            high_ = (high_ << 1) | 1;
            value_ = (value_ << 1) | uint64_t(in_.next());
        }
        return bit;
    }

private:
    BitReader in_;
    uint64_t low_ = 0;
    uint64_t high_ = rc_detail::kMask;
    uint64_t value_ = 0;
};

}  // namespace fishtank
