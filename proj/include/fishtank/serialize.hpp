#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "fishtank/loglog.hpp"
#include "fishtank/martingale.hpp"
#include "fishtank/pcsa.hpp"

namespace fishtank {

// CRC32 (IEEE, reflected polynomial 0xEDB88320).
uint32_t crc32(const uint8_t* data, size_t len, uint32_t seed = 0);

// Little-endian byte stream helpers.
class ByteWriter {
public:
    void u8(uint8_t v) { buf_.push_back(v); }
    void u16(uint16_t v);
    void u32(uint32_t v);
    void u64(uint64_t v);
    void i32(int32_t v) { u32(uint32_t(v)); }
    void f64(double v);
    void bytes(const uint8_t* p, size_t n) { buf_.insert(buf_.end(), p, p + n); }
    const std::vector<uint8_t>& data() const { return buf_; }
    std::vector<uint8_t> take() { return std::move(buf_); }

private:
    std::vector<uint8_t> buf_;
};

class ByteReader {
public:
    ByteReader(const uint8_t* p, size_t n) : p_(p), n_(n) {}
    uint8_t u8();
    uint16_t u16();
    uint32_t u32();
    uint64_t u64();
    int32_t i32() { return int32_t(u32()); }
    double f64();
    void bytes(uint8_t* out, size_t n);
    size_t pos() const { return pos_; }
    size_t remaining() const { return n_ - pos_; }

private:
    const uint8_t* p_;
    size_t n_;
    size_t pos_ = 0;
};

// Sketch container format, magic "FSKT" version 1:
//   magic, version u8, kind u8 (0 = bit matrix, 1 = registers,
//   2 = martingale bit matrix, 3 = martingale registers), q f64, m u32,
//   W u32, offset mode u8, seed u64, payload, crc32.
// Bit-matrix payload: m*W bits row-major, LSB-first within bytes, padded to
// a whole byte.  Register payload: m u16 values.  Martingale payloads append
// the running estimate as f64.

using AnySketch = std::variant<PcsaSketch, LlSketch, MartingaleSketch<PcsaSketch>,
                               MartingaleSketch<LlSketch>>;

std::vector<uint8_t> serialize_sketch(const AnySketch& sketch);
AnySketch deserialize_sketch(const std::vector<uint8_t>& bytes);

void save_sketch_file(const std::string& path, const AnySketch& sketch);
AnySketch load_sketch_file(const std::string& path);

// Folds the sketches in `paths` with the union merge; all files must carry
// identical parameters and seed.
AnySketch merge_sketch_files(const std::vector<std::string>& paths);

}  // namespace fishtank
