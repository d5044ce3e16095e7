#include "fishtank/serialize.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace fishtank {

namespace {

std::array<uint32_t, 256> make_crc_table() {
    std::array<uint32_t, 256> t{};
    for (uint32_t i = 0; i < 256; ++i) {
        uint32_t c = i;
        for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
        t[i] = c;
    }
    return t;
}

const std::array<uint32_t, 256>& crc_table() {
    static const auto table = make_crc_table();
    return table;
}

constexpr char kMagic[4] = {'F', 'S', 'K', 'T'};

}  // namespace

uint32_t crc32(const uint8_t* data, size_t len, uint32_t seed) {
    uint32_t c = seed ^ 0xffffffffu;
    const auto& t = crc_table();
    for (size_t i = 0; i < len; ++i) c = t[(c ^ data[i]) & 0xff] ^ (c >> 8);
    return c ^ 0xffffffffu;
}

void ByteWriter::u16(uint16_t v) {
    u8(uint8_t(v));
    u8(uint8_t(v >> 8));
}
void ByteWriter::u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(uint8_t(v >> (8 * i)));
}
void ByteWriter::u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(uint8_t(v >> (8 * i)));
}
void ByteWriter::f64(double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
}

uint8_t ByteReader::u8() {
    if (pos_ >= n_) throw std::runtime_error("truncated sketch data");
    return p_[pos_++];
}
uint16_t ByteReader::u16() { return uint16_t(u8()) | uint16_t(u8()) << 8; }
uint32_t ByteReader::u32() {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= uint32_t(u8()) << (8 * i);
    return v;
}
uint64_t ByteReader::u64() {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(u8()) << (8 * i);
    return v;
}
double ByteReader::f64() {
    const uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}
void ByteReader::bytes(uint8_t* out, size_t n) {
    if (pos_ + n > n_) throw std::runtime_error("truncated sketch data");
    std::memcpy(out, p_ + pos_, n);
    pos_ += n;
}

namespace {

void write_pcsa_bits(ByteWriter& w, const PcsaSketch& s) {
    const uint32_t n = s.params().m * s.params().w;
    std::vector<uint8_t> packed((n + 7) / 8, 0);
    for (uint32_t cell = 0; cell < n; ++cell)
        if (s.bit_raw(cell)) packed[cell >> 3] |= uint8_t(1u << (cell & 7));
    w.bytes(packed.data(), packed.size());
}

void read_pcsa_bits(ByteReader& r, PcsaSketch* s) {
    const uint32_t n = s->params().m * s->params().w;
    std::vector<uint8_t> packed((n + 7) / 8);
    r.bytes(packed.data(), packed.size());
    for (uint32_t cell = 0; cell < n; ++cell)
        if ((packed[cell >> 3] >> (cell & 7)) & 1) s->set_cell(cell);
}

struct Header {
    uint8_t kind;
    SketchParams params;
    uint64_t seed;
};

void write_header(ByteWriter& w, uint8_t kind, const SketchParams& p, OracleSeed seed) {
    w.bytes(reinterpret_cast<const uint8_t*>(kMagic), 4);
    w.u8(1);  // version
    w.u8(kind);
    w.f64(p.q);
    w.u32(p.m);
    w.u32(p.w);
    w.u8(uint8_t(p.offsets));
    w.u64(seed.value);
}

Header read_header(ByteReader& r) {
    char magic[4];
    r.bytes(reinterpret_cast<uint8_t*>(magic), 4);
    if (std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("bad sketch magic");
    const uint8_t version = r.u8();
    if (version != 1) throw std::runtime_error("unsupported sketch version");
    Header h;
    h.kind = r.u8();
    h.params.q = r.f64();
    h.params.m = r.u32();
    h.params.w = r.u32();
    const uint8_t mode = r.u8();
    if (mode > 2) throw std::runtime_error("bad offset mode");
    h.params.offsets = OffsetMode(mode);
    h.seed = r.u64();
    h.params.validate();
    return h;
}

}  // namespace

std::vector<uint8_t> serialize_sketch(const AnySketch& sketch) {
    ByteWriter w;
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, PcsaSketch>) {
                write_header(w, 0, s.params(), s.seed());
                write_pcsa_bits(w, s);
            } else if constexpr (std::is_same_v<T, LlSketch>) {
                write_header(w, 1, s.params(), s.seed());
                for (uint32_t i = 0; i < s.params().m; ++i) w.u16(s.reg(i));
            } else if constexpr (std::is_same_v<T, MartingaleSketch<PcsaSketch>>) {
                write_header(w, 2, s.inner().params(), s.inner().seed());
                write_pcsa_bits(w, s.inner());
                w.f64(s.estimate());
            } else {
                write_header(w, 3, s.inner().params(), s.inner().seed());
                for (uint32_t i = 0; i < s.inner().params().m; ++i) w.u16(s.inner().reg(i));
                w.f64(s.estimate());
            }
        },
        sketch);
    const uint32_t crc = crc32(w.data().data(), w.data().size());
    w.u32(crc);
    return w.take();
}

AnySketch deserialize_sketch(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < 4) throw std::runtime_error("truncated sketch data");
    const uint32_t stored =
        uint32_t(bytes[bytes.size() - 4]) | uint32_t(bytes[bytes.size() - 3]) << 8 |
        uint32_t(bytes[bytes.size() - 2]) << 16 | uint32_t(bytes[bytes.size() - 1]) << 24;
    if (crc32(bytes.data(), bytes.size() - 4) != stored)
        throw std::runtime_error("sketch checksum mismatch");
    ByteReader r(bytes.data(), bytes.size() - 4);
    const Header h = read_header(r);
    const OracleSeed seed{h.seed};
    switch (h.kind) {
        case 0: {
            PcsaSketch s(h.params, seed);
            read_pcsa_bits(r, &s);
            return s;
        }
        case 1: {
            LlSketch s(h.params, seed);
            for (uint32_t i = 0; i < h.params.m; ++i) s.set_register(i, r.u16());
            return s;
        }
        case 2: {
            PcsaSketch inner(h.params, seed);
            read_pcsa_bits(r, &inner);
            MartingaleSketch<PcsaSketch> s(std::move(inner));
            s.set_estimate(r.f64());
            return s;
        }
        case 3: {
            LlSketch inner(h.params, seed);
            for (uint32_t i = 0; i < h.params.m; ++i) inner.set_register(i, r.u16());
            MartingaleSketch<LlSketch> s(std::move(inner));
            s.set_estimate(r.f64());
            return s;
        }
        default:
            throw std::runtime_error("unknown sketch kind");
    }
}

void save_sketch_file(const std::string& path, const AnySketch& sketch) {
    const auto bytes = serialize_sketch(sketch);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

AnySketch load_sketch_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return deserialize_sketch(bytes);
}

AnySketch merge_sketch_files(const std::vector<std::string>& paths) {
    if (paths.empty()) throw std::invalid_argument("no sketch files given");
    AnySketch acc = load_sketch_file(paths[0]);
    for (size_t i = 1; i < paths.size(); ++i) {
        AnySketch next = load_sketch_file(paths[i]);
        if (acc.index() != next.index()) throw std::runtime_error("mixed sketch kinds");
        if (std::holds_alternative<PcsaSketch>(acc)) {
            std::get<PcsaSketch>(acc).merge(std::get<PcsaSketch>(next));
        } else if (std::holds_alternative<LlSketch>(acc)) {
            std::get<LlSketch>(acc).merge(std::get<LlSketch>(next));
        } else {
            // Running-estimate sketches are order dependent and not mergeable.
            throw std::runtime_error("martingale sketches cannot be merged");
        }
    }
    return acc;
}

}  // namespace fishtank
