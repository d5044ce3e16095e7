#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <random>

#include "fishtank/serialize.hpp"

using namespace fishtank;

namespace {
SketchParams params(double q, uint32_t m, uint32_t w, OffsetMode off) {
    SketchParams p;
    p.q = q;
    p.m = m;
    p.w = w;
    p.offsets = off;
    return p;
}
}  // namespace

TEST_CASE("crc32 known vector") {
    const char* s = "123456789";
    CHECK(crc32(reinterpret_cast<const uint8_t*>(s), 9) == 0xcbf43926u);
}

TEST_CASE("all four kinds round-trip") {
    const auto p = params(2.0, 6, 18, OffsetMode::Uniform);
    const OracleSeed seed{71};
    std::mt19937_64 rng(2);

    for (int t = 0; t < 50; ++t) {
        PcsaSketch s(p, seed);
        LlSketch l(p, seed);
        MartingaleSketch<PcsaSketch> mp(PcsaSketch(p, seed));
        MartingaleSketch<LlSketch> ml(LlSketch(p, seed));
        const int n = int(rng() % 200);
        for (int i = 0; i < n; ++i) {
            const ElementId e = rng();
            s.insert(e);
            l.insert(e);
            mp.insert(e);
            ml.insert(e);
        }
        {
            const auto a = std::get<PcsaSketch>(deserialize_sketch(serialize_sketch(s)));
            CHECK(a.same_state(s));
            CHECK(a.params() == s.params());
            CHECK(a.seed().value == s.seed().value);
        }
        {
            const auto a = std::get<LlSketch>(deserialize_sketch(serialize_sketch(l)));
            CHECK(a.same_state(l));
        }
        {
            const auto a = std::get<MartingaleSketch<PcsaSketch>>(
                deserialize_sketch(serialize_sketch(mp)));
            CHECK(a.inner().same_state(mp.inner()));
            CHECK(a.estimate() == mp.estimate());
        }
        {
            const auto a =
                std::get<MartingaleSketch<LlSketch>>(deserialize_sketch(serialize_sketch(ml)));
            CHECK(a.inner().same_state(ml.inner()));
            CHECK(a.estimate() == ml.estimate());
        }
    }
}

TEST_CASE("wire layout of an empty sketch") {
    const auto p = params(2.0, 3, 10, OffsetMode::None);
    const PcsaSketch s(p, OracleSeed{0x0123456789abcdefULL});
    const auto bytes = serialize_sketch(s);
    REQUIRE(bytes.size() >= 4);
    CHECK(std::memcmp(bytes.data(), "FSKT", 4) == 0);
    CHECK(bytes[4] == 1);  // version
    CHECK(bytes[5] == 0);  // kind: bit matrix
    // header: 4 + 1 + 1 + 8 (q) + 4 (m) + 4 (W) + 1 (mode) + 8 (seed) = 31
    const size_t header = 31, payload = (3 * 10 + 7) / 8;
    CHECK(bytes.size() == header + payload + 4);
    for (size_t i = header; i < header + payload; ++i) CHECK(bytes[i] == 0);
}

TEST_CASE("corruption is rejected") {
    const auto p = params(2.0, 4, 12, OffsetMode::Uniform);
    PcsaSketch s(p, OracleSeed{5});
    s.insert(1);
    s.insert(2);
    auto bytes = serialize_sketch(s);

    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS(deserialize_sketch(bad_magic));

    auto bad_byte = bytes;
    bad_byte[10] ^= 0x40;
    CHECK_THROWS_WITH(deserialize_sketch(bad_byte), "sketch checksum mismatch");

    auto truncated = bytes;
    truncated.resize(8);
    CHECK_THROWS(deserialize_sketch(truncated));
}

TEST_CASE("file merge folds shards into the whole-stream sketch") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "fishtank_merge_test";
    fs::create_directories(dir);
    const auto p = params(2.0, 8, 16, OffsetMode::Random);
    const OracleSeed seed{91};

    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 5; ++rep) {
        const int shards = 2 + int(rng() % 4);
        std::vector<LlSketch> parts(size_t(shards), LlSketch(p, seed));
        LlSketch whole(p, seed);
        for (int n = 0; n < 500; ++n) {
            const ElementId e = rng();
            parts[size_t(rng() % shards)].insert(e);
            whole.insert(e);
        }
        std::vector<std::string> paths;
        for (int k = 0; k < shards; ++k) {
            const auto path = (dir / ("shard" + std::to_string(k) + ".sketch")).string();
            save_sketch_file(path, parts[size_t(k)]);
            paths.push_back(path);
        }
        const auto merged = std::get<LlSketch>(merge_sketch_files(paths));
        CHECK(merged.same_state(whole));

        // Merging a file with itself is the identity.
        const auto self = std::get<LlSketch>(merge_sketch_files({paths[0], paths[0]}));
        CHECK(self.same_state(parts[0]));
    }

    // Mismatched seeds are a hard error.
    const auto p1 = (dir / "a.sketch").string(), p2 = (dir / "b.sketch").string();
    save_sketch_file(p1, LlSketch(p, OracleSeed{1}));
    save_sketch_file(p2, LlSketch(p, OracleSeed{2}));
    CHECK_THROWS(merge_sketch_files({p1, p2}));

    // Mixed kinds as well.
    save_sketch_file(p2, PcsaSketch(p, OracleSeed{1}));
    CHECK_THROWS(merge_sketch_files({p1, p2}));
    fs::remove_all(dir);
}
