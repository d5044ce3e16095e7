#include <doctest.h>

#include <cmath>
#include <random>

#include "fishtank/fishmonger.hpp"
#include "fishtank/infotheory.hpp"
#include "fishtank/sampling.hpp"

using namespace fishtank;

TEST_CASE("derived parameters") {
    FishmongerParams fp;
    fp.m = 256;
    CHECK(fp.w() == 45);  // ceil(64 ln 2)
    CHECK(fp.mantissa_bits() == 14);
    CHECK(fp.lambda_field_bits() == 30);
    const uint64_t bern = uint64_t(std::ceil(2.0 * std::sqrt(256.0 * std::log(256.0))));
    CHECK(fp.redundancy_bits() == bern + 36 + 64);
    CHECK(fp.budget_bits() ==
          uint64_t(std::ceil(1.05 * 256.0 * h0())) + fp.redundancy_bits());
    const SketchParams sp = fp.sketch_params();
    CHECK(sp.q == doctest::Approx(std::exp(1.0)));
    CHECK(sp.offsets == OffsetMode::Uniform);
}

TEST_CASE("estimate quantization rounds up within the grid step") {
    const uint32_t nb = 14;
    std::mt19937_64 rng(4);
    for (int t = 0; t < 2000; ++t) {
        const double x = std::pow(10.0, -3.0 + 22.0 * double(rng() % 10000) / 10000.0);
        const QuantizedEstimate qe = QuantizedEstimate::quantize_up(x, nb);
        const double v = qe.value(nb);
        CHECK(v >= x);
        CHECK(v <= x * (1.0 + std::exp2(-double(nb))) * (1.0 + 1e-15));
    }
    CHECK(QuantizedEstimate::quantize_up(0.0, nb).zero);
    CHECK(QuantizedEstimate::quantize_up(0.0, nb).value(nb) == 0.0);
    // Exact powers of two are representable.
    const auto p2 = QuantizedEstimate::quantize_up(1024.0, nb);
    CHECK(p2.value(nb) == 1024.0);
}

TEST_CASE("encode/decode round-trips on random states") {
    FishmongerParams fp;
    fp.m = 16;
    const SketchParams sp = fp.sketch_params();
    const OracleSeed seed{21};
    const auto offs = make_offsets(sp, seed);
    std::mt19937_64 rng(8);
    for (int t = 0; t < 200; ++t) {
        PcsaSketch s(sp, seed);
        double lt;
        if (t % 2 == 0) {
            const double lambda = std::pow(10.0, 6.0 * double(rng() % 1000) / 1000.0);
            s = sample_pcsa_state(sp, seed, offs, lambda, uint64_t(t), true);
            lt = QuantizedEstimate::quantize_up(std::max(pcsa_mle(s).value, 1e-3),
                                                fp.mantissa_bits())
                     .value(fp.mantissa_bits());
        } else {
            for (uint32_t c = 0; c < sp.m * sp.w; ++c)
                if (rng() & 1) s.set_cell(c);
            lt = std::pow(10.0, 8.0 * double(rng() % 1000) / 1000.0);
        }
        const auto [bytes, bits] = encode_state(s, lt);
        PcsaSketch dec(sp, seed);
        decode_state(bytes.data(), bits, lt, &dec);
        REQUIRE(dec.same_state(s));

        // Per-encode overhead bound against the model log-likelihood.
        if (lt > 0.0) {
            const double nll = -pcsa_log_likelihood(s, lt);
            CHECK(double(bits) <= nll + 2.0 + double(sp.m) * sp.w * 0x1.0p-20);
        }
    }
}

TEST_CASE("decoding under the wrong model yields a different state") {
    FishmongerParams fp;
    fp.m = 16;
    const SketchParams sp = fp.sketch_params();
    const OracleSeed seed{20};
    const auto offs = make_offsets(sp, seed);
    const PcsaSketch s = sample_pcsa_state(sp, seed, offs, 5e4, 1, true);
    const double lt = pcsa_mle(s).value;
    const auto [bytes, bits] = encode_state(s, lt);
    PcsaSketch wrong(sp, seed);
    decode_state(bytes.data(), bits, 4.0 * lt, &wrong);
    CHECK_FALSE(wrong.same_state(s));
    // In the serialized container the mismatch is caught by the checksum
    // before any decoding happens (see the corruption test below).
}

TEST_CASE("model-typical states compress better than random ones") {
    FishmongerParams fp;
    fp.m = 64;
    const SketchParams sp = fp.sketch_params();
    const OracleSeed seed{22};
    const auto offs = make_offsets(sp, seed);
    const double lambda = 1e4;
    const PcsaSketch typical = sample_pcsa_state(sp, seed, offs, lambda, 0, true);
    const double lt = pcsa_mle(typical).value;
    std::mt19937_64 rng(5);
    PcsaSketch random_state(sp, seed);
    for (uint32_t c = 0; c < sp.m * sp.w; ++c)
        if (rng() & 1) random_state.set_cell(c);
    const auto [tb, tn] = encode_state(typical, lt);
    const auto [rb, rn] = encode_state(random_state, lt);
    CHECK(tn < rn);
}

TEST_CASE("mean code length sits at the entropy rate") {
    FishmongerParams fp;
    fp.m = 256;
    const SketchParams sp = fp.sketch_params();
    const OracleSeed seed{23};
    const auto offs = make_offsets(sp, seed);
    const double lambda = 1e5;
    double mean_bits = 0.0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        const PcsaSketch s = sample_pcsa_state(sp, seed, offs, lambda, uint64_t(t), true);
        const double lt =
            QuantizedEstimate::quantize_up(pcsa_mle(s).value, fp.mantissa_bits())
                .value(fp.mantissa_bits());
        const auto [bytes, bits] = encode_state(s, lt);
        mean_bits += double(bits);
    }
    mean_bits /= trials;
    CHECK(std::abs(mean_bits / (256.0 * h0()) - 1.0) < 0.05);
}

TEST_CASE("storage cost per unit of inverse relative variance") {
    // payload_bits * relative variance should sit near h0/i0 ~ 1.98: the
    // sketch pays about two bits per unit of inverse relative variance.
    FishmongerParams fp;
    fp.m = 256;
    const SketchParams sp = fp.sketch_params();
    const OracleSeed seed{103};
    const auto offs = make_offsets(sp, seed);
    const int trials = 2000;
    const double lambda = 1e6;
    std::vector<double> est(trials);
    double mean_bits = 0.0;
    for (int t = 0; t < trials; ++t) {
        const PcsaSketch s = sample_pcsa_state(sp, seed, offs, lambda, uint64_t(t), false);
        const double lt = QuantizedEstimate::quantize_up(pcsa_mle(s).value, fp.mantissa_bits())
                              .value(fp.mantissa_bits());
        const auto [bytes, bits] = encode_state(s, lt);
        est[size_t(t)] = lt;
        mean_bits += double(bits);
    }
    mean_bits /= trials;
    double mean = 0.0;
    for (double e : est) mean += e;
    mean /= trials;
    double var = 0.0;
    for (double e : est) var += (e - mean) * (e - mean);
    var /= trials - 1;
    const double ratio = mean_bits * var / (lambda * lambda);
    CHECK(std::abs(ratio - 1.98) < 0.1);
    // Estimator standard error tracks 0.77969/sqrt(m) here too.
    CHECK(std::abs(std::sqrt(var) / lambda / (0.77969 / 16.0) - 1.0) < 0.1);
}

TEST_CASE("insertion commits, skips duplicates, and never overruns the budget") {
    FishmongerParams fp;
    fp.m = 64;
    FishmongerSketch fm(fp, OracleSeed{25});
    CHECK(fm.estimate() == 0.0);

    CHECK(fm.insert(42) == FishmongerSketch::InsertOutcome::Committed);
    CHECK(fm.insert(42) == FishmongerSketch::InsertOutcome::Unchanged);
    CHECK(fm.revert_count() == 0);

    PcsaSketch plain(fp.sketch_params(), OracleSeed{25});
    plain.insert(42);
    const OracleSeed ts = derive_subseed(OracleSeed{26}, 0);
    for (int n = 1; n <= 10000; ++n) {
        fm.insert(stream_element(ts, uint64_t(n)));
        plain.insert(stream_element(ts, uint64_t(n)));
        REQUIRE(fm.size_bits() <= fp.budget_bits() + FishmongerSketch::kHeaderBits);
    }
    CHECK(fm.revert_count() == 0);
    CHECK(fm.state().same_state(plain));  // abstract-state agreement, bit-exact

    // The stored estimate tracks the exact MLE from above.
    const double mle = pcsa_mle(plain).value;
    CHECK(fm.estimate() >= mle * (1.0 - 1e-8));
    CHECK(fm.estimate() <= mle * (1.0 + 1.0 / (64.0 * 64.0)) * (1.0 + 1e-8));
}

TEST_CASE("serialization round-trips and rejects corruption") {
    FishmongerParams fp;
    fp.m = 32;
    FishmongerSketch fm(fp, OracleSeed{27});
    const OracleSeed ts = derive_subseed(OracleSeed{28}, 0);
    for (int n = 1; n <= 3000; ++n) fm.insert(stream_element(ts, uint64_t(n)));

    auto blob = fm.serialize();
    const FishmongerSketch back = FishmongerSketch::deserialize(blob);
    CHECK(back.state().same_state(fm.state()));
    CHECK(back.estimate() == fm.estimate());
    CHECK(back.payload_bits() == fm.payload_bits());

    auto bad = blob;
    bad[0] ^= 0xff;
    CHECK_THROWS(FishmongerSketch::deserialize(bad));
    auto truncated = blob;
    truncated.resize(truncated.size() / 2);
    CHECK_THROWS(FishmongerSketch::deserialize(truncated));
}

TEST_CASE("merge equals sketching the union") {
    FishmongerParams fp;
    fp.m = 64;
    FishmongerSketch a(fp, OracleSeed{29}), b(fp, OracleSeed{29}), whole(fp, OracleSeed{29});
    const OracleSeed ts = derive_subseed(OracleSeed{30}, 0);
    for (int n = 1; n <= 4000; ++n) {
        const ElementId id = stream_element(ts, uint64_t(n));
        (n % 2 ? a : b).insert(id);
        whole.insert(id);
    }
    a.merge(b);
    CHECK(a.state().same_state(whole.state()));
    CHECK(a.estimate() == whole.estimate());

    FishmongerSketch other(fp, OracleSeed{31});
    CHECK_THROWS_AS(a.merge(other), std::invalid_argument);
}
