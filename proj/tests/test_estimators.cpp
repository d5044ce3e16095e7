#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "fishtank/estimators.hpp"
#include "fishtank/martingale.hpp"
#include "fishtank/sampling.hpp"

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

TEST_CASE("harmonic estimator algebra") {
    // Equal registers, no offsets: alpha * q^k.
    const auto p = params(2.0, 8, 20, OffsetMode::None);
    LlSketch s(p, OracleSeed{1});
    for (uint32_t i = 0; i < p.m; ++i) s.set_register(i, 5);
    CHECK(ll_estimate_harmonic(s, 0.7).value == doctest::Approx(0.7 * 32.0).epsilon(1e-12));

    // Two registers with explicit offsets (0, 0.5).
    const auto p2 = params(2.0, 2, 20, OffsetMode::Uniform);
    LlSketch s2(p2, OracleSeed{1});
    s2.set_register(0, 3);
    s2.set_register(1, 4);
    CHECK(ll_estimate_harmonic(s2, 1.0).value ==
          doctest::Approx(11.820738000580137).epsilon(1e-12));

    // Finite on the all-zero state.
    LlSketch zero(p2, OracleSeed{1});
    const double z = ll_estimate_harmonic(zero, 1.0).value;
    CHECK(std::isfinite(z));
    CHECK(z > 0.0);

    // Scaling: bumping every register by one multiplies the estimate by q.
    LlSketch bumped(p2, OracleSeed{1});
    bumped.set_register(0, 4);
    bumped.set_register(1, 5);
    CHECK(ll_estimate_harmonic(bumped, 1.0).value ==
          doctest::Approx(2.0 * ll_estimate_harmonic(s2, 1.0).value).epsilon(1e-12));
}

TEST_CASE("geometric estimator algebra") {
    const auto p = params(2.0, 8, 20, OffsetMode::None);
    LlSketch s(p, OracleSeed{1});
    for (uint32_t i = 0; i < p.m; ++i) s.set_register(i, 5);
    CHECK(ll_estimate_geometric(s, 0.3).value == doctest::Approx(0.3 * 8 * 32.0).epsilon(1e-12));

    const auto p2 = params(2.0, 2, 20, OffsetMode::None);
    LlSketch s2(p2, OracleSeed{1});
    s2.set_register(0, 3);
    s2.set_register(1, 5);
    CHECK(ll_estimate_geometric(s2, 1.0).value == doctest::Approx(2.0 * 16.0).epsilon(1e-12));
}

TEST_CASE("calibration is deterministic and self-consistent") {
    const auto p = params(16.0, 128, 16, OffsetMode::Random);
    const auto offs = make_offsets(p, OracleSeed{77});
    const double a1 = calibrate_constant(p, offs, EstimatorKind::Harmonic, double(1 << 20), 500);
    const double a2 = calibrate_constant(p, offs, EstimatorKind::Harmonic, double(1 << 20), 500);
    CHECK(a1 == a2);
    CHECK_THROWS_AS(
        (void)calibrate_constant(p, offs, EstimatorKind::Harmonic, double(1 << 20), 50),
        std::invalid_argument);

    // Post-calibration bias at the reference cardinality, fresh draws.
    const double alpha =
        calibrate_constant(p, offs, EstimatorKind::Harmonic, double(1 << 20), 2000);
    double mean = 0.0;
    const int trials = 1500;
    for (int t = 0; t < trials; ++t) {
        const LlSketch s =
            sample_ll_state(p, OracleSeed{78}, offs, double(1 << 20), uint64_t(t), false);
        mean += ll_estimate_harmonic(s, alpha).value;
    }
    mean /= trials;
    CHECK(std::abs(mean / double(1 << 20) - 1.0) < 0.01);
}

TEST_CASE("calibrated harmonic estimator is nearly unbiased at 1e6") {
    const auto p = params(2.0, 128, 40, OffsetMode::Uniform);
    const auto offs = make_offsets(p, OracleSeed{79});
    const double alpha =
        calibrate_constant(p, offs, EstimatorKind::Harmonic, double(1 << 20), 2000);
    double mean = 0.0;
    const int trials = 1500;
    for (int t = 0; t < trials; ++t) {
        const LlSketch s = sample_ll_state(p, OracleSeed{80}, offs, 1e6, uint64_t(t), false);
        mean += ll_estimate_harmonic(s, alpha).value;
    }
    mean /= trials;
    CHECK(std::abs(mean / 1e6 - 1.0) < 0.01);
}

TEST_CASE("geometric estimator standard error near 1.3/sqrt(m)") {
    const auto p = params(2.0, 1024, 40, OffsetMode::None);
    const auto offs = make_offsets(p, OracleSeed{81});
    const double c = calibrate_constant(p, offs, EstimatorKind::Geometric, double(1 << 20), 2000);
    const int trials = 500;
    std::vector<double> est(trials);
    double mean = 0.0;
    for (int t = 0; t < trials; ++t) {
        const LlSketch s = sample_ll_state(p, OracleSeed{82}, offs, 1e6, uint64_t(t), false);
        est[t] = ll_estimate_geometric(s, c).value;
        mean += est[t];
    }
    mean /= trials;
    double var = 0.0;
    for (double e : est) var += (e - mean) * (e - mean);
    var /= trials - 1;
    const double rel_se = std::sqrt(var) / 1e6;
    CHECK(std::abs(rel_se / (1.3 / std::sqrt(1024.0)) - 1.0) < 0.15);
}

TEST_CASE("alpha cache round-trips") {
    const auto path = std::filesystem::temp_directory_path() / "fishtank_alpha_test.csv";
    std::filesystem::remove(path);
    std::filesystem::remove(path.string() + ".geometric");
    AlphaCache cache(path.string());
    const auto p = params(2.0, 16, 20, OffsetMode::Uniform);
    const auto offs = make_offsets(p, OracleSeed{83});
    const double a = cache.get(p, offs, EstimatorKind::Harmonic, double(1 << 16), 200);
    const double b = cache.get(p, offs, EstimatorKind::Harmonic, double(1 << 16), 200);
    CHECK(a == b);
    CHECK(std::filesystem::exists(path));
    std::filesystem::remove(path);
    std::filesystem::remove(path.string() + ".geometric");
}

TEST_CASE("martingale estimate is unbiased on short streams") {
    SketchParams p = params(std::exp(1.0), 64, 45, OffsetMode::Uniform);
    const int trials = 100, lambda = 2000;
    double mean = 0.0;
    for (int t = 0; t < trials; ++t) {
        MartingaleSketch<PcsaSketch> ms(PcsaSketch(p, OracleSeed{85}));
        const OracleSeed ts = derive_subseed(OracleSeed{86}, uint64_t(t));
        for (int n = 1; n <= lambda; ++n) ms.insert(stream_element(ts, uint64_t(n)));
        mean += ms.estimate();
    }
    mean /= trials;
    CHECK(std::abs(mean / lambda - 1.0) < 0.025);
}
