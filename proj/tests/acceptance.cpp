// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failures.  Heavy Monte-Carlo criteria run last; everything is
// deterministic for the pinned seeds.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "fishtank/estimators.hpp"
#include "fishtank/fishmonger.hpp"
#include "fishtank/infotheory.hpp"
#include "fishtank/likelihood.hpp"
#include "fishtank/sampling.hpp"
#include "fishtank/study.hpp"
#include "fishtank/util_math.hpp"

using namespace fishtank;

namespace {

int g_failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s  (%s)\n", pass ? "PASS" : "FAIL", id, name,
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

// ---- criterion 1: constants ----------------------------------------------
void criterion_constants() {
    const double h = h0(), i = i0();
    const bool ok = std::abs(h / i - 1.98016) <= 1e-4 &&
                    std::abs(i - 1.6449340668482264) <= 1e-10 &&
                    std::abs(h - 3.25724) <= 1e-4;
    report(1, "constants h0, i0, h0/i0", ok,
           fmt("h0=%.10f i0=%.12f ratio=%.7f", h, i, h / i));
}

// ---- criterion 2: lemma verification --------------------------------------
void criterion_lemmas() {
    const LemmaReport rep = verify_lemmas();
    std::string detail;
    for (const auto& c : rep.checks)
        detail += fmt("%s%s=%.3g", detail.empty() ? "" : ", ", c.pass ? "ok" : "BAD", c.detail);
    report(2, "numeric lemma suite", rep.all_pass(), detail);
}

// ---- criterion 3: fish numbers --------------------------------------------
void criterion_fish() {
    const double base = h0() / i0();
    bool ok = true;
    std::string why;
    const double ref = fish_pcsa(2.0).fish;
    for (double q : {std::exp(1.0), 16.0, 256.0})
        if (std::abs(fish_pcsa(q).fish - ref) > 1e-9) ok = false, why += "pcsa-variation ";
    for (double q : {1.1, 1.5, 2.0, 4.0, 16.0, 256.0})
        if (!(fish_ll(q).fish > base)) ok = false, why += "ll-not-above ";
    const double anchor = kLn2 * fish_ll(2.0).fish;
    if (std::abs(anchor - 2.1097) > 1e-3) ok = false, why += "anchor ";
    double prev = HUGE_VAL;
    for (int k = 0; k <= 200; ++k) {
        const double q = 1.4 * std::pow(1e4 / 1.4, k / 200.0);
        const double f = fish_ll(q).fish;
        if (!(f < prev)) ok = false, why += "not-decreasing ";
        prev = f;
    }
    if (std::abs(fish_ll(1e6).fish - base) >= 1e-3) ok = false, why += "limit ";
    report(3, "fish numbers", ok,
           fmt("ln2*fish_ll(2)=%.6f, |fish_ll(1e6)-h0/i0|=%.2e %s", anchor,
               std::abs(fish_ll(1e6).fish - base), why.c_str()));
}

// ---- criterion 4: base-2 register information dip ---------------------------
void criterion_dip() {
    const double dip = min_norm_info_over_period(false, 2.0, std::exp2(20), 2048);
    report(4, "base-2 register info dip 0.93", std::abs(dip - 0.93) <= 0.01,
           fmt("min=%.6f", dip));
}

// ---- criterion 7: coder identity and overhead -------------------------------
void criterion_coder() {
    FishmongerParams fp;
    fp.m = 32;
    const SketchParams sp = fp.sketch_params();
    const OracleSeed seed{401};
    const auto offs = make_offsets(sp, seed);
    std::mt19937_64 rng(424242);
    const double cells = double(sp.m) * sp.w;
    int bad_roundtrip = 0, bad_overhead = 0;
    double worst_overhead = -HUGE_VAL;
    for (int t = 0; t < 10000; ++t) {
        PcsaSketch s(sp, seed);
        double lt;
        if (t % 2 == 0) {
            const double lambda = std::pow(10.0, 7.0 * double(rng() % 10000) / 10000.0);
            s = sample_pcsa_state(sp, seed, offs, lambda, uint64_t(t), true);
            const double mle = pcsa_mle(s).value;
            lt = QuantizedEstimate::quantize_up(std::max(mle, 1e-3), fp.mantissa_bits())
                     .value(fp.mantissa_bits());
        } else {
            for (uint32_t c = 0; c < uint32_t(cells); ++c)
                if (rng() & 1) s.set_cell(c);
            lt = std::pow(10.0, 9.0 * double(rng() % 10000) / 10000.0);
        }
        const auto [bytes, nbits] = encode_state(s, lt);
        PcsaSketch dec(sp, seed);
        decode_state(bytes.data(), nbits, lt, &dec);
        if (!dec.same_state(s)) ++bad_roundtrip;
        const double nll = -pcsa_log_likelihood(s, lt);
        const double overhead = double(nbits) - nll;
        worst_overhead = std::max(worst_overhead, overhead);
        if (overhead > 2.0 + cells * 0x1.0p-20) ++bad_overhead;
    }
    report(7, "coder identity + overhead bound", bad_roundtrip == 0 && bad_overhead == 0,
           fmt("roundtrip fails=%d, overhead fails=%d, worst=+%.4f bits", bad_roundtrip,
               bad_overhead, worst_overhead));
}

// ---- criterion 8: smoothing reproduction ------------------------------------
double oscillation(OffsetMode mode, OracleSeed seed) {
    TrialConfig cfg;
    cfg.sketch = SketchKind::Ll;
    cfg.estimator = EstimatorKind::Harmonic;
    cfg.params.q = 16.0;
    cfg.params.m = 128;
    cfg.params.w = 16;
    cfg.params.offsets = mode;
    for (int i = 0; i < 33; ++i) cfg.lambdas.push_back(65536.0 * std::pow(2.0, i / 4.0));
    cfg.trials = 1000;
    cfg.seed = seed;
    const auto res = run_error_study(cfg);
    std::vector<double> med;
    for (const auto& r : res) med.push_back(r.ratio_quantiles[3]);
    // 3-point windowed median, then peak-to-trough.
    std::vector<double> sm;
    for (size_t i = 1; i + 1 < med.size(); ++i) {
        double w[3] = {med[i - 1], med[i], med[i + 1]};
        std::sort(w, w + 3);
        sm.push_back(w[1]);
    }
    return *std::max_element(sm.begin(), sm.end()) / *std::min_element(sm.begin(), sm.end());
}

void criterion_smoothing() {
    const OracleSeed seed{12};
    const double none = oscillation(OffsetMode::None, seed);
    const double uniform = oscillation(OffsetMode::Uniform, seed);
    const double random = oscillation(OffsetMode::Random, seed);
    const bool ok = none > 1.05 && uniform < 1.02 && random < 1.02;
    report(8, "offset smoothing of the error curve", ok,
           fmt("peak/trough none=%.4f uniform=%.4f random=%.4f", none, uniform, random));
}

// ---- criterion 9: martingale unbiasedness -----------------------------------
void criterion_martingale() {
    TrialConfig cfg;
    cfg.sketch = SketchKind::Pcsa;
    cfg.estimator = EstimatorKind::Martingale;
    cfg.params.q = std::exp(1.0);
    cfg.params.m = 64;
    cfg.params.w = 45;
    cfg.params.offsets = OffsetMode::Uniform;
    cfg.lambdas = {10000.0};
    cfg.trials = 200;
    cfg.seed = OracleSeed{5};
    const auto res = run_error_study(cfg);
    const double rel = res[0].mean_estimate / 10000.0 - 1.0;
    report(9, "martingale estimate unbiased at 1e4", std::abs(rel) <= 0.01,
           fmt("mean=%.1f (%+.3f%%), rel std=%.4f", res[0].mean_estimate, 100 * rel,
               res[0].rel_std));
}

// ---- criterion 10: order-sensitivity demo -----------------------------------
void criterion_hbb() {
    const auto rep = run_hbb_demo(400000, 2000, OracleSeed{8});
    const bool ok = rep.hi_frac_high >= 0.5 && rep.lo_frac_low >= 0.5 && rep.ks_level > 0.2;
    std::string detail = fmt("hi>=1.2x: %.2f%%, lo<=0.8x: %.2f%%, KS(level)=%.3f",
                             100 * rep.hi_frac_high, 100 * rep.lo_frac_low, rep.ks_level);
    // Optional reproduction of the termination-state experiment.
    const auto term = run_hbb_termination(12, 31, 200, OracleSeed{8});
    detail += fmt("; termination hi=%.0f (ref 343928, %+.1f%%) lo=%.0f (ref 462514, %+.1f%%)",
                  term.mean_distinct_hi, 100 * (term.mean_distinct_hi / 343928.0 - 1),
                  term.mean_distinct_lo, 100 * (term.mean_distinct_lo / 462514.0 - 1));
    report(10, "order-sensitivity demo", ok, detail);
}

// ---- criterion 11: MLE vs dense-grid oracle ----------------------------------
void criterion_mle_oracle() {
    SketchParams p;
    p.q = std::exp(1.0);
    p.m = 16;
    p.w = 32;
    p.offsets = OffsetMode::Uniform;
    const OracleSeed seed{571};
    const auto offs = make_offsets(p, seed);
    int checked = 0, bad = 0;
    double worst = 0.0;
    for (int t = 0; checked < 50 && t < 200; ++t) {
        const double lambda = std::pow(10.0, 1.0 + 5.0 * (t % 50) / 50.0);
        const PcsaSketch s = sample_pcsa_state(p, seed, offs, lambda, uint64_t(t), true);
        if (s.empty() || s.saturated()) continue;
        ++checked;
        // Independent oracle: dense geometric grid over the bracket.
        const auto& prob = s.tables().prob;
        double zero_mass = 0.0;
        std::vector<double> set_p;
        for (uint32_t c = 0; c < p.m * p.w; ++c) {
            if (s.bit_raw(c))
                set_p.push_back(prob[c]);
            else
                zero_mass += prob[c];
        }
        const double lo = 1.0 / double(p.m * p.w);
        const double hi = std::exp(double(p.w + 1));
        double best = lo, best_ll = -HUGE_VAL;
        const int grid = 100000;
        for (int g = 0; g < grid; ++g) {
            const double lam = lo * std::pow(hi / lo, double(g) / (grid - 1));
            double ll = -lam * zero_mass * kLog2E;
            for (double pp : set_p) ll += std::log2(std::max(-std::expm1(-lam * pp), 1e-300));
            if (ll > best_ll) {
                best_ll = ll;
                best = lam;
            }
        }
        const double rel = std::abs(pcsa_mle(s).value / best - 1.0);
        worst = std::max(worst, rel);
        if (rel > 1e-3) ++bad;
    }
    report(11, "bisection MLE matches grid argmax", checked == 50 && bad == 0,
           fmt("states=%d, mismatches=%d, worst rel dev=%.2e", checked, bad, worst));
}

// ---- criterion 12: shard-and-merge exactness ---------------------------------
void criterion_merge() {
    std::mt19937_64 rng(90125);
    int bad = 0;
    for (int rep = 0; rep < 100; ++rep) {
        SketchParams p;
        p.q = rep % 2 ? 2.0 : std::exp(1.0);
        p.m = 8;
        p.w = 24;
        p.offsets = rep % 3 == 0 ? OffsetMode::None
                                 : (rep % 3 == 1 ? OffsetMode::Uniform : OffsetMode::Random);
        const OracleSeed seed{rng()};
        const int shards = 2 + int(rng() % 5);
        const int lambda = 500 + int(rng() % 1500);

        std::vector<PcsaSketch> pparts(size_t(shards), PcsaSketch(p, seed));
        PcsaSketch pwhole(p, seed);
        std::vector<LlSketch> lparts(size_t(shards), LlSketch(p, seed));
        LlSketch lwhole(p, seed);
        for (int n = 0; n < lambda; ++n) {
            const ElementId e = rng();
            const size_t shard = size_t(rng() % shards);
            pparts[shard].insert(e);
            pwhole.insert(e);
            lparts[shard].insert(e);
            lwhole.insert(e);
        }
        PcsaSketch pm = pparts[0];
        LlSketch lm = lparts[0];
        for (int k = 1; k < shards; ++k) {
            pm.merge(pparts[size_t(k)]);
            lm.merge(lparts[size_t(k)]);
        }
        if (!pm.same_state(pwhole) || !lm.same_state(lwhole)) ++bad;
    }
    report(12, "shard-and-merge is bit-exact", bad == 0, fmt("splits=100, mismatches=%d", bad));
}

// ---- criteria 5 and 6: compressed-sketch audit --------------------------------
void criteria_fishmonger() {
    // Error and space at m = 1024 over 500 streamed trials.
    const auto big = run_fishmonger_audit(1024, 1000000, 500, OracleSeed{1});
    const double target = 0.77969 / std::sqrt(1024.0);
    const double se_ratio = big.rel_std_error / target;
    report(5, "compressed-sketch standard error", std::abs(se_ratio - 1.0) <= 0.10,
           fmt("rel SE=%.6f vs %.6f (ratio %.3f), mean=%.0f, bits*relvar=%.3f",
               big.rel_std_error, target, se_ratio, big.mean_estimate,
               big.bits_per_inverse_relvar));

    const double per_row = big.mean_payload_bits / 1024.0;
    const bool space_ok = per_row >= h0() - 0.25 && per_row <= h0() + 0.35;

    // Hard budget and zero reverts across a 20-stream sweep at m = 256.
    const auto sweep = run_fishmonger_audit(256, 1000000, 20, OracleSeed{2});
    const bool ok = space_ok && big.budget_respected && sweep.budget_respected &&
                    sweep.total_reverts == 0;
    report(6, "compressed-sketch space and budget", ok,
           fmt("payload/row=%.4f (band [%.4f, %.4f]), budget ok=%d/%d, sweep reverts=%llu",
               per_row, h0() - 0.25, h0() + 0.35, int(big.budget_respected),
               int(sweep.budget_respected), (unsigned long long)sweep.total_reverts));
}

}  // namespace

int main(int argc, char** argv) {
    const bool quick = argc > 1 && std::strcmp(argv[1], "--quick") == 0;
    const auto t0 = std::chrono::steady_clock::now();
    criterion_constants();
    criterion_lemmas();
    criterion_fish();
    criterion_dip();
    criterion_coder();
    criterion_smoothing();
    criterion_martingale();
    criterion_hbb();
    criterion_mle_oracle();
    criterion_merge();
    if (!quick) criteria_fishmonger();
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s: %d criterion failure(s), %.1f s%s\n", g_failures ? "FAIL" : "OK", g_failures,
                secs, quick ? " (quick mode: criteria 5-6 skipped)" : "");
    return g_failures;
}
