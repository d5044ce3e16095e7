#include "fishtank/study.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <mutex>
#include <stdexcept>

#include "fishtank/martingale.hpp"
#include "fishtank/parallel.hpp"
#include "fishtank/sampling.hpp"
#include "fishtank/serialize.hpp"

namespace fishtank {

void TrialConfig::validate() const {
    params.validate();
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    for (size_t i = 0; i < lambdas.size(); ++i) {
        if (lambdas[i] < 0.0) throw std::invalid_argument("lambdas must be non-negative");
        if (i > 0 && lambdas[i] <= lambdas[i - 1])
            throw std::invalid_argument("lambdas must be increasing");
    }
    if (sketch == SketchKind::Pcsa &&
        (estimator == EstimatorKind::Harmonic || estimator == EstimatorKind::Geometric))
        throw std::invalid_argument("harmonic/geometric estimators need a register sketch");
}

namespace {

double quantile_nearest(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) return 0.0;
    const double pos = p * double(sorted.size() - 1);
    return sorted[size_t(std::lround(pos))];
}

double stream_martingale(const TrialConfig& cfg, const std::vector<double>& offsets,
                         uint64_t lambda, uint64_t trial) {
    const OracleSeed ts = derive_subseed(cfg.seed, trial);
    auto feed = [&](auto& sketch) {
        for (uint64_t n = 1; n <= lambda; ++n) {
            const ElementId id = stream_element(ts, n);
            if (cfg.poissonize) {
                const uint32_t mult = poisson_multiplicity(cfg.seed, id);
                for (uint32_t c = 1; c <= mult; ++c) sketch.insert(poisson_copy_id(id, c));
            } else {
                sketch.insert(id);
            }
        }
        return sketch.estimate();
    };
    if (cfg.sketch == SketchKind::Pcsa) {
        MartingaleSketch<PcsaSketch> s(PcsaSketch(cfg.params, cfg.seed, offsets));
        return feed(s);
    }
    MartingaleSketch<LlSketch> s(LlSketch(cfg.params, cfg.seed, offsets));
    return feed(s);
}

uint64_t serialized_bits(const TrialConfig& cfg) {
    if (cfg.estimator == EstimatorKind::Martingale) {
        if (cfg.sketch == SketchKind::Pcsa)
            return 8 * serialize_sketch(MartingaleSketch<PcsaSketch>(
                           PcsaSketch(cfg.params, cfg.seed))).size();
        return 8 * serialize_sketch(MartingaleSketch<LlSketch>(LlSketch(cfg.params, cfg.seed)))
                       .size();
    }
    if (cfg.sketch == SketchKind::Pcsa)
        return 8 * serialize_sketch(PcsaSketch(cfg.params, cfg.seed)).size();
    return 8 * serialize_sketch(LlSketch(cfg.params, cfg.seed)).size();
}

}  // namespace

std::vector<TrialResult> run_error_study(const TrialConfig& cfg) {
    cfg.validate();
    const std::vector<double> offsets = make_offsets(cfg.params, cfg.seed);

    double constant = cfg.constant;
    if (constant == 0.0 &&
        (cfg.estimator == EstimatorKind::Harmonic || cfg.estimator == EstimatorKind::Geometric))
        constant = calibrate_constant(cfg.params, offsets, cfg.estimator, double(1 << 20), 2000);

    const double size_bits = double(serialized_bits(cfg));
    std::vector<TrialResult> out(cfg.lambdas.size());
    for (size_t li = 0; li < cfg.lambdas.size(); ++li) {
        const double lambda = cfg.lambdas[li];
        TrialResult& res = out[li];
        res.lambda = lambda;
        res.mean_size_bits = size_bits;
        if (lambda == 0.0) continue;  // empty stream: every estimate is zero

        std::vector<double> est(cfg.trials);
        parallel_for(cfg.trials, cfg.threads, [&](uint64_t t) {
            const uint64_t trial_key = li * cfg.trials + t;
            double e = 0.0;
            switch (cfg.estimator) {
                case EstimatorKind::Mle:
                    if (cfg.sketch == SketchKind::Pcsa) {
                        const PcsaSketch s = sample_pcsa_state(cfg.params, cfg.seed, offsets,
                                                               lambda, trial_key, cfg.poissonize);
                        e = pcsa_mle(s).value;
                    } else {
                        const LlSketch s = sample_ll_state(cfg.params, cfg.seed, offsets, lambda,
                                                           trial_key, cfg.poissonize);
                        e = ll_mle(s).value;
                    }
                    break;
                case EstimatorKind::Harmonic:
                case EstimatorKind::Geometric: {
                    const LlSketch s = sample_ll_state(cfg.params, cfg.seed, offsets, lambda,
                                                       trial_key, cfg.poissonize);
                    e = cfg.estimator == EstimatorKind::Harmonic
                            ? ll_estimate_harmonic(s, constant).value
                            : ll_estimate_geometric(s, constant).value;
                    break;
                }
                case EstimatorKind::Martingale:
                    e = stream_martingale(cfg, offsets, uint64_t(lambda), trial_key);
                    break;
            }
            est[t] = e;
        });

        double mean = 0.0;
        for (double e : est) mean += e;
        mean /= double(cfg.trials);
        double var = 0.0;
        for (double e : est) var += (e - mean) * (e - mean);
        var = cfg.trials > 1 ? var / double(cfg.trials - 1) : 0.0;
        res.mean_estimate = mean;
        res.rel_std = std::sqrt(var) / lambda;

        std::vector<double> ratios(est);
        for (double& r : ratios) r /= lambda;
        std::sort(ratios.begin(), ratios.end());
        for (size_t qi = 0; qi < kQuantiles.size(); ++qi)
            res.ratio_quantiles[qi] = quantile_nearest(ratios, kQuantiles[qi]);
    }
    return out;
}

FmAuditReport run_fishmonger_audit(uint32_t m, uint64_t lambda_max, uint32_t trials,
                                   OracleSeed seed, double delta, unsigned threads) {
    FishmongerParams fp;
    fp.m = m;
    fp.delta = delta;
    FmAuditReport rep;
    rep.params = fp;
    rep.lambda_max = lambda_max;
    rep.trials = trials;
    rep.budget_bits = fp.budget_bits();

    std::vector<uint64_t> powers;
    for (uint64_t p = 1; p <= lambda_max; p *= 2) powers.push_back(p);

    struct TrialOut {
        std::vector<uint64_t> size_at_power;
        uint64_t reverts = 0;
        uint64_t max_size = 0;
        bool budget_ok = true;
        double estimate = 0.0;
        double payload_bits = 0.0;
    };
    std::vector<TrialOut> outs(trials);
    const uint64_t size_limit = rep.budget_bits + FishmongerSketch::kHeaderBits;

    parallel_for(trials, threads, [&](uint64_t t) {
        TrialOut& o = outs[t];
        o.size_at_power.resize(powers.size(), 0);
        FishmongerSketch fm(fp, seed);
        const OracleSeed ts = derive_subseed(seed, t);
        size_t next_power = 0;
        for (uint64_t n = 1; n <= lambda_max; ++n) {
            fm.insert(stream_element(ts, n));
            const uint64_t sz = fm.size_bits();
            if (sz > o.max_size) o.max_size = sz;
            if (sz > size_limit) o.budget_ok = false;
            if (next_power < powers.size() && n == powers[next_power]) {
                o.size_at_power[next_power] = sz;
                ++next_power;
            }
        }
        o.reverts = fm.revert_count();
        o.estimate = fm.estimate();
        o.payload_bits = double(fm.payload_bits());
    });

    rep.checkpoints.resize(powers.size());
    for (size_t pi = 0; pi < powers.size(); ++pi) {
        auto& cp = rep.checkpoints[pi];
        cp.lambda = powers[pi];
        for (const auto& o : outs) {
            cp.mean_size_bits += double(o.size_at_power[pi]);
            cp.max_size_bits = std::max(cp.max_size_bits, o.size_at_power[pi]);
        }
        cp.mean_size_bits /= double(trials);
    }
    double mean = 0.0, payload = 0.0;
    for (const auto& o : outs) {
        rep.total_reverts += o.reverts;
        rep.max_size_bits = std::max(rep.max_size_bits, o.max_size);
        rep.budget_respected = rep.budget_respected && o.budget_ok;
        mean += o.estimate;
        payload += o.payload_bits;
    }
    mean /= double(trials);
    payload /= double(trials);
    double var = 0.0;
    for (const auto& o : outs) var += (o.estimate - mean) * (o.estimate - mean);
    var = trials > 1 ? var / double(trials - 1) : 0.0;
    rep.mean_estimate = mean;
    rep.rel_std_error = std::sqrt(var) / double(lambda_max);
    rep.mean_payload_bits = payload;
    rep.bits_per_inverse_relvar = payload * var / (double(lambda_max) * double(lambda_max));
    return rep;
}

HbbReport run_hbb_demo(uint64_t lambda, uint32_t trials, OracleSeed seed, unsigned threads) {
    HbbReport rep;
    rep.lambda = lambda;
    rep.trials = trials;
    rep.hi_estimates.resize(trials);
    rep.lo_estimates.resize(trials);
    std::vector<uint32_t> hi_level(trials), lo_level(trials);
    parallel_for(trials, threads, [&](uint64_t t) {
        const OracleSeed ts = derive_subseed(seed, t);
        const HyperBitBitState hi = hbb_run_hi(ts, lambda);
        const HyperBitBitState lo = hbb_run_lo(ts, lambda);
        rep.hi_estimates[t] = hbb_estimate(hi);
        rep.lo_estimates[t] = hbb_estimate(lo);
        hi_level[t] = hi.level;
        lo_level[t] = lo.level;
    });
    uint32_t hi_high = 0, lo_low = 0;
    for (uint32_t t = 0; t < trials; ++t) {
        if (rep.hi_estimates[t] >= 1.2 * double(lambda)) ++hi_high;
        if (rep.lo_estimates[t] <= 0.8 * double(lambda)) ++lo_low;
    }
    rep.hi_frac_high = double(hi_high) / double(trials);
    rep.lo_frac_low = double(lo_low) / double(trials);

    // Two-sample KS statistic over the level distributions.
    const uint32_t max_level =
        std::max(*std::max_element(hi_level.begin(), hi_level.end()),
                 *std::max_element(lo_level.begin(), lo_level.end()));
    double ks = 0.0, f1 = 0.0, f2 = 0.0;
    for (uint32_t l = 0; l <= max_level; ++l) {
        f1 += double(std::count(hi_level.begin(), hi_level.end(), l)) / trials;
        f2 += double(std::count(lo_level.begin(), lo_level.end(), l)) / trials;
        ks = std::max(ks, std::abs(f1 - f2));
    }
    rep.ks_level = ks;
    return rep;
}

HbbTerminationReport run_hbb_termination(uint32_t level, uint32_t hw, uint32_t trials,
                                         OracleSeed seed, unsigned threads) {
    HbbTerminationReport rep;
    rep.level = level;
    rep.hw = hw;
    rep.trials = trials;
    // Generous cap; the target state is typically reached within a couple
    // hundred times 2^level insertions.
    const uint64_t cap = uint64_t(2048) << level;
    std::vector<uint64_t> hi(trials), lo(trials);
    parallel_for(trials, threads, [&](uint64_t t) {
        const OracleSeed ts = derive_subseed(seed, t);
        hi[t] = hbb_run_until_hi(ts, level, hw, cap);
        lo[t] = hbb_run_until_lo(ts, level, hw, cap);
    });
    double mh = 0.0, ml = 0.0;
    uint32_t nh = 0, nl = 0;
    for (uint32_t t = 0; t < trials; ++t) {
        if (hi[t]) mh += double(hi[t]), ++nh;
        if (lo[t]) ml += double(lo[t]), ++nl;
    }
    rep.mean_distinct_hi = nh ? mh / nh : 0.0;
    rep.mean_distinct_lo = nl ? ml / nl : 0.0;
    return rep;
}

std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_study_csv(std::ostream& os, const std::vector<TrialResult>& results) {
    os << "lambda,statistic,value\n";
    for (const auto& r : results) {
        const std::string lam = format_double(r.lambda);
        os << lam << ",mean_estimate," << format_double(r.mean_estimate) << '\n';
        os << lam << ",rel_std," << format_double(r.rel_std) << '\n';
        for (size_t qi = 0; qi < kQuantiles.size(); ++qi)
            os << lam << ",ratio_q" << format_double(100.0 * kQuantiles[qi]) << ','
               << format_double(r.ratio_quantiles[qi]) << '\n';
        os << lam << ",mean_size_bits," << format_double(r.mean_size_bits) << '\n';
    }
}

void write_fm_audit_csv(std::ostream& os, const FmAuditReport& rep) {
    os << "lambda,statistic,value\n";
    for (const auto& cp : rep.checkpoints) {
        os << cp.lambda << ",mean_size_bits," << format_double(cp.mean_size_bits) << '\n';
        os << cp.lambda << ",max_size_bits," << cp.max_size_bits << '\n';
    }
    os << rep.lambda_max << ",budget_bits," << rep.budget_bits << '\n';
    os << rep.lambda_max << ",total_reverts," << rep.total_reverts << '\n';
    os << rep.lambda_max << ",mean_estimate," << format_double(rep.mean_estimate) << '\n';
    os << rep.lambda_max << ",rel_std_error," << format_double(rep.rel_std_error) << '\n';
    os << rep.lambda_max << ",mean_payload_bits," << format_double(rep.mean_payload_bits) << '\n';
    os << rep.lambda_max << ",bits_per_inverse_relvar,"
       << format_double(rep.bits_per_inverse_relvar) << '\n';
}

void write_hbb_csv(std::ostream& os, const HbbReport& rep) {
    os << "sequence,trial,estimate\n";
    for (uint32_t t = 0; t < rep.trials; ++t)
        os << "hi," << t << ',' << format_double(rep.hi_estimates[t]) << '\n';
    for (uint32_t t = 0; t < rep.trials; ++t)
        os << "lo," << t << ',' << format_double(rep.lo_estimates[t]) << '\n';
}

}  // namespace fishtank
