#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "fishtank/estimators.hpp"
#include "fishtank/fishmonger.hpp"
#include "fishtank/hyperbitbit.hpp"
#include "fishtank/likelihood.hpp"
#include "fishtank/params.hpp"

namespace fishtank {

enum class SketchKind : uint8_t { Pcsa = 0, Ll = 1 };

struct TrialConfig {
    SketchKind sketch = SketchKind::Ll;
    EstimatorKind estimator = EstimatorKind::Harmonic;
    SketchParams params;
    std::vector<double> lambdas;  // positive, increasing ([0] allowed as degenerate case)
    uint32_t trials = 1000;
    OracleSeed seed{1};
    bool poissonize = false;
    unsigned threads = 0;
    double constant = 0.0;  // harmonic/geometric scale; 0 = calibrate

    void validate() const;
};

// Quantile probes of the ratio estimate/lambda.
inline constexpr std::array<double, 7> kQuantiles = {0.01, 0.05, 0.25, 0.50, 0.75, 0.95, 0.99};

struct TrialResult {
    double lambda = 0.0;
    double mean_estimate = 0.0;
    double rel_std = 0.0;  // stddev(estimate)/lambda
    std::array<double, 7> ratio_quantiles{};
    double mean_size_bits = 0.0;
};

// Monte-Carlo error study.  Trials draw final states directly from the
// sketch-state law at each cardinality (equal in distribution to streaming
// that many fresh elements) except for the order-dependent martingale
// estimator, which streams.
std::vector<TrialResult> run_error_study(const TrialConfig& cfg);

struct FmCheckpoint {
    uint64_t lambda = 0;
    double mean_size_bits = 0.0;
    uint64_t max_size_bits = 0;
};

struct FmAuditReport {
    FishmongerParams params;
    uint64_t lambda_max = 0;
    uint32_t trials = 0;
    uint64_t budget_bits = 0;
    std::vector<FmCheckpoint> checkpoints;  // at powers of two
    uint64_t total_reverts = 0;
    uint64_t max_size_bits = 0;
    bool budget_respected = true;  // size <= budget + header after every insertion
    double mean_estimate = 0.0;
    double rel_std_error = 0.0;          // stddev(final estimate)/lambda_max
    double mean_payload_bits = 0.0;      // at lambda_max
    double bits_per_inverse_relvar = 0.0;  // mean payload * relative variance
};

FmAuditReport run_fishmonger_audit(uint32_t m, uint64_t lambda_max, uint32_t trials,
                                   OracleSeed seed, double delta = 0.05, unsigned threads = 0);

struct HbbReport {
    uint64_t lambda = 0;
    uint32_t trials = 0;
    double hi_frac_high = 0.0;  // fraction of hi-sequence estimates >= 1.2 lambda
    double lo_frac_low = 0.0;   // fraction of lo-sequence estimates <= 0.8 lambda
    double ks_level = 0.0;      // two-sample KS statistic of the level distributions
    std::vector<double> hi_estimates;
    std::vector<double> lo_estimates;
};

HbbReport run_hbb_demo(uint64_t lambda, uint32_t trials, OracleSeed seed, unsigned threads = 0);

struct HbbTerminationReport {
    uint32_t level = 0, hw = 0;
    uint32_t trials = 0;
    double mean_distinct_hi = 0.0;
    double mean_distinct_lo = 0.0;
};

HbbTerminationReport run_hbb_termination(uint32_t level, uint32_t hw, uint32_t trials,
                                         OracleSeed seed, unsigned threads = 0);

// CSV writers: fixed schema, one row per (lambda, statistic), shortest
// round-trip number formatting, no locale.
void write_study_csv(std::ostream& os, const std::vector<TrialResult>& results);
void write_fm_audit_csv(std::ostream& os, const FmAuditReport& report);
void write_hbb_csv(std::ostream& os, const HbbReport& report);
std::string format_double(double v);

}  // namespace fishtank
