#pragma once

#include <string>

#include "fishtank/likelihood.hpp"
#include "fishtank/loglog.hpp"

namespace fishtank {

// HyperLogLog-type harmonic-mean estimator: alpha * m / sum_i q^{-S_i - r_i}.
// Finite even for the all-zero state (the denominator is at least sum q^{-r}).
Estimate ll_estimate_harmonic(const LlSketch& s, double alpha);

// Geometric-mean estimator: c * m * q^{mean(S_i)}.
Estimate ll_estimate_geometric(const LlSketch& s, double c);

// Calibrates the estimator's leading constant so that its trial mean at
// lambda_ref equals lambda_ref.  Deterministic: trials draw final states
// directly from the register law under a fixed calibration seed.
double calibrate_constant(const SketchParams& params, const std::vector<double>& offsets,
                          EstimatorKind kind, double lambda_ref, uint32_t trials);

// Text cache (q, m, offset_mode, alpha).  Harmonic constants live in
// alpha.csv, geometric ones in the same format next to it.  Random-offset
// constants depend on the offset draw and are never cached.
class AlphaCache {
public:
    explicit AlphaCache(std::string path);
    // Returns the cached constant or calibrates and appends it.
    double get(const SketchParams& params, const std::vector<double>& offsets,
               EstimatorKind kind, double lambda_ref = double(1 << 20), uint32_t trials = 2000);

private:
    std::string path_;
};

}  // namespace fishtank
