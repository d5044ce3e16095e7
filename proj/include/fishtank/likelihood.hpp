#pragma once

#include <cstdint>

#include "fishtank/loglog.hpp"
#include "fishtank/pcsa.hpp"

namespace fishtank {

enum class EstimatorKind : uint8_t { Mle = 0, Harmonic = 1, Geometric = 2, Martingale = 3 };

struct Estimate {
    double value = 0.0;
    EstimatorKind method = EstimatorKind::Mle;
    bool saturated = false;  // sentinel q^{W+1} returned instead of diverging
};

// log2-likelihood of the bit matrix under the independent-cell model with
// Pr(bit(i,j) = 0) = exp(-lambda * p_ij).  Always <= 0 for reachable states.
double pcsa_log_likelihood(const PcsaSketch& s, double lambda);

// Derivative of the natural-log likelihood w.r.t. lambda (strictly
// decreasing in lambda, which makes the MLE a bisection root-find).
double pcsa_log_likelihood_gradient(const PcsaSketch& s, double lambda);

// Maximum-likelihood estimate by bisection on the gradient over
// [1/(mW), q^{W+1}] to relative tolerance 1e-9.
Estimate pcsa_mle(const PcsaSketch& s);

// Same root, but polished with safeguarded Newton from a warm start; used on
// the incremental update path where the estimate moves by a tiny step.
double pcsa_mle_refine(const PcsaSketch& s, double warm_start);

// log2-likelihood of the register vector, with the truncation boundaries
// absorbing the lower (S=0) and upper (S=W) tail mass.
double ll_log_likelihood(const LlSketch& s, double lambda);

// Golden-section maximization over log lambda (the register likelihood is
// not guaranteed concave).
Estimate ll_mle(const LlSketch& s);

inline double lambda_cap(const SketchParams& p) {
    return std::exp(double(p.w + 1) * std::log(p.q));
}

}  // namespace fishtank
