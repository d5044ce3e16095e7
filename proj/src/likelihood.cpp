#include "fishtank/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fishtank/util_math.hpp"

namespace fishtank {

namespace {
constexpr double kLogFloorBits = -996.578428466209;  // log2(1e-300)
constexpr double kGradSkip = 45.0;  // e^{-x} below doubles' noise floor

double clamped_log2(double p) {
    if (p < 1e-300) return kLogFloorBits;
    if (p > 1.0 - 1e-16) p = 1.0 - 1e-16;
    return std::log2(p);
}
}  // namespace

double pcsa_log_likelihood(const PcsaSketch& s, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
    const auto& prob = s.tables().prob;
    const uint32_t m = s.params().m, w = s.params().w;
    double bits = 0.0;
    for (uint32_t cell = 0; cell < m * w; ++cell) {
        const double x = lambda * prob[cell];
        if (s.bit_raw(cell)) {
            bits += clamped_log2(-std::expm1(-x));
        } else {
            bits += std::max(-x * kLog2E, kLogFloorBits);
        }
    }
    return bits;
}

double pcsa_log_likelihood_gradient(const PcsaSketch& s, double lambda) {
    double g = -s.zero_probability_mass();
    const auto& prob = s.tables().prob;
    const uint32_t n = s.params().m * s.params().w;
    for (uint32_t cell = 0; cell < n; ++cell) {
        if (!s.bit_raw(cell)) continue;
        const double x = lambda * prob[cell];
        if (x > kGradSkip) continue;
        g += prob[cell] / fast_expm1(x);
    }
    return g;
}

Estimate pcsa_mle(const PcsaSketch& s) {
    if (s.empty()) return {0.0, EstimatorKind::Mle, false};
    if (s.saturated()) return {lambda_cap(s.params()), EstimatorKind::Mle, true};
    const double n = double(s.params().m) * s.params().w;
    double lo = std::log(1.0 / n);
    double hi = double(s.params().w + 1) * std::log(s.params().q);
    if (pcsa_log_likelihood_gradient(s, std::exp(lo)) <= 0.0)
        return {std::exp(lo), EstimatorKind::Mle, false};
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if (pcsa_log_likelihood_gradient(s, std::exp(mid)) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return {std::exp(0.5 * (lo + hi)), EstimatorKind::Mle, false};
}

double pcsa_mle_refine(const PcsaSketch& s, double warm_start) {
    if (s.empty()) return 0.0;
    if (s.saturated()) return lambda_cap(s.params());

    // Gradient and curvature restricted to informative set cells.
    std::vector<std::pair<double, double>> set_probs;  // (p, unused)
    const auto& prob = s.tables().prob;
    const uint32_t n = s.params().m * s.params().w;
    std::vector<double> ps;
    ps.reserve(256);
    for (uint32_t cell = 0; cell < n; ++cell)
        if (s.bit_raw(cell)) ps.push_back(prob[cell]);
    const double zero_mass = s.zero_probability_mass();

    auto grad = [&](double lam, double* curv) {
        double g = -zero_mass, c = 0.0;
        for (double p : ps) {
            const double x = lam * p;
            if (x > kGradSkip) continue;
            const double e = fast_expm1(x);
            const double inv = 1.0 / e;
            g += p * inv;
            c -= p * p * inv * (1.0 + inv);  // -p^2 e^x / (e^x-1)^2
        }
        if (curv) *curv = c;
        return g;
    };

    const double cap = lambda_cap(s.params());
    double lo = 1.0 / double(n), hi = cap;
    double lam = std::min(std::max(warm_start > 0 ? warm_start : 1.0, lo), hi);
    for (int it = 0; it < 200; ++it) {
        double curv = 0.0;
        const double g = grad(lam, &curv);
        if (g > 0.0)
            lo = lam;
        else
            hi = lam;
        double next = curv < 0.0 ? lam - g / curv : lam;
        if (!(next > lo && next < hi)) next = std::sqrt(lo * hi);  // bisect in log space
        if (std::abs(next - lam) <= 1e-10 * lam) {
            lam = next;
            break;
        }
        lam = next;
        if (hi - lo <= 1e-10 * lo) break;
    }
    return lam;
}

double ll_log_likelihood(const LlSketch& s, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
    const auto& p = s.params();
    const double lnq = std::log(p.q);
    double bits = 0.0;
    for (uint32_t i = 0; i < p.m; ++i) {
        const double lam_i = lambda * s.keep_probs()[i];
        const uint16_t reg = s.reg(i);
        if (reg == 0) {
            bits += std::max(-lam_i * std::exp(-lnq) * kLog2E, kLogFloorBits);
        } else if (reg >= p.w) {
            bits += clamped_log2(-std::expm1(-lam_i * std::exp(-double(p.w) * lnq)));
        } else {
            const double a = lam_i * std::exp(-double(reg + 1) * lnq);
            const double b = lam_i * std::exp(-double(reg) * lnq);
            // psi = e^{-a} - e^{-b} = e^{-a} (1 - e^{-(b-a)})
            const double ln_psi = -a + std::log(-std::expm1(-(b - a)));
            bits += std::max(ln_psi * kLog2E, kLogFloorBits);
        }
    }
    return bits;
}

Estimate ll_mle(const LlSketch& s) {
    const auto& p = s.params();
    bool all_zero = true, all_sat = true;
    for (uint32_t i = 0; i < p.m; ++i) {
        if (s.reg(i) != 0) all_zero = false;
        if (s.reg(i) < p.w) all_sat = false;
    }
    if (all_zero) return {0.0, EstimatorKind::Mle, false};
    if (all_sat) return {lambda_cap(p), EstimatorKind::Mle, true};

    double a = std::log(1.0 / (double(p.m) * p.w));
    double b = double(p.w + 1) * std::log(p.q);
    const double gr = 0.6180339887498949;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = ll_log_likelihood(s, std::exp(x1));
    double f2 = ll_log_likelihood(s, std::exp(x2));
    for (int it = 0; it < 300 && b - a > 1e-10; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = ll_log_likelihood(s, std::exp(x2));
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = ll_log_likelihood(s, std::exp(x1));
        }
    }
    return {std::exp(0.5 * (a + b)), EstimatorKind::Mle, false};
}

}  // namespace fishtank
