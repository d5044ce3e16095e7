#include "fishtank/loglog.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fishtank {

LlSketch::LlSketch(const SketchParams& params, OracleSeed seed)
    : LlSketch(params, seed, make_offsets(params, seed)) {}

LlSketch::LlSketch(const SketchParams& params, OracleSeed seed, std::vector<double> offsets)
    : params_(params), seed_(seed), offsets_(std::move(offsets)) {
    params_.validate();
    if (params_.w > 65535) throw std::invalid_argument("register width exceeds u16 range");
    if (offsets_.size() != params_.m) throw std::invalid_argument("offset vector size != m");
    keep_.resize(params_.m);
    const double lnq = std::log(params_.q);
    for (uint32_t i = 0; i < params_.m; ++i) keep_[i] = std::exp(-offsets_[i] * lnq);
    clear();
}

void LlSketch::clear() {
    regs_.assign(params_.m, 0);
    rebuild_counters();
}

uint16_t LlSketch::candidate(double u, double q, uint32_t w) {
    const double x = -std::log(u) / std::log(q);
    const long c = long(std::ceil(x)) - 1;
    if (c <= 0) return 0;
    return uint16_t(std::min<long>(c, w));
}

double LlSketch::trans_term(uint32_t i) const {
    // log of the probability register i does NOT grow on a fresh element.
    const double grow = keep_[i] * std::exp(-double(regs_[i] + 1) * std::log(params_.q));
    return std::log1p(-grow);
}

void LlSketch::rebuild_counters() {
    sum_log1m_trans_ = 0.0;
    saturated_regs_ = 0;
    for (uint32_t i = 0; i < params_.m; ++i) {
        if (regs_[i] >= params_.w)
            ++saturated_regs_;
        else
            sum_log1m_trans_ += trans_term(i);
    }
}

void LlSketch::set_register(uint32_t i, uint16_t value) {
    if (value > params_.w) throw std::out_of_range("register value exceeds W");
    if (regs_[i] < params_.w) sum_log1m_trans_ -= trans_term(i);
    else --saturated_regs_;
    regs_[i] = value;
    if (regs_[i] < params_.w) sum_log1m_trans_ += trans_term(i);
    else ++saturated_regs_;
}

bool LlSketch::insert(ElementId element) {
    bool changed = false;
    for (uint32_t i = 0; i < params_.m; ++i) {
        if (regs_[i] >= params_.w) continue;
        const double coin = oracle_uniform(seed_, element, purpose::kLlKeepCoin, i);
        if (coin > keep_[i]) continue;
        const double u = oracle_uniform(seed_, element, purpose::kLlValue, i);
        const uint16_t c = candidate(u, params_.q, params_.w);
        if (c > regs_[i]) {
            set_register(i, c);
            changed = true;
        }
    }
    return changed;
}

double LlSketch::transition_probability() const {
    if (saturated_regs_ == params_.m) return 0.0;
    const double p = -std::expm1(sum_log1m_trans_);
    return std::min(1.0, std::max(0.0, p));
}

bool LlSketch::compatible(const LlSketch& other) const {
    return params_ == other.params_ && seed_.value == other.seed_.value &&
           offsets_ == other.offsets_;
}

void LlSketch::merge(const LlSketch& other) {
    if (!compatible(other))
        throw std::invalid_argument("merge requires identical params and seed");
    for (uint32_t i = 0; i < params_.m; ++i)
        if (other.regs_[i] > regs_[i]) regs_[i] = other.regs_[i];
    rebuild_counters();
}

}  // namespace fishtank
