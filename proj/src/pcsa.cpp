#include "fishtank/pcsa.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fishtank {

namespace {
constexpr double kCertainThreshold = 1.0 - 1e-12;
}

PcsaTables::PcsaTables(const SketchParams& p, std::vector<double> offs)
    : params(p), offsets(std::move(offs)) {
    params.validate();
    if (offsets.size() != params.m) throw std::invalid_argument("offset vector size != m");
    const size_t n = size_t(params.m) * params.w;
    prob.resize(n);
    log1m.assign(n, 0.0);
    const double lnq = std::log(params.q);
    for (uint32_t i = 0; i < params.m; ++i)
        for (uint32_t j = 0; j < params.w; ++j)
            prob[size_t(i) * params.w + j] = std::exp(-(double(j) + offsets[i]) * lnq);

    col_end.assign(params.w + 1, 0);
    for (uint32_t j = params.w; j-- > 0;) {
        for (uint32_t i = 0; i < params.m; ++i) {
            const uint32_t cell = i * params.w + j;
            if (prob[cell] >= kCertainThreshold) {
                certain.push_back(cell);
            } else {
                order.push_back(cell);
                log1m[cell] = std::log1p(-prob[cell]);
            }
        }
        col_end[j] = uint32_t(order.size());
    }
    // col_end[j] counts ordered cells in columns >= j; col_end[w] = 0.
    cum.resize(order.size() + 1);
    cum[0] = 0.0;
    for (size_t k = 0; k < order.size(); ++k) cum[k + 1] = cum[k] - log1m[order[k]];
}

PcsaSketch::PcsaSketch(const SketchParams& params, OracleSeed seed)
    : PcsaSketch(params, seed, make_offsets(params, seed)) {}

PcsaSketch::PcsaSketch(const SketchParams& params, OracleSeed seed, std::vector<double> offsets)
    : params_(params),
      seed_(seed),
      tables_(std::make_shared<const PcsaTables>(params, std::move(offsets))) {
    clear();
}

void PcsaSketch::clear() {
    const size_t n = size_t(params_.m) * params_.w;
    words_.assign((n + 63) / 64, 0);
    rebuild_counters();
}

void PcsaSketch::rebuild_counters() {
    col_zeros_.assign(params_.w, 0);
    set_bits_ = 0;
    unset_certain_ = 0;
    sum_log1m_zero_ = 0.0;
    sum_p_zero_ = 0.0;
    const auto& t = *tables_;
    for (uint32_t i = 0; i < params_.m; ++i) {
        for (uint32_t j = 0; j < params_.w; ++j) {
            const uint32_t cell = i * params_.w + j;
            if (bit_raw(cell)) {
                ++set_bits_;
            } else {
                ++col_zeros_[j];
                sum_p_zero_ += t.prob[cell];
                if (t.prob[cell] >= kCertainThreshold) {
                    ++unset_certain_;
                } else {
                    sum_log1m_zero_ += t.log1m[cell];
                }
            }
        }
    }
    first_unfilled_col_ = 0;
    while (first_unfilled_col_ < params_.w && col_zeros_[first_unfilled_col_] == 0)
        ++first_unfilled_col_;
}

bool PcsaSketch::set_cell(uint32_t cell) {
    const uint64_t mask = uint64_t(1) << (cell & 63);
    if (words_[cell >> 6] & mask) return false;
    words_[cell >> 6] |= mask;
    ++set_bits_;
    const auto& t = *tables_;
    const uint32_t j = cell % params_.w;
    --col_zeros_[j];
    sum_p_zero_ -= t.prob[cell];
    if (t.prob[cell] >= kCertainThreshold) {
        --unset_certain_;
    } else {
        sum_log1m_zero_ -= t.log1m[cell];
    }
    while (first_unfilled_col_ < params_.w && col_zeros_[first_unfilled_col_] == 0)
        ++first_unfilled_col_;
    return true;
}

void PcsaSketch::unset_cell(uint32_t cell) {
    const uint64_t mask = uint64_t(1) << (cell & 63);
    if (!(words_[cell >> 6] & mask)) return;
    words_[cell >> 6] &= ~mask;
    --set_bits_;
    const auto& t = *tables_;
    const uint32_t j = cell % params_.w;
    ++col_zeros_[j];
    sum_p_zero_ += t.prob[cell];
    if (t.prob[cell] >= kCertainThreshold) {
        ++unset_certain_;
    } else {
        sum_log1m_zero_ += t.log1m[cell];
    }
    if (j < first_unfilled_col_) first_unfilled_col_ = j;
}

bool PcsaSketch::insert(ElementId element, std::vector<uint32_t>* flipped) {
    const auto& t = *tables_;
    bool changed = false;
    auto apply = [&](uint32_t cell) {
        if (set_cell(cell)) {
            changed = true;
            if (flipped) flipped->push_back(cell);
        }
    };
    if (unset_certain_ > 0)
        for (uint32_t cell : t.certain) apply(cell);

    // Race points below `limit` fall in columns that still contain zeros;
    // everything past it lands on already-set cells and can be skipped.
    const uint32_t jstop = std::min(first_unfilled_col_, params_.w);
    const size_t limit_idx = t.col_end[jstop];
    const double limit = t.cum[limit_idx];
    double x = 0.0;
    uint64_t k = 0;
    while (true) {
        x += oracle_exponential(seed_, element, purpose::kPcsaCells, k);
        ++k;
        if (x >= limit) break;
        const auto it = std::upper_bound(t.cum.begin(), t.cum.begin() + limit_idx + 1, x);
        const size_t idx = size_t(it - t.cum.begin()) - 1;
        apply(t.order[idx]);
    }
    return changed;
}

double PcsaSketch::transition_probability() const {
    if (set_bits_ == uint64_t(params_.m) * params_.w) return 0.0;
    if (unset_certain_ > 0) return 1.0;
    const double p = -std::expm1(sum_log1m_zero_);
    return std::min(1.0, std::max(0.0, p));
}

bool PcsaSketch::compatible(const PcsaSketch& other) const {
    return params_ == other.params_ && seed_.value == other.seed_.value &&
           tables_->offsets == other.tables_->offsets;
}

void PcsaSketch::merge(const PcsaSketch& other) {
    if (!compatible(other))
        throw std::invalid_argument("merge requires identical params and seed");
    for (size_t w = 0; w < words_.size(); ++w) words_[w] |= other.words_[w];
    rebuild_counters();
}

}  // namespace fishtank
