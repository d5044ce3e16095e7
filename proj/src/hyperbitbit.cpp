#include "fishtank/hyperbitbit.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace fishtank {

HbbHash hbb_hash(OracleSeed seed, ElementId element) {
    const uint64_t wj = oracle_word(seed, element, purpose::kHbbIndex, 0);
    const uint64_t wk = oracle_word(seed, element, purpose::kHbbLevel, 0);
    // Trailing-zero level: Pr(k = K) = 2^{-(K+1)}, so an element qualifies
    // at level L (k > L) with probability 2^{-(L+1)}.  The 5.4 estimator
    // constant is calibrated for exactly this qualifying rate.
    const uint32_t k = std::min<uint32_t>(62, uint32_t(std::countr_zero(wk)));
    return {uint32_t(wj & 63), k};
}

namespace {

// Applies one insertion; returns true if a rotation occurred.
bool apply_hash(HyperBitBitState* st, const HbbHash& h) {
    const uint64_t bit = uint64_t(1) << h.j;
    if (h.k > st->level) st->s0 |= bit;
    if (h.k > st->level + 1) st->s1 |= bit;
    bool rotated = false;
    while (std::popcount(st->s0) == 32) {
        ++st->level;
        st->s0 = st->s1;
        st->s1 = 0;
        rotated = true;
    }
    return rotated;
}

}  // namespace

void hbb_insert(HyperBitBitState* state, OracleSeed seed, ElementId element) {
    apply_hash(state, hbb_hash(seed, element));
}

double hbb_estimate(const HyperBitBitState& state) {
    return std::exp2(double(state.level) + 5.4 + double(std::popcount(state.s0)) / 32.0);
}

std::vector<ElementId> gen_sequence_lo(uint64_t lambda) {
    std::vector<ElementId> out;
    out.reserve(lambda);
    for (uint64_t e = 1; e <= lambda; ++e) out.push_back(e);
    return out;
}

std::vector<ElementId> gen_sequence_hi(uint64_t lambda) {
    std::vector<ElementId> out;
    if (lambda == 1) return {1};
    for (uint64_t k = 2; k <= lambda; ++k)
        for (uint64_t e = 1; e <= k; ++e) out.push_back(e);
    return out;
}

namespace {

// Replays the prefix-concatenation stream without touching ids whose bits
// are already settled.  Bits only get set and the level only grows, so an
// id that cannot change the current state stays inert until the next
// rotation; the runner keeps the ids that can still act in a sorted pending
// list and rebuilds it on rotation.  Insertion-for-insertion equivalent to
// the literal stream.
class HiRunner {
public:
    explicit HiRunner(OracleSeed seed) : seed_(seed) { levels_.resize(63); }

    const HyperBitBitState& state() const { return st_; }

    // Processes ids 1..n in order; calls check(distinct) after every state
    // change and stops early if it returns true.
    template <typename F>
    bool pass(uint64_t n, F&& check) {
        materialize(n);
        uint64_t pos = 0;
        while (true) {
            auto it = std::upper_bound(pending_.begin(), pending_.end(), pos);
            if (it == pending_.end() || *it > n) break;
            const uint64_t id = *it;
            pos = id;
            const HbbHash h = hbb_hash(seed_, id);
            if (!relevant(h)) {
                pending_.erase(it);
                continue;
            }
            const bool rotated = apply_hash(&st_, h);
            const uint64_t distinct = std::max(seen_, id);
            if (check(distinct)) return true;
            if (rotated)
                rebuild_pending();
            else
                pending_.erase(std::lower_bound(pending_.begin(), pending_.end(), id));
        }
        seen_ = std::max(seen_, n);
        return false;
    }

private:
    bool relevant(const HbbHash& h) const {
        const uint64_t bit = uint64_t(1) << h.j;
        if (h.k > st_.level && !(st_.s0 & bit)) return true;
        if (h.k > st_.level + 1 && !(st_.s1 & bit)) return true;
        return false;
    }

    void materialize(uint64_t n) {
        for (uint64_t id = materialized_ + 1; id <= n; ++id) {
            const HbbHash h = hbb_hash(seed_, id);
            levels_[h.k].push_back(id);
            if (relevant(h)) pending_.push_back(id);  // ids arrive in order
        }
        materialized_ = std::max(materialized_, n);
    }

    void rebuild_pending() {
        pending_.clear();
        for (uint32_t k = st_.level; k <= 62; ++k)
            for (uint64_t id : levels_[k])
                if (relevant(hbb_hash(seed_, id))) pending_.push_back(id);
        std::sort(pending_.begin(), pending_.end());
    }

    OracleSeed seed_;
    HyperBitBitState st_;
    std::vector<std::vector<uint64_t>> levels_;
    std::vector<uint64_t> pending_;
    uint64_t materialized_ = 0;
    uint64_t seen_ = 0;
};

}  // namespace

HyperBitBitState hbb_run_lo(OracleSeed seed, uint64_t lambda) {
    HyperBitBitState st;
    for (uint64_t e = 1; e <= lambda; ++e) hbb_insert(&st, seed, e);
    return st;
}

HyperBitBitState hbb_run_hi(OracleSeed seed, uint64_t lambda) {
    HiRunner run(seed);
    if (lambda == 1) {
        run.pass(1, [](uint64_t) { return false; });
        return run.state();
    }
    for (uint64_t k = 2; k <= lambda; ++k)
        run.pass(k, [](uint64_t) { return false; });
    return run.state();
}

uint64_t hbb_run_until_lo(OracleSeed seed, uint32_t level, uint32_t hw, uint64_t max_distinct) {
    HyperBitBitState st;
    for (uint64_t e = 1; e <= max_distinct; ++e) {
        hbb_insert(&st, seed, e);
        if (st.level == level && uint32_t(std::popcount(st.s0)) == hw) return e;
    }
    return 0;
}

uint64_t hbb_run_until_hi(OracleSeed seed, uint32_t level, uint32_t hw, uint64_t max_distinct) {
    HiRunner run(seed);
    uint64_t hit = 0;
    auto check = [&](uint64_t distinct) {
        const auto& st = run.state();
        if (st.level == level && uint32_t(std::popcount(st.s0)) == hw) {
            hit = distinct;
            return true;
        }
        return false;
    };
    for (uint64_t k = 2; k <= max_distinct; ++k)
        if (run.pass(k, check)) return hit;
    return 0;
}

}  // namespace fishtank
