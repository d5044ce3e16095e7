#pragma once

#include <cassert>
#include <cstdint>

#include "fishtank/oracle.hpp"

namespace fishtank {

// Running-estimate wrapper.  Before inserting, it reads the probability p
// that a fresh element changes the inner sketch; if the state does change,
// the estimate grows by 1/p.  The estimate is unbiased but depends on the
// insertion order, so martingale sketches are not mergeable.
template <class Inner>
class MartingaleSketch {
public:
    explicit MartingaleSketch(Inner inner) : inner_(std::move(inner)) {}

    bool insert(ElementId element) {
        const double p = inner_.transition_probability();
        const bool changed = inner_.insert(element);
        if (changed) {
            assert(p > 0.0 && "state change with zero transition probability");
            estimate_ += 1.0 / p;
        }
        return changed;
    }

    double estimate() const { return estimate_; }
    void set_estimate(double e) { estimate_ = e; }  // deserialization only
    const Inner& inner() const { return inner_; }
    Inner& inner() { return inner_; }

private:
    Inner inner_;
    double estimate_ = 0.0;
};

}  // namespace fishtank
