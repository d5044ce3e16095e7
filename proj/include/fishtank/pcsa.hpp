#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "fishtank/oracle.hpp"
#include "fishtank/params.hpp"

namespace fishtank {

// Immutable per-(params, offsets) tables driving insertion and estimation.
//
// An element hits cell (i, j) independently with probability
// p(i,j) = q^{-(j + r_i)}.  Instead of drawing one coin per cell, insertion
// runs a unit-rate Poisson race over the cells ordered from least to most
// probable (columns descending): cell c occupies a hazard slab of width
// -log(1 - p_c), and a cell is hit iff at least one race point lands in its
// slab.  This reproduces the independent per-cell law exactly while letting
// an insertion stop as soon as the race leaves the columns that still
// contain zeros.
struct PcsaTables {
    SketchParams params;
    std::vector<double> offsets;
    std::vector<double> prob;       // p per cell, row-major (i * W + j)
    std::vector<double> log1m;      // log1p(-p) per cell (0 for certain cells)
    std::vector<uint32_t> order;    // race order: column desc, row asc; uncertain cells only
    std::vector<double> cum;        // cumulative hazard over `order`, size order.size()+1
    std::vector<uint32_t> col_end;  // col_end[j] = #ordered cells in columns >= j, size W+1
    std::vector<uint32_t> certain;  // cells with p ~ 1, hit by every element

    PcsaTables(const SketchParams& p, std::vector<double> offs);
};

class PcsaSketch {
public:
    PcsaSketch(const SketchParams& params, OracleSeed seed);
    PcsaSketch(const SketchParams& params, OracleSeed seed, std::vector<double> offsets);

    // Inserts one element; returns true iff the state changed.  When
    // `flipped` is non-null the indices of newly set cells are appended.
    bool insert(ElementId element, std::vector<uint32_t>* flipped = nullptr);

    // Probability that inserting a fresh element would change the state.
    double transition_probability() const;

    // Componentwise OR; requires identical params, seed and offsets.
    void merge(const PcsaSketch& other);

    bool bit(uint32_t i, uint32_t j) const { return bit_raw(i * params_.w + j); }
    bool bit_raw(uint32_t cell) const {
        return (words_[cell >> 6] >> (cell & 63)) & 1;
    }
    // Sets a cell directly (deserialization, direct sampling); returns true
    // iff it flipped 0 -> 1.
    bool set_cell(uint32_t cell);
    // Clears a cell; rollback support for budgeted wrappers.
    void unset_cell(uint32_t cell);

    bool empty() const { return set_bits_ == 0; }
    bool saturated() const { return set_bits_ == uint64_t(params_.m) * params_.w; }
    uint64_t set_bits() const { return set_bits_; }
    uint32_t first_unfilled_column() const { return first_unfilled_col_; }

    const SketchParams& params() const { return params_; }
    OracleSeed seed() const { return seed_; }
    const std::vector<double>& offsets() const { return tables_->offsets; }
    const PcsaTables& tables() const { return *tables_; }
    const std::vector<uint64_t>& words() const { return words_; }

    // Sum of p over zero cells; used by the likelihood gradient.
    double zero_probability_mass() const { return sum_p_zero_; }

    void clear();
    bool same_state(const PcsaSketch& other) const { return words_ == other.words_; }
    bool compatible(const PcsaSketch& other) const;

private:
    SketchParams params_;
    OracleSeed seed_;
    std::shared_ptr<const PcsaTables> tables_;
    std::vector<uint64_t> words_;
    std::vector<uint32_t> col_zeros_;   // zero cells per column
    uint32_t first_unfilled_col_ = 0;
    uint64_t set_bits_ = 0;
    uint32_t unset_certain_ = 0;
    double sum_log1m_zero_ = 0.0;       // sum of log1p(-p) over uncertain zero cells
    double sum_p_zero_ = 0.0;           // sum of p over all zero cells

    void rebuild_counters();
};

}  // namespace fishtank
