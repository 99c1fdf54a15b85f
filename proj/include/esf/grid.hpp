#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "esf/binning.hpp"

namespace esf {

// N x L single-bit occupancy history with shift-register update semantics.
//
// Layout: one L-bit word per pixel (L <= 64). Slot L-1 is the newest bin;
// slot 0 the oldest. shift_insert shifts every pixel word right by one and
// writes the new bit at position L-1, so read_cell(x, l) is a single word
// probe and a hypothesis trace is a strided gather across pixel words.
class OccupancyGrid {
public:
    OccupancyGrid(int n, int depth);

    int size() const { return n_; }
    int depth() const { return depth_; }

    // Number of slots populated since the last reset, capped at depth.
    int filled() const { return filled_; }
    bool warmed_up() const { return filled_ >= depth_; }

    // Ages every slot by one and writes vec into slot L-1. The oldest slot's
    // contents are discarded.
    void shift_insert(const OccupancyVector& vec);

    bool read_cell(int x, int slot) const;

    // Bounds-unchecked read; callers guarantee 0 <= x < n, 0 <= slot < depth.
    bool read_cell_fast(int x, int slot) const {
        return (cols_[x] >> slot) & 1u;
    }

    void reset();

    // L rows of N '0'/'1' characters, oldest slot first.
    std::string dump() const;

private:
    int n_;
    int depth_;
    int filled_ = 0;
    std::vector<std::uint64_t> cols_;  // per-pixel L-bit history words
};

}  // namespace esf
