#pragma once

#include <cstdint>
#include <vector>

#include "esf/events.hpp"

namespace esf {

// Time-bin configuration plus the density-feedback adaptation band.
struct BinConfig {
    std::uint64_t delta_t_us = 40000;  // bin duration
    std::uint32_t theta_e = 80;        // event count threshold
    double rho_lo = 0.10;              // density band lower bound
    double rho_hi = 0.40;              // density band upper bound
    std::uint64_t delta_t_min_us = 1000;
    std::uint64_t delta_t_max_us = 200000;
    std::uint32_t hold_bins = 16;      // adaptation hold period
    bool adapt = false;

    void validate() const;
};

// 1-bit-per-pixel occupancy for one axis in one time bin, bit-packed.
class OccupancyVector {
public:
    OccupancyVector() = default;
    OccupancyVector(int n, std::int64_t bin_index = 0);

    int size() const { return n_; }
    std::int64_t bin_index() const { return bin_index_; }

    bool test(int i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
    void set(int i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }

    int popcount() const;
    double density() const;  // popcount / n

    bool operator==(const OccupancyVector&) const = default;

private:
    int n_ = 0;
    std::int64_t bin_index_ = 0;
    std::vector<std::uint64_t> words_;
};

enum class Axis { X, Y };

// Per-pixel saturating 8-bit event counters for one axis of one bin.
// Polarity and the orthogonal coordinate are collapsed.
class AxisAccumulator {
public:
    AxisAccumulator(int n, Axis axis);

    // Starts a new bin interval [start, start + delta_t).
    void open_bin(std::uint64_t start, std::uint64_t delta_t_us);

    bool in_bin(std::uint64_t t) const {
        return t >= bin_start_ && t < bin_start_ + delta_t_us_;
    }

    // Increments the counter at the event's axis coordinate, saturating at 255.
    // The event must fall inside the current bin interval.
    void accumulate(const Event& ev);

    // Thresholds the counters into an occupancy vector, resets them, and
    // advances the bin index. Bit x is set iff counts[x] >= theta_e.
    OccupancyVector close_bin(std::uint32_t theta_e);

    int size() const { return static_cast<int>(counts_.size()); }
    std::int64_t bin_index() const { return bin_index_; }
    std::uint64_t bin_start() const { return bin_start_; }
    std::uint64_t delta_t_us() const { return delta_t_us_; }
    std::uint8_t count(int i) const { return counts_[i]; }
    void set_count(int i, std::uint8_t c) { counts_[i] = c; }

private:
    std::vector<std::uint8_t> counts_;
    Axis axis_;
    std::int64_t bin_index_ = 0;
    std::uint64_t bin_start_ = 0;
    std::uint64_t delta_t_us_ = 0;
};

inline double occupancy_density(const OccupancyVector& vec) { return vec.density(); }

struct AdaptResult {
    std::uint64_t delta_t_us;
    std::uint32_t theta_e;
    bool changed;
};

// Density-feedback controller: doubles delta_t when density is below the band,
// halves it when above, clamped to [delta_t_min, delta_t_max] and frozen
// during the hold period. theta_e co-scales with delta_t (rounded, minimum 1).
AdaptResult adapt_bin_duration(const BinConfig& cfg, double density,
                               std::uint32_t bins_since_last_change);

}  // namespace esf
