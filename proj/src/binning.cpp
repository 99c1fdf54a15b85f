#include "esf/binning.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace esf {

void BinConfig::validate() const {
    if (delta_t_us == 0) throw std::invalid_argument("delta_t must be positive");
    if (theta_e < 1) throw std::invalid_argument("theta_e must be >= 1");
    if (!(rho_lo > 0 && rho_lo < rho_hi && rho_hi < 1))
        throw std::invalid_argument("density band must satisfy 0 < rho_lo < rho_hi < 1");
    if (delta_t_min_us > delta_t_us || delta_t_us > delta_t_max_us)
        throw std::invalid_argument("delta_t outside [delta_t_min, delta_t_max]");
}

OccupancyVector::OccupancyVector(int n, std::int64_t bin_index)
    : n_(n), bin_index_(bin_index), words_((n + 63) / 64, 0) {
    if (n <= 0) throw std::invalid_argument("occupancy vector size must be positive");
}

int OccupancyVector::popcount() const {
    int total = 0;
    for (std::uint64_t w : words_) total += std::popcount(w);
    return total;
}

double OccupancyVector::density() const {
    return n_ == 0 ? 0.0 : static_cast<double>(popcount()) / n_;
}

AxisAccumulator::AxisAccumulator(int n, Axis axis) : counts_(n, 0), axis_(axis) {
    if (n <= 0) throw std::invalid_argument("accumulator size must be positive");
}

void AxisAccumulator::open_bin(std::uint64_t start, std::uint64_t delta_t_us) {
    bin_start_ = start;
    delta_t_us_ = delta_t_us;
}

void AxisAccumulator::accumulate(const Event& ev) {
    if (!in_bin(ev.t))
        throw std::logic_error("event outside current bin interval");
    const int c = (axis_ == Axis::X) ? ev.x : ev.y;
    if (c < 0 || c >= size()) throw std::out_of_range("event coordinate out of range");
    if (counts_[c] < 255) ++counts_[c];  // saturate, never wrap
}

OccupancyVector AxisAccumulator::close_bin(std::uint32_t theta_e) {
    OccupancyVector vec(size(), bin_index_);
    for (int i = 0; i < size(); ++i) {
        if (counts_[i] >= theta_e) vec.set(i);
        counts_[i] = 0;
    }
    ++bin_index_;
    bin_start_ += delta_t_us_;
    return vec;
}

AdaptResult adapt_bin_duration(const BinConfig& cfg, double density,
                               std::uint32_t bins_since_last_change) {
    AdaptResult res{cfg.delta_t_us, cfg.theta_e, false};
    if (bins_since_last_change < cfg.hold_bins) return res;

    std::uint64_t new_dt = cfg.delta_t_us;
    if (density < cfg.rho_lo) {
        new_dt = std::min(cfg.delta_t_us * 2, cfg.delta_t_max_us);
    } else if (density > cfg.rho_hi) {
        new_dt = std::max(cfg.delta_t_us / 2, cfg.delta_t_min_us);
    }
    if (new_dt == cfg.delta_t_us) return res;

    res.delta_t_us = new_dt;
    const double scale = static_cast<double>(new_dt) / static_cast<double>(cfg.delta_t_us);
    res.theta_e = static_cast<std::uint32_t>(
        std::max<long long>(1, std::llround(cfg.theta_e * scale)));
    res.changed = true;
    return res;
}

}  // namespace esf
