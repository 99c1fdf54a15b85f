#include "esf/scoring.hpp"

#include <bit>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace esf {

namespace {

void audit_fail(const char* what) {
    throw std::logic_error(std::string("datapath audit: ") + what);
}

void audit_score(const HypothesisScore& s, const HypothesisParams& params) {
    if (!params.audit) return;
    if (s.r > s.h) audit_fail("r exceeds h");
    if (s.h > params.depth) audit_fail("h exceeds L");
    const int max_val = (1 << params.score_width_bits()) - 1;
    if (s.r > max_val || s.h > max_val) audit_fail("score exceeds counter width");
}

}  // namespace

int HypothesisParams::score_width_bits() const {
    return std::bit_width(static_cast<unsigned>(depth));
}

bool HypothesisParams::validate(int n) const {
    if (j_max < 1) throw std::invalid_argument("J must be >= 1");
    if (depth < 1 || depth > 64) throw std::invalid_argument("L must be in [1, 64]");
    if (beta < 1 || beta > depth) throw std::invalid_argument("beta must be in [1, L]");
    if (theta_s < 0 || theta_s > depth)
        throw std::invalid_argument("theta_s must be in [0, L]");
    return j_max <= n / depth;
}

int trace_bound(int n, int depth, int x0, int j) {
    if (j == 0) return depth;
    // x0 - j*h stays in [0, n) for h = 0..H-1; the walk is monotone in h.
    const int steps = (j > 0) ? x0 / j : (n - 1 - x0) / (-j);
    return std::min(depth, steps + 1);
}

HypothesisScore trace(const OccupancyGrid& grid, int x0, int j,
                      const HypothesisParams& params) {
    const int n = grid.size();
    const int depth = params.depth;
    if (x0 < 0 || x0 >= n) throw std::out_of_range("trace pixel out of range");

    HypothesisScore s{j, 0, 0};
    if (params.legacy_trace) {
        // Literal printed indexing: h = 1..L reading slot L-h.
        for (int h = 1; h <= depth; ++h) {
            const int x = x0 - j * h;
            if (x < 0 || x >= n) break;
            ++s.h;
            if (grid.read_cell_fast(x, depth - h)) ++s.r;
        }
    } else {
        // Canonical trace ending at the active pixel's current cell.
        for (int h = 0; h < depth; ++h) {
            const int x = x0 - j * h;
            if (x < 0 || x >= n) break;
            ++s.h;
            if (grid.read_cell_fast(x, depth - 1 - h)) ++s.r;
        }
    }
    if (s.h < params.beta) s.r = 0;
    audit_score(s, params);
    return s;
}

std::vector<HypothesisScore> score_all(const OccupancyGrid& grid, int x0,
                                       const HypothesisParams& params) {
    std::vector<HypothesisScore> scores;
    scores.reserve(2 * params.j_max + 1);
    for (int j = -params.j_max; j <= params.j_max; ++j)
        scores.push_back(trace(grid, x0, j, params));
    return scores;
}

namespace {

// Tie chain shared by both comparators: smaller |j| wins, then positive j.
bool beats_by_jump(int ja, int jb) {
    const int ma = std::abs(ja), mb = std::abs(jb);
    if (ma != mb) return ma < mb;
    return ja > jb;
}

}  // namespace

bool beats_raw(const HypothesisScore& a, const HypothesisScore& b) {
    if (a.r != b.r) return a.r > b.r;
    return beats_by_jump(a.j, b.j);
}

const HypothesisScore& compare_raw(const HypothesisScore& a, const HypothesisScore& b) {
    return beats_raw(a, b) ? a : b;
}

bool beats_normalized(const HypothesisScore& a, const HypothesisScore& b) {
    const std::uint16_t pa = static_cast<std::uint16_t>(a.r) * b.h;
    const std::uint16_t pb = static_cast<std::uint16_t>(b.r) * a.h;
    if (pa != pb) return pa > pb;
    return beats_by_jump(a.j, b.j);
}

const HypothesisScore& compare_normalized(const HypothesisScore& a,
                                          const HypothesisScore& b) {
    return beats_normalized(a, b) ? a : b;
}

bool passes_threshold(const HypothesisScore& s, const HypothesisParams& params) {
    if (params.mode == ScorerMode::RawPopcount) return s.r > params.theta_s;
    // r*L is a left shift for power-of-two L; theta_s*h maps to an L-entry LUT.
    const std::uint16_t lhs = static_cast<std::uint16_t>(s.r) * params.depth;
    const std::uint16_t rhs = static_cast<std::uint16_t>(params.theta_s) * s.h;
    if (params.audit) {
        const int limit = 1 << (2 * params.score_width_bits());
        if (lhs >= limit || rhs >= limit) audit_fail("threshold product overflows 2w bits");
    }
    return lhs > rhs;
}

std::optional<PixelWinner> select_winner(int x0,
                                         const std::vector<HypothesisScore>& scores,
                                         const HypothesisParams& params) {
    const bool normalized = params.mode == ScorerMode::NormalizedCrossmul;
    const HypothesisScore* best = nullptr;
    for (const HypothesisScore& s : scores) {
        audit_score(s, params);
        if (!passes_threshold(s, params)) continue;
        if (!best || (normalized ? beats_normalized(s, *best) : beats_raw(s, *best)))
            best = &s;
    }
    if (!best) return std::nullopt;
    return PixelWinner{x0, best->j, best->r, best->h};
}

double jump_to_velocity(int j, std::uint64_t delta_t_us) {
    if (delta_t_us == 0) throw std::invalid_argument("delta_t must be positive");
    return static_cast<double>(j) * 1e6 / static_cast<double>(delta_t_us);
}

ScoreArray::ScoreArray(int n, const HypothesisParams& params)
    : n_(n),
      j_max_(params.j_max),
      depth_(params.depth),
      lanes_(2 * params.j_max + 1),
      scores_(static_cast<std::size_t>(n) * lanes_, 0),
      scratch_(scores_.size(), 0) {
    if (n <= 0) throw std::invalid_argument("score array size must be positive");
}

void ScoreArray::update(const OccupancyGrid& grid_before_shift,
                        const OccupancyVector& new_vec) {
    if (new_vec.size() != n_ || grid_before_shift.size() != n_)
        throw std::invalid_argument("score array dimension mismatch");

    // New trace at x0 extends the previous bin's trace at x0 - j: one cell
    // ages out at depth L (pre-shift slot 0), the new occupancy bit enters.
    for (int x0 = 0; x0 < n_; ++x0) {
        const std::uint8_t entering = new_vec.test(x0) ? 1 : 0;
        for (int j = -j_max_; j <= j_max_; ++j) {
            const int src = x0 - j;
            std::uint8_t value = entering;
            if (src >= 0 && src < n_) {
                value = static_cast<std::uint8_t>(value + scores_[index(src, j)]);
                const int aged = x0 - j * depth_;
                if (aged >= 0 && aged < n_ && grid_before_shift.read_cell_fast(aged, 0))
                    --value;
            }
            scratch_[index(x0, j)] = value;
        }
    }
    scores_.swap(scratch_);
}

HypothesisScore ScoreArray::read(int x0, int j, const HypothesisParams& params) const {
    if (x0 < 0 || x0 >= n_) throw std::out_of_range("score array pixel out of range");
    if (j < -j_max_ || j > j_max_) throw std::out_of_range("hypothesis out of range");
    HypothesisScore s{j, scores_[index(x0, j)],
                      static_cast<std::uint8_t>(trace_bound(n_, depth_, x0, j))};
    if (s.h < params.beta) s.r = 0;
    audit_score(s, params);
    return s;
}

void ScoreArray::reset() {
    std::fill(scores_.begin(), scores_.end(), 0);
}

int ScoreArray::storage_bits() const {
    return n_ * lanes_ * std::bit_width(static_cast<unsigned>(depth_));
}

}  // namespace esf
