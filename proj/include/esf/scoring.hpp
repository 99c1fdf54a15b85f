#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "esf/grid.hpp"

namespace esf {

enum class ScorerMode { RawPopcount, NormalizedCrossmul };
enum class ScorerVariant { Trace, Incremental };

// Hypothesis-search parameters (J, L, beta, theta_s).
struct HypothesisParams {
    int j_max = 15;       // hypotheses j in [-j_max, +j_max]
    int depth = 16;       // temporal depth L
    int beta = 4;         // minimum in-bounds steps
    int theta_s = 8;      // score threshold, raw-score units in [0, L]
    ScorerMode mode = ScorerMode::RawPopcount;
    bool legacy_trace = false;  // literal h=1..L indexing, for comparison only
    bool audit = false;         // enable datapath bit-width assertions

    // Score counter width in bits: ceil(log2(L+1)).
    int score_width_bits() const;

    // Throws on hard violations; returns false if j_max exceeds the
    // recommended floor(n / L) bound (soft warning).
    bool validate(int n) const;
};

// Score pair for one velocity hypothesis at one pixel: raw coincidence
// count r and in-bounds step count h, with 0 <= r <= h <= L.
struct HypothesisScore {
    int j = 0;
    std::uint8_t r = 0;
    std::uint8_t h = 0;

    bool operator==(const HypothesisScore&) const = default;
};

struct PixelWinner {
    int x0 = 0;
    int j_star = 0;
    std::uint8_t r = 0;
    std::uint8_t h = 0;
};

// Number of in-bounds steps of the canonical trace from x0 with jump j:
// the count of h in [0, L) with 0 <= x0 - j*h < n.
int trace_bound(int n, int depth, int x0, int j);

// Canonical diagonal trace: visits cells (x0 - j*h, slot L-1-h) for
// h = 0..L-1, terminating at the first out-of-bounds pixel. r counts
// occupied cells, h counts in-bounds steps; r is forced to 0 when h < beta.
HypothesisScore trace(const OccupancyGrid& grid, int x0, int j,
                      const HypothesisParams& params);

// One trace per j in [-J, +J], ordered by ascending j.
std::vector<HypothesisScore> score_all(const OccupancyGrid& grid, int x0,
                                       const HypothesisParams& params);

// Raw comparison: higher r wins; on equal r, smaller |j|; on equal r and
// |j|, positive j.
bool beats_raw(const HypothesisScore& a, const HypothesisScore& b);
const HypothesisScore& compare_raw(const HypothesisScore& a, const HypothesisScore& b);

// Division-free normalized comparison: a beats b iff r_a*h_b > r_b*h_a;
// ties fall through to the |j| and sign rules.
bool beats_normalized(const HypothesisScore& a, const HypothesisScore& b);
const HypothesisScore& compare_normalized(const HypothesisScore& a,
                                          const HypothesisScore& b);

// Raw mode: r > theta_s. Normalized mode: r*L > theta_s*h (strict).
bool passes_threshold(const HypothesisScore& s, const HypothesisParams& params);

// Argmax under the configured comparator over scores passing the threshold
// test; nullopt when nothing passes.
std::optional<PixelWinner> select_winner(int x0,
                                         const std::vector<HypothesisScore>& scores,
                                         const HypothesisParams& params);

// Host-side conversion: v = j * 1e6 / delta_t, in px/s.
double jump_to_velocity(int j, std::uint64_t delta_t_us);

// Running score array for the incremental scoring variant:
// n x (2J+1) counters updated once per bin with a read-subtract-add step.
// Stored values carry no beta masking; masking is applied on read.
class ScoreArray {
public:
    ScoreArray(int n, const HypothesisParams& params);

    // Advances the running scores across one bin boundary. Must be called
    // with the grid state *before* the matching shift_insert and the vector
    // being inserted.
    void update(const OccupancyGrid& grid_before_shift, const OccupancyVector& new_vec);

    // Score as the canonical trace would report it on the post-shift grid.
    HypothesisScore read(int x0, int j, const HypothesisParams& params) const;

    std::uint8_t raw(int x0, int j) const { return scores_[index(x0, j)]; }

    void reset();

    int size() const { return n_; }
    int storage_bits() const;  // n * (2J+1) * ceil(log2(L+1))

private:
    std::size_t index(int x0, int j) const {
        return static_cast<std::size_t>(x0) * lanes_ + (j + j_max_);
    }

    int n_;
    int j_max_;
    int depth_;
    int lanes_;
    std::vector<std::uint8_t> scores_;
    std::vector<std::uint8_t> scratch_;
};

}  // namespace esf
