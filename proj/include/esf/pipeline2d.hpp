#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "esf/binning.hpp"
#include "esf/events.hpp"
#include "esf/grid.hpp"
#include "esf/scoring.hpp"

namespace esf {

// Per-pixel winning hypothesis fused across the two axis pipelines.
struct Detection {
    std::int64_t bin_index = 0;
    std::uint64_t t_end_us = 0;  // end of the bin
    int x0 = 0;
    int y_med = 0;
    int jx = 0;
    int jy = 0;
    double vx = 0;  // px/s
    double vy = 0;
    std::uint8_t r = 0;  // x-winner's score pair
    std::uint8_t h = 0;
    bool associated = false;  // false when no y-pixel in Y(x0) produced a winner
};

struct PipelineConfig {
    SensorGeometry geom;
    BinConfig bin;
    HypothesisParams hyp;
    ScorerVariant variant = ScorerVariant::Trace;
    bool enable_y = true;

    void validate() const;
};

// Per-bin mapping from each x-pixel to the sorted set of y-pixels that had
// events at that x. Rebuilt from scratch each bin.
class YAssociationTable {
public:
    void add(int x, int y);
    void clear();
    // Sorted unique y values at x; empty when x saw no events.
    const std::vector<int>& at(int x) const;

private:
    std::map<int, std::vector<int>> sets_;
};

// Median y-association: collects the y-pipeline winners at the y-pixels in
// Y(x0) and returns the lower-median jump plus the median y-coordinate.
// With no y-winners in the set, jy = 0 and associated = false.
struct YAssociation {
    int jy = 0;
    int y_med = 0;
    bool associated = false;
};
YAssociation associate_y(int x0, const YAssociationTable& table,
                         const std::vector<std::optional<PixelWinner>>& y_winners);

// Two independent single-axis pipelines (binning -> grid -> scoring) fused
// into per-pixel 2D detections. Consumes events strictly in order with no
// lookahead.
class Pipeline2D {
public:
    explicit Pipeline2D(PipelineConfig cfg);

    // Feeds one event; closes bins (possibly several empty ones) as the
    // stream crosses bin boundaries and appends any detections to out.
    void push(const Event& ev, std::vector<Detection>& out);

    // Closes the bin containing t_until's predecessor, e.g. at end of
    // stream. The trailing partial bin is dropped (a bin only closes when
    // its full interval has elapsed).
    void flush(std::uint64_t t_until, std::vector<Detection>& out);

    // Processes one bin's worth of events directly (all within the current
    // bin interval) and returns its detections.
    std::vector<Detection> process_bin(std::span<const Event> events);

    const BinConfig& bin_config() const { return cfg_.bin; }
    std::int64_t bins_processed() const { return bins_processed_; }
    double mean_x_density() const;
    const OccupancyGrid& x_grid() const { return grid_x_; }

private:
    void close_current_bin(std::vector<Detection>& out);

    PipelineConfig cfg_;
    AxisAccumulator acc_x_;
    AxisAccumulator acc_y_;
    OccupancyGrid grid_x_;
    OccupancyGrid grid_y_;
    ScoreArray scores_x_;
    ScoreArray scores_y_;
    YAssociationTable y_table_;
    std::uint32_t bins_since_change_ = 0;
    std::int64_t bins_processed_ = 0;
    double density_sum_ = 0;
    bool started_ = false;
};

// CSV with header "bin,t_us,x,y_med,jx,jy,vx_px_s,vy_px_s,R,H,assoc",
// one row per detection. Optional leading '#' comment lines carry the
// resolved configuration.
void write_detections_csv(std::ostream& out, const std::vector<Detection>& detections,
                          const std::vector<std::string>& header_comments = {});
std::vector<Detection> read_detections_csv(std::istream& in);

}  // namespace esf
