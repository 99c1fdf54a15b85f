#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "esf/events.hpp"
#include "esf/pipeline2d.hpp"
#include "esf/scoring.hpp"
#include "esf/synth.hpp"

namespace esf {

// ---------------------------------------------------------------------------
// Brute-force scoring oracle.
//
// Recomputes occupancy per bin directly from raw events and counts diagonal
// coincidences on its own, sharing no code with the grid/scoring modules.
// Any disagreement with those modules is by definition their bug.
// ---------------------------------------------------------------------------

struct OracleInput {
    // Events grouped by bin, oldest first; exactly the last L bins.
    std::vector<std::vector<Event>> bins;
    int n = 0;            // axis length
    char axis = 'x';
    std::uint32_t theta_e = 1;
};

HypothesisScore oracle_score(const OracleInput& input, int x0, int j,
                             const HypothesisParams& params);

std::optional<PixelWinner> oracle_winner(const OracleInput& input, int x0,
                                         const HypothesisParams& params);

// Randomized differential check of the full binning -> grid -> scoring path
// against the oracle, winners compared for every pixel including ties.
struct OracleCheckReport {
    int cases = 0;
    int pixels_checked = 0;
    int mismatches = 0;
    std::string first_mismatch;
};

OracleCheckReport run_oracle_check(int cases, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Directional accuracy against ground-truth segments.
// ---------------------------------------------------------------------------

struct SegmentAccuracy {
    GroundTruthSegment segment;
    double median_predicted_j = 0;
    double accuracy_pct = 0;  // meaningless when n == 0
    int n = 0;
    int n_correct = 0;
};

struct AccuracyReport {
    std::vector<SegmentAccuracy> rows;
    double overall_pct = 0;
    int n_total = 0;
    int n_correct = 0;
    int n_outside = 0;  // detections matching no segment
};

// A detection is assigned to the x-axis segment containing its bin midpoint
// (t_end - delta_t/2); it is correct iff sign(jx) matches the segment's
// expected sign, with zero predictions correct only for zero expectations.
AccuracyReport directional_accuracy(const std::vector<Detection>& detections,
                                    const std::vector<GroundTruthSegment>& segments,
                                    std::uint64_t delta_t_us);

void write_accuracy_report(std::ostream& out, const AccuracyReport& report);

// ---------------------------------------------------------------------------
// (delta_t, theta_e) parameter sweep.
// ---------------------------------------------------------------------------

enum class SweepBand { Green, Yellow, Poor, Red, Grey };

struct SweepCell {
    std::uint64_t delta_t_us = 0;
    std::uint32_t theta_e = 0;
    double mean_density = 0;
    int n = 0;
    std::optional<double> accuracy_pct;  // present iff n >= n_min
    SweepBand band = SweepBand::Grey;
};

// Band legend: with n >= n_min, green >= 90%, yellow 75-90%, poor below;
// with insufficient detections, red when density >= 10%, grey otherwise.
SweepBand classify_cell(int n, int n_min, double density, double accuracy_pct);

struct SweepConfig {
    std::vector<std::uint64_t> delta_t_list;
    std::vector<std::uint32_t> theta_e_list;
    PipelineConfig base;  // adaptation is forced off per cell
    int n_min = 50;
};

std::vector<SweepCell> sweep(const std::vector<Event>& events, const SweepConfig& cfg,
                             const std::vector<GroundTruthSegment>& segments);

void write_sweep_csv(std::ostream& out, const std::vector<SweepCell>& cells);
std::string render_sweep_svg(const std::vector<SweepCell>& cells,
                             const SweepConfig& cfg);

// ---------------------------------------------------------------------------
// Hardware cost / latency model.
// ---------------------------------------------------------------------------

struct CostReport {
    int nx = 0, ny = 0, depth = 0, j_max = 0;
    std::uint64_t clock_hz = 0;
    ScorerVariant variant = ScorerVariant::Trace;

    // Per-axis storage, in bits (x axis; y axis scales by ny/nx).
    long long grid_bits = 0;          // n * L
    long long counter_bits = 0;       // n * 8
    long long accumulator_bits = 0;   // (2J+1) * ceil(log2(L+1))
    long long step_counter_bits = 0;  // (2J+1) * 4, as printed (see note)
    long long axis_total_bits = 0;    // x-axis sum of the above
    long long both_axes_bits = 0;
    long long incremental_extra_bits = 0;  // n * (2J+1) * ceil(log2(L+1))

    int comparator_depth = 0;      // ceil(log2(2J+1))
    int cycles_per_pixel = 0;      // L + depth (trace) or 1 + depth (incremental)
    long long worst_case_cycles = 0;  // cycles_per_pixel * n
    double worst_case_us = 0;

    // The 4-bit step counter cannot represent H = L for L = 16 (5 bits
    // needed); the model reproduces the printed figure and flags it here.
    bool step_counter_width_flagged = false;
};

CostReport cost_model(int nx, int ny, int depth, int j_max, std::uint64_t clock_hz,
                      ScorerVariant variant);

void write_cost_report(std::ostream& out, const CostReport& report);
void write_cost_csv(std::ostream& out, const CostReport& report);

// ---------------------------------------------------------------------------
// Flow-field rendering.
// ---------------------------------------------------------------------------

struct RenderOptions {
    double scale = 4;               // output px per sensor px
    double arrow_px_per_px_s = 0.2; // arrow length in sensor px per px/s of speed
};

// Deterministic SVG: event raster as dots plus one arrow per detection
// anchored at (x0, y_med), hue from atan2(vy, vx) on the HSV wheel, length
// proportional to speed.
std::string render_flow(const std::vector<Event>& frame_events,
                        const std::vector<Detection>& detections,
                        const SensorGeometry& geom, const RenderOptions& opts = {});

}  // namespace esf
