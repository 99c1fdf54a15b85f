#include "esf/evalbench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace esf {

// --------------------------- oracle ----------------------------------------

namespace {

// Occupancy recomputed by direct counting, no accumulator or grid involved.
std::vector<std::vector<std::uint8_t>> oracle_occupancy(const OracleInput& input) {
    std::vector<std::vector<std::uint8_t>> occ(input.bins.size(),
                                               std::vector<std::uint8_t>(input.n, 0));
    std::vector<std::uint32_t> counts(input.n);
    for (std::size_t b = 0; b < input.bins.size(); ++b) {
        std::fill(counts.begin(), counts.end(), 0);
        for (const Event& ev : input.bins[b]) {
            const int c = input.axis == 'x' ? ev.x : ev.y;
            if (c >= 0 && c < input.n && counts[c] < 255) ++counts[c];
        }
        for (int i = 0; i < input.n; ++i)
            occ[b][i] = counts[i] >= input.theta_e;
    }
    return occ;
}

HypothesisScore oracle_score_on(const std::vector<std::vector<std::uint8_t>>& occ,
                                int n, int x0, int j, const HypothesisParams& params) {
    const int newest = static_cast<int>(occ.size()) - 1;
    HypothesisScore s{j, 0, 0};
    for (int h = 0; h < params.depth; ++h) {
        const int x = x0 - j * h;
        if (x < 0 || x >= n) break;
        ++s.h;
        const int b = newest - h;
        if (b >= 0 && occ[b][x]) ++s.r;
    }
    if (s.h < params.beta) s.r = 0;
    return s;
}

}  // namespace

HypothesisScore oracle_score(const OracleInput& input, int x0, int j,
                             const HypothesisParams& params) {
    return oracle_score_on(oracle_occupancy(input), input.n, x0, j, params);
}

std::optional<PixelWinner> oracle_winner(const OracleInput& input, int x0,
                                         const HypothesisParams& params) {
    const auto occ = oracle_occupancy(input);
    std::optional<HypothesisScore> best;
    for (int j = -params.j_max; j <= params.j_max; ++j) {
        const HypothesisScore s = oracle_score_on(occ, input.n, x0, j, params);

        bool passes;
        if (params.mode == ScorerMode::RawPopcount) {
            passes = s.r > params.theta_s;
        } else {
            // exact rational: r/h > theta_s/L
            passes = static_cast<long long>(s.r) * params.depth >
                     static_cast<long long>(params.theta_s) * s.h;
        }
        if (!passes) continue;

        bool better;
        if (!best) {
            better = true;
        } else {
            long long lhs, rhs;
            if (params.mode == ScorerMode::RawPopcount) {
                lhs = s.r;
                rhs = best->r;
            } else {  // exact rational comparison of r/h via int64 cross products
                lhs = static_cast<long long>(s.r) * best->h;
                rhs = static_cast<long long>(best->r) * s.h;
            }
            if (lhs != rhs) {
                better = lhs > rhs;
            } else if (std::abs(s.j) != std::abs(best->j)) {
                better = std::abs(s.j) < std::abs(best->j);
            } else {
                better = s.j > best->j;
            }
        }
        if (better) best = s;
    }
    if (!best) return std::nullopt;
    return PixelWinner{x0, best->j, best->r, best->h};
}

OracleCheckReport run_oracle_check(int cases, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    OracleCheckReport report;
    report.cases = cases;

    for (int c = 0; c < cases; ++c) {
        const int n = std::uniform_int_distribution<int>(8, 64)(rng);
        HypothesisParams params;
        params.depth = std::uniform_int_distribution<int>(2, 8)(rng);
        params.j_max = std::uniform_int_distribution<int>(1, 4)(rng);
        params.beta = std::uniform_int_distribution<int>(1, params.depth)(rng);
        params.theta_s = std::uniform_int_distribution<int>(0, params.depth)(rng);
        params.mode = std::uniform_int_distribution<int>(0, 1)(rng)
                          ? ScorerMode::NormalizedCrossmul
                          : ScorerMode::RawPopcount;
        const std::uint32_t theta_e = std::uniform_int_distribution<int>(1, 3)(rng);
        const std::uint64_t dt = 1000;

        OracleInput input;
        input.n = n;
        input.theta_e = theta_e;

        AxisAccumulator acc(n, Axis::X);
        OccupancyGrid grid(n, params.depth);
        std::uniform_int_distribution<int> x_dist(0, n - 1);
        std::uniform_int_distribution<int> count_dist(0, 3 * n);
        for (int b = 0; b < params.depth; ++b) {
            acc.open_bin(b * dt, dt);
            std::vector<Event> bin_events;
            const int n_events = count_dist(rng);
            for (int e = 0; e < n_events; ++e)
                bin_events.push_back(Event{b * dt + e % dt, x_dist(rng), 0, +1});
            for (const Event& ev : bin_events) acc.accumulate(ev);
            grid.shift_insert(acc.close_bin(theta_e));
            input.bins.push_back(std::move(bin_events));
        }

        for (int x0 = 0; x0 < n; ++x0) {
            ++report.pixels_checked;
            const auto got = select_winner(x0, score_all(grid, x0, params), params);
            const auto want = oracle_winner(input, x0, params);
            const bool same = (got.has_value() == want.has_value()) &&
                              (!got || (got->j_star == want->j_star && got->r == want->r &&
                                        got->h == want->h));
            if (!same) {
                ++report.mismatches;
                if (report.first_mismatch.empty()) {
                    std::ostringstream msg;
                    msg << "case " << c << " x0=" << x0 << " n=" << n
                        << " L=" << params.depth << " J=" << params.j_max
                        << " beta=" << params.beta << " theta_s=" << params.theta_s;
                    report.first_mismatch = msg.str();
                }
            }
        }
    }
    return report;
}

// --------------------------- directional accuracy --------------------------

namespace {

int sign_of(double v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

double lower_median(std::vector<int> v) {
    std::sort(v.begin(), v.end());
    return v.empty() ? 0.0 : static_cast<double>(v[(v.size() - 1) / 2]);
}

}  // namespace

AccuracyReport directional_accuracy(const std::vector<Detection>& detections,
                                    const std::vector<GroundTruthSegment>& segments,
                                    std::uint64_t delta_t_us) {
    std::vector<GroundTruthSegment> x_segments;
    for (const auto& s : segments)
        if (s.axis == 'x') x_segments.push_back(s);

    AccuracyReport report;
    std::vector<std::vector<int>> per_segment_j(x_segments.size());
    std::vector<int> per_segment_correct(x_segments.size(), 0);

    for (const Detection& d : detections) {
        const std::uint64_t midpoint = d.t_end_us - delta_t_us / 2;
        int seg_idx = -1;
        for (std::size_t i = 0; i < x_segments.size(); ++i) {
            if (midpoint >= x_segments[i].t_start_us && midpoint < x_segments[i].t_end_us) {
                seg_idx = static_cast<int>(i);
                break;
            }
        }
        if (seg_idx < 0) {
            ++report.n_outside;
            continue;
        }
        per_segment_j[seg_idx].push_back(d.jx);
        const bool correct = sign_of(d.jx) == sign_of(x_segments[seg_idx].expected_j);
        if (correct) ++per_segment_correct[seg_idx];
    }

    for (std::size_t i = 0; i < x_segments.size(); ++i) {
        SegmentAccuracy row;
        row.segment = x_segments[i];
        row.n = static_cast<int>(per_segment_j[i].size());
        row.n_correct = per_segment_correct[i];
        row.median_predicted_j = lower_median(per_segment_j[i]);
        row.accuracy_pct = row.n > 0 ? 100.0 * row.n_correct / row.n : 0.0;
        report.rows.push_back(row);
        report.n_total += row.n;
        report.n_correct += row.n_correct;
    }
    report.overall_pct =
        report.n_total > 0 ? 100.0 * report.n_correct / report.n_total : 0.0;
    return report;
}

void write_accuracy_report(std::ostream& out, const AccuracyReport& report) {
    out << "t_start_us,t_end_us,gt_j,median_pred_j,accuracy_pct,n\n";
    char buf[160];
    for (const SegmentAccuracy& row : report.rows) {
        if (row.n > 0)
            std::snprintf(buf, sizeof(buf), "%llu,%llu,%.6g,%.6g,%.1f,%d\n",
                          static_cast<unsigned long long>(row.segment.t_start_us),
                          static_cast<unsigned long long>(row.segment.t_end_us),
                          row.segment.expected_j, row.median_predicted_j,
                          row.accuracy_pct, row.n);
        else
            std::snprintf(buf, sizeof(buf), "%llu,%llu,%.6g,,,0\n",
                          static_cast<unsigned long long>(row.segment.t_start_us),
                          static_cast<unsigned long long>(row.segment.t_end_us),
                          row.segment.expected_j);
        out << buf;
    }
    std::snprintf(buf, sizeof(buf), "# overall %.1f%% (%d/%d), %d outside segments\n",
                  report.overall_pct, report.n_correct, report.n_total,
                  report.n_outside);
    out << buf;
}

// --------------------------- sweep -----------------------------------------

SweepBand classify_cell(int n, int n_min, double density, double accuracy_pct) {
    if (n >= n_min) {
        if (accuracy_pct >= 90.0) return SweepBand::Green;
        if (accuracy_pct >= 75.0) return SweepBand::Yellow;
        return SweepBand::Poor;
    }
    return density >= 0.10 ? SweepBand::Red : SweepBand::Grey;
}

std::vector<SweepCell> sweep(const std::vector<Event>& events, const SweepConfig& cfg,
                             const std::vector<GroundTruthSegment>& segments) {
    std::vector<SweepCell> cells;
    for (std::uint64_t dt : cfg.delta_t_list) {
        for (std::uint32_t theta : cfg.theta_e_list) {
            PipelineConfig pc = cfg.base;
            pc.bin.adapt = false;  // fixed parameters per cell
            pc.bin.delta_t_us = dt;
            pc.bin.delta_t_min_us = std::min(pc.bin.delta_t_min_us, dt);
            pc.bin.delta_t_max_us = std::max(pc.bin.delta_t_max_us, dt);
            pc.bin.theta_e = theta;

            Pipeline2D pipe(pc);
            std::vector<Detection> detections;
            for (const Event& ev : events) pipe.push(ev, detections);
            if (!events.empty()) pipe.flush(events.back().t + 1, detections);

            SweepCell cell;
            cell.delta_t_us = dt;
            cell.theta_e = theta;
            cell.mean_density = pipe.mean_x_density();
            cell.n = static_cast<int>(detections.size());
            const AccuracyReport report = directional_accuracy(detections, segments, dt);
            double acc = report.n_total > 0 ? report.overall_pct : 0.0;
            if (cell.n >= cfg.n_min) cell.accuracy_pct = acc;
            cell.band = classify_cell(cell.n, cfg.n_min, cell.mean_density, acc);
            cells.push_back(cell);
        }
    }
    return cells;
}

namespace {

const char* band_name(SweepBand b) {
    switch (b) {
        case SweepBand::Green: return "green";
        case SweepBand::Yellow: return "yellow";
        case SweepBand::Poor: return "poor";
        case SweepBand::Red: return "red";
        case SweepBand::Grey: return "grey";
    }
    return "?";
}

const char* band_color(SweepBand b) {
    switch (b) {
        case SweepBand::Green: return "#4caf50";
        case SweepBand::Yellow: return "#ffeb3b";
        case SweepBand::Poor: return "#ff7043";
        case SweepBand::Red: return "#e53935";
        case SweepBand::Grey: return "#9e9e9e";
    }
    return "#000000";
}

}  // namespace

void write_sweep_csv(std::ostream& out, const std::vector<SweepCell>& cells) {
    out << "delta_t_us,theta_e,mean_density,n,accuracy_pct,band\n";
    char buf[160];
    for (const SweepCell& c : cells) {
        if (c.accuracy_pct)
            std::snprintf(buf, sizeof(buf), "%llu,%u,%.4f,%d,%.1f,%s\n",
                          static_cast<unsigned long long>(c.delta_t_us), c.theta_e,
                          c.mean_density, c.n, *c.accuracy_pct, band_name(c.band));
        else
            std::snprintf(buf, sizeof(buf), "%llu,%u,%.4f,%d,,%s\n",
                          static_cast<unsigned long long>(c.delta_t_us), c.theta_e,
                          c.mean_density, c.n, band_name(c.band));
        out << buf;
    }
}

std::string render_sweep_svg(const std::vector<SweepCell>& cells,
                             const SweepConfig& cfg) {
    const int cols = static_cast<int>(cfg.delta_t_list.size());
    const int rows = static_cast<int>(cfg.theta_e_list.size());
    const int cw = 110, ch = 64, mx = 90, my = 50;
    const int width = mx + cols * cw + 10, height = my + rows * ch + 10;

    std::ostringstream out;
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\">\n",
                  width, height);
    out << buf << "<style>text{font-family:monospace;font-size:11px;}</style>\n";

    for (int c = 0; c < cols; ++c) {
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%d\" y=\"%d\" text-anchor=\"middle\">dt=%llu</text>\n",
                      mx + c * cw + cw / 2, my - 12,
                      static_cast<unsigned long long>(cfg.delta_t_list[c]));
        out << buf;
    }
    for (int r = 0; r < rows; ++r) {
        std::snprintf(buf, sizeof(buf), "<text x=\"%d\" y=\"%d\">te=%u</text>\n", 8,
                      my + r * ch + ch / 2, cfg.theta_e_list[r]);
        out << buf;
    }

    for (const SweepCell& cell : cells) {
        const auto ci = std::find(cfg.delta_t_list.begin(), cfg.delta_t_list.end(),
                                  cell.delta_t_us) - cfg.delta_t_list.begin();
        const auto ri = std::find(cfg.theta_e_list.begin(), cfg.theta_e_list.end(),
                                  cell.theta_e) - cfg.theta_e_list.begin();
        const int x = mx + static_cast<int>(ci) * cw, y = my + static_cast<int>(ri) * ch;
        std::snprintf(buf, sizeof(buf),
                      "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"%s\" "
                      "stroke=\"black\"/>\n",
                      x, y, cw, ch, band_color(cell.band));
        out << buf;
        if (cell.accuracy_pct)
            std::snprintf(buf, sizeof(buf),
                          "<text x=\"%d\" y=\"%d\">%.1f%%</text>\n", x + 6, y + 18,
                          *cell.accuracy_pct);
        else
            std::snprintf(buf, sizeof(buf), "<text x=\"%d\" y=\"%d\">--</text>\n", x + 6,
                          y + 18);
        out << buf;
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%d\" y=\"%d\">rho=%.2f n=%d</text>\n", x + 6, y + 36,
                      cell.mean_density, cell.n);
        out << buf;
    }
    out << "</svg>\n";
    return out.str();
}

// --------------------------- cost model ------------------------------------

namespace {

int ceil_log2(int v) {
    int bits = 0;
    while ((1 << bits) < v) ++bits;
    return bits;
}

long long axis_storage_bits(int n, int depth, int j_max) {
    const int lanes = 2 * j_max + 1;
    const long long grid = static_cast<long long>(n) * depth;
    const long long counters = static_cast<long long>(n) * 8;
    const long long accum = static_cast<long long>(lanes) * ceil_log2(depth + 1);
    const long long steps = static_cast<long long>(lanes) * 4;  // as printed
    return grid + counters + accum + steps;
}

}  // namespace

CostReport cost_model(int nx, int ny, int depth, int j_max, std::uint64_t clock_hz,
                      ScorerVariant variant) {
    if (nx < 1 || ny < 1 || depth < 1 || j_max < 1 || clock_hz < 1)
        throw std::invalid_argument("cost model parameters must be >= 1");

    CostReport r;
    r.nx = nx;
    r.ny = ny;
    r.depth = depth;
    r.j_max = j_max;
    r.clock_hz = clock_hz;
    r.variant = variant;

    const int lanes = 2 * j_max + 1;
    const int score_w = ceil_log2(depth + 1);
    r.grid_bits = static_cast<long long>(nx) * depth;
    r.counter_bits = static_cast<long long>(nx) * 8;
    r.accumulator_bits = static_cast<long long>(lanes) * score_w;
    r.step_counter_bits = static_cast<long long>(lanes) * 4;
    r.axis_total_bits = axis_storage_bits(nx, depth, j_max);
    r.both_axes_bits = axis_storage_bits(nx, depth, j_max) + axis_storage_bits(ny, depth, j_max);
    r.incremental_extra_bits = static_cast<long long>(nx) * lanes * score_w;

    r.comparator_depth = ceil_log2(lanes);
    r.cycles_per_pixel = (variant == ScorerVariant::Trace ? depth : 1) + r.comparator_depth;
    r.worst_case_cycles = static_cast<long long>(r.cycles_per_pixel) * nx;
    r.worst_case_us =
        1e6 * static_cast<double>(r.worst_case_cycles) / static_cast<double>(clock_hz);

    r.step_counter_width_flagged = ceil_log2(depth + 1) > 4;
    return r;
}

void write_cost_report(std::ostream& out, const CostReport& r) {
    char buf[256];
    out << "core datapath storage (x axis, N=" << r.nx << ", L=" << r.depth
        << ", J=" << r.j_max << ")\n";
    std::snprintf(buf, sizeof(buf), "  occupancy grid      %8lld bits\n", r.grid_bits);
    out << buf;
    std::snprintf(buf, sizeof(buf), "  event counters      %8lld bits\n", r.counter_bits);
    out << buf;
    std::snprintf(buf, sizeof(buf), "  score accumulators  %8lld bits\n",
                  r.accumulator_bits);
    out << buf;
    std::snprintf(buf, sizeof(buf), "  step counters       %8lld bits\n",
                  r.step_counter_bits);
    out << buf;
    std::snprintf(buf, sizeof(buf), "  total (one axis)    %8lld bits\n",
                  r.axis_total_bits);
    out << buf;
    std::snprintf(buf, sizeof(buf), "  total (both axes)   %8lld bits\n",
                  r.both_axes_bits);
    out << buf;
    if (r.variant == ScorerVariant::Incremental) {
        std::snprintf(buf, sizeof(buf), "  score array extra   %8lld bits\n",
                      r.incremental_extra_bits);
        out << buf;
    }
    out << "latency (" << (r.variant == ScorerVariant::Trace ? "trace" : "incremental")
        << " variant)\n";
    std::snprintf(buf, sizeof(buf), "  comparator depth    %8d stages\n",
                  r.comparator_depth);
    out << buf;
    std::snprintf(buf, sizeof(buf), "  cycles per pixel    %8d\n", r.cycles_per_pixel);
    out << buf;
    std::snprintf(buf, sizeof(buf), "  worst-case cycles   %8lld (%.1f us at %llu Hz)\n",
                  r.worst_case_cycles, r.worst_case_us,
                  static_cast<unsigned long long>(r.clock_hz));
    out << buf;
    if (r.step_counter_width_flagged)
        out << "note: 4-bit step counters cannot represent H = L (needs "
            << ceil_log2(r.depth + 1) << " bits); figure kept as printed\n";
}

void write_cost_csv(std::ostream& out, const CostReport& r) {
    out << "component,value\n"
        << "grid_bits," << r.grid_bits << "\n"
        << "counter_bits," << r.counter_bits << "\n"
        << "accumulator_bits," << r.accumulator_bits << "\n"
        << "step_counter_bits," << r.step_counter_bits << "\n"
        << "axis_total_bits," << r.axis_total_bits << "\n"
        << "both_axes_bits," << r.both_axes_bits << "\n"
        << "incremental_extra_bits," << r.incremental_extra_bits << "\n"
        << "comparator_depth," << r.comparator_depth << "\n"
        << "cycles_per_pixel," << r.cycles_per_pixel << "\n"
        << "worst_case_cycles," << r.worst_case_cycles << "\n"
        << "worst_case_us," << r.worst_case_us << "\n"
        << "step_counter_width_flagged," << (r.step_counter_width_flagged ? 1 : 0)
        << "\n";
}

// --------------------------- flow rendering --------------------------------

namespace {

void hsv_to_rgb(double h_deg, double s, double v, int& r, int& g, int& b) {
    const double c = v * s;
    const double hp = std::fmod(h_deg < 0 ? h_deg + 360.0 : h_deg, 360.0) / 60.0;
    const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    double rf = 0, gf = 0, bf = 0;
    if (hp < 1) { rf = c; gf = x; }
    else if (hp < 2) { rf = x; gf = c; }
    else if (hp < 3) { gf = c; bf = x; }
    else if (hp < 4) { gf = x; bf = c; }
    else if (hp < 5) { rf = x; bf = c; }
    else { rf = c; bf = x; }
    const double m = v - c;
    r = static_cast<int>(std::lround((rf + m) * 255));
    g = static_cast<int>(std::lround((gf + m) * 255));
    b = static_cast<int>(std::lround((bf + m) * 255));
}

}  // namespace

std::string render_flow(const std::vector<Event>& frame_events,
                        const std::vector<Detection>& detections,
                        const SensorGeometry& geom, const RenderOptions& opts) {
    const double s = opts.scale;
    const int width = static_cast<int>(geom.nx * s);
    const int height = static_cast<int>(geom.ny * s);

    std::ostringstream out;
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\">\n"
                  "<rect width=\"%d\" height=\"%d\" fill=\"#101010\"/>\n",
                  width, height, width, height);
    out << buf;

    for (const Event& ev : frame_events) {
        std::snprintf(buf, sizeof(buf),
                      "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"%.1f\" fill=\"#707070\"/>\n",
                      (ev.x + 0.5) * s, (ev.y + 0.5) * s, 0.3 * s);
        out << buf;
    }

    for (const Detection& d : detections) {
        const double speed = std::hypot(d.vx, d.vy);
        const double hue = std::atan2(d.vy, d.vx) * 180.0 / std::acos(-1.0);
        int r, g, b;
        hsv_to_rgb(hue, 1.0, 1.0, r, g, b);
        const double x0 = (d.x0 + 0.5) * s, y0 = (d.y_med + 0.5) * s;
        const double len = speed * opts.arrow_px_per_px_s * s;
        const double ux = speed > 0 ? d.vx / speed : 0, uy = speed > 0 ? d.vy / speed : 0;
        const double x1 = x0 + ux * len, y1 = y0 + uy * len;
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
                      "stroke=\"rgb(%d,%d,%d)\" stroke-width=\"%.2f\"/>\n",
                      x0, y0, x1, y1, r, g, b, 0.4 * s);
        out << buf;
        // arrowhead: two short strokes at +-150 degrees from the shaft
        const double head = 0.8 * s;
        for (double a : {2.618, -2.618}) {
            const double hx = x1 + (ux * std::cos(a) - uy * std::sin(a)) * head;
            const double hy = y1 + (ux * std::sin(a) + uy * std::cos(a)) * head;
            std::snprintf(buf, sizeof(buf),
                          "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
                          "stroke=\"rgb(%d,%d,%d)\" stroke-width=\"%.2f\"/>\n",
                          x1, y1, hx, hy, r, g, b, 0.4 * s);
            out << buf;
        }
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace esf
