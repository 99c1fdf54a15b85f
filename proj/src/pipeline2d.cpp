#include "esf/pipeline2d.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace esf {

void PipelineConfig::validate() const {
    if (!geom.valid()) throw std::invalid_argument("invalid sensor geometry");
    bin.validate();
    hyp.validate(std::min(geom.nx, geom.ny));
}

void YAssociationTable::add(int x, int y) {
    auto& ys = sets_[x];
    auto it = std::lower_bound(ys.begin(), ys.end(), y);
    if (it == ys.end() || *it != y) ys.insert(it, y);
}

void YAssociationTable::clear() { sets_.clear(); }

const std::vector<int>& YAssociationTable::at(int x) const {
    static const std::vector<int> empty;
    auto it = sets_.find(x);
    return it == sets_.end() ? empty : it->second;
}

YAssociation associate_y(int x0, const YAssociationTable& table,
                         const std::vector<std::optional<PixelWinner>>& y_winners) {
    const std::vector<int>& ys = table.at(x0);
    if (ys.empty()) throw std::logic_error("associate_y called with empty Y(x0)");

    YAssociation res;
    res.y_med = ys[(ys.size() - 1) / 2];  // lower median of the sorted set

    std::vector<int> jumps;
    for (int y : ys) {
        if (y < static_cast<int>(y_winners.size()) && y_winners[y])
            jumps.push_back(y_winners[y]->j_star);
    }
    if (jumps.empty()) return res;

    std::sort(jumps.begin(), jumps.end());
    res.jy = jumps[(jumps.size() - 1) / 2];  // lower median
    res.associated = true;
    return res;
}

Pipeline2D::Pipeline2D(PipelineConfig cfg)
    : cfg_(std::move(cfg)),
      acc_x_(cfg_.geom.nx, Axis::X),
      acc_y_(cfg_.geom.ny, Axis::Y),
      grid_x_(cfg_.geom.nx, cfg_.hyp.depth),
      grid_y_(cfg_.geom.ny, cfg_.hyp.depth),
      scores_x_(cfg_.geom.nx, cfg_.hyp),
      scores_y_(cfg_.geom.ny, cfg_.hyp) {
    cfg_.validate();
    acc_x_.open_bin(0, cfg_.bin.delta_t_us);
    acc_y_.open_bin(0, cfg_.bin.delta_t_us);
}

void Pipeline2D::push(const Event& ev, std::vector<Detection>& out) {
    if (ev.t < acc_x_.bin_start())
        throw std::logic_error("event timestamp before current bin start");
    while (!acc_x_.in_bin(ev.t)) close_current_bin(out);
    acc_x_.accumulate(ev);
    acc_y_.accumulate(ev);
    y_table_.add(ev.x, ev.y);
}

void Pipeline2D::flush(std::uint64_t t_until, std::vector<Detection>& out) {
    while (acc_x_.bin_start() + acc_x_.delta_t_us() <= t_until) close_current_bin(out);
}

std::vector<Detection> Pipeline2D::process_bin(std::span<const Event> events) {
    std::vector<Detection> out;
    for (const Event& ev : events) {
        if (!acc_x_.in_bin(ev.t))
            throw std::logic_error("process_bin: event outside current bin interval");
        push(ev, out);
    }
    close_current_bin(out);
    return out;
}

namespace {

std::optional<PixelWinner> winner_at(const OccupancyGrid& grid, const ScoreArray& arr,
                                     ScorerVariant variant, int x0,
                                     const HypothesisParams& params) {
    if (variant == ScorerVariant::Trace)
        return select_winner(x0, score_all(grid, x0, params), params);
    std::vector<HypothesisScore> scores;
    scores.reserve(2 * params.j_max + 1);
    for (int j = -params.j_max; j <= params.j_max; ++j)
        scores.push_back(arr.read(x0, j, params));
    return select_winner(x0, scores, params);
}

}  // namespace

void Pipeline2D::close_current_bin(std::vector<Detection>& out) {
    const std::uint64_t bin_dt = acc_x_.delta_t_us();
    const std::int64_t bin_index = acc_x_.bin_index();
    OccupancyVector vec_x = acc_x_.close_bin(cfg_.bin.theta_e);
    OccupancyVector vec_y = acc_y_.close_bin(cfg_.bin.theta_e);
    const std::uint64_t t_end = acc_x_.bin_start();

    const double density = vec_x.density();
    density_sum_ += density;
    ++bins_processed_;

    if (cfg_.bin.adapt) {
        AdaptResult res = adapt_bin_duration(cfg_.bin, density, bins_since_change_);
        if (res.changed) {
            // Grid columns must not mix bin durations: clear all history,
            // discard the vector binned under the old delta_t, restart warm-up.
            cfg_.bin.delta_t_us = res.delta_t_us;
            cfg_.bin.theta_e = res.theta_e;
            grid_x_.reset();
            grid_y_.reset();
            scores_x_.reset();
            scores_y_.reset();
            bins_since_change_ = 0;
            acc_x_.open_bin(acc_x_.bin_start(), res.delta_t_us);
            acc_y_.open_bin(acc_y_.bin_start(), res.delta_t_us);
            y_table_.clear();
            return;
        }
        ++bins_since_change_;
    }

    acc_x_.open_bin(acc_x_.bin_start(), cfg_.bin.delta_t_us);
    acc_y_.open_bin(acc_y_.bin_start(), cfg_.bin.delta_t_us);

    if (cfg_.variant == ScorerVariant::Incremental) {
        scores_x_.update(grid_x_, vec_x);
        scores_y_.update(grid_y_, vec_y);
    }
    grid_x_.shift_insert(vec_x);
    grid_y_.shift_insert(vec_y);

    if (!grid_x_.warmed_up()) {  // suppress detections until L real bins exist
        y_table_.clear();
        return;
    }

    std::vector<std::optional<PixelWinner>> y_winners(cfg_.geom.ny);
    if (cfg_.enable_y) {
        for (int y = 0; y < cfg_.geom.ny; ++y) {
            if (vec_y.test(y))
                y_winners[y] = winner_at(grid_y_, scores_y_, cfg_.variant, y, cfg_.hyp);
        }
    }

    for (int x = 0; x < cfg_.geom.nx; ++x) {
        if (!vec_x.test(x)) continue;
        auto win = winner_at(grid_x_, scores_x_, cfg_.variant, x, cfg_.hyp);
        if (!win) continue;
        YAssociation assoc = associate_y(x, y_table_, y_winners);
        Detection det;
        det.bin_index = bin_index;
        det.t_end_us = t_end;
        det.x0 = x;
        det.y_med = assoc.y_med;
        det.jx = win->j_star;
        det.jy = assoc.jy;
        det.vx = jump_to_velocity(det.jx, bin_dt);
        det.vy = jump_to_velocity(det.jy, bin_dt);
        det.r = win->r;
        det.h = win->h;
        det.associated = assoc.associated;
        out.push_back(det);
    }
    y_table_.clear();
}

double Pipeline2D::mean_x_density() const {
    return bins_processed_ == 0 ? 0.0 : density_sum_ / bins_processed_;
}

void write_detections_csv(std::ostream& out, const std::vector<Detection>& detections,
                          const std::vector<std::string>& header_comments) {
    for (const std::string& c : header_comments) out << "# " << c << '\n';
    out << "bin,t_us,x,y_med,jx,jy,vx_px_s,vy_px_s,R,H,assoc\n";
    char buf[256];
    for (const Detection& d : detections) {
        std::snprintf(buf, sizeof(buf), "%lld,%llu,%d,%d,%d,%d,%.6g,%.6g,%u,%u,%d\n",
                      static_cast<long long>(d.bin_index),
                      static_cast<unsigned long long>(d.t_end_us), d.x0, d.y_med, d.jx,
                      d.jy, d.vx, d.vy, d.r, d.h, d.associated ? 1 : 0);
        out << buf;
    }
}

std::vector<Detection> read_detections_csv(std::istream& in) {
    std::vector<Detection> out;
    std::string line;
    bool saw_header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!saw_header) {  // header row
            saw_header = true;
            continue;
        }
        Detection d;
        long long bin;
        unsigned long long t;
        unsigned r, h;
        int assoc;
        if (std::sscanf(line.c_str(), "%lld,%llu,%d,%d,%d,%d,%lf,%lf,%u,%u,%d", &bin, &t,
                        &d.x0, &d.y_med, &d.jx, &d.jy, &d.vx, &d.vy, &r, &h,
                        &assoc) != 11)
            throw std::runtime_error("malformed detection CSV row: " + line);
        d.bin_index = bin;
        d.t_end_us = t;
        d.r = static_cast<std::uint8_t>(r);
        d.h = static_cast<std::uint8_t>(h);
        d.associated = assoc != 0;
        out.push_back(d);
    }
    return out;
}

}  // namespace esf
