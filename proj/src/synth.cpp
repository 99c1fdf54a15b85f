#include "esf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace esf {

namespace {

struct ObjectState {
    double x, y, angle;
};

ObjectState state_at(const SceneObject& obj, double t) {
    ObjectState s;
    s.x = obj.x0 + obj.vx * t + 0.5 * obj.ax * t * t;
    s.y = obj.y0 + obj.vy * t + 0.5 * obj.ay * t * t;
    s.angle = obj.omega * t;
    return s;
}

double object_radius(const SceneObject& obj) {
    if (const auto* bar = std::get_if<BarShape>(&obj.shape))
        return 0.5 * std::hypot(bar->length, bar->width);
    const auto& bm = std::get<BitmapShape>(obj.shape);
    return 0.5 * std::hypot(static_cast<double>(bm.w), static_cast<double>(bm.h));
}

bool covered(const SceneObject& obj, const ObjectState& s, int px, int py) {
    const double dx = px - s.x;
    const double dy = py - s.y;
    double theta = s.angle;
    if (const auto* bar = std::get_if<BarShape>(&obj.shape)) theta += bar->orientation_rad;
    const double c = std::cos(theta), sn = std::sin(theta);
    const double lx = c * dx + sn * dy;   // into object frame
    const double ly = -sn * dx + c * dy;
    if (const auto* bar = std::get_if<BarShape>(&obj.shape))
        return std::abs(lx) <= bar->length * 0.5 && std::abs(ly) <= bar->width * 0.5;
    const auto& bm = std::get<BitmapShape>(obj.shape);
    const int mx = static_cast<int>(std::lround(lx + bm.w * 0.5 - 0.5));
    const int my = static_cast<int>(std::lround(ly + bm.h * 0.5 - 0.5));
    return bm.solid(mx, my);
}

std::uint64_t pick_step_us(const SceneObject& obj, double duration) {
    const double lin0 = std::hypot(obj.vx, obj.vy);
    const double lin1 = std::hypot(obj.vx + obj.ax * duration, obj.vy + obj.ay * duration);
    const double rot = std::abs(obj.omega) * object_radius(obj);
    const double speed = std::max(lin0, lin1) + rot;
    if (speed <= 0) return static_cast<std::uint64_t>(duration);
    const double step = 0.4 / speed;  // < half a pixel of boundary motion per step
    return static_cast<std::uint64_t>(std::clamp(step, 1.0, duration));
}

void emit_object_events(const SceneObject& obj, const SceneConfig& cfg,
                        std::vector<Event>& out) {
    const int nx = cfg.geom.nx, ny = cfg.geom.ny;
    const double radius = object_radius(obj) + 1.0;
    std::vector<std::uint8_t> prev(static_cast<std::size_t>(nx) * ny, 0);

    bool ever_visible = false;
    const std::uint64_t step = pick_step_us(obj, static_cast<double>(cfg.duration_us));

    auto bbox = [&](const ObjectState& s, int& x_lo, int& x_hi, int& y_lo, int& y_hi) {
        x_lo = std::max(0, static_cast<int>(std::floor(s.x - radius)));
        x_hi = std::min(nx - 1, static_cast<int>(std::ceil(s.x + radius)));
        y_lo = std::max(0, static_cast<int>(std::floor(s.y - radius)));
        y_hi = std::min(ny - 1, static_cast<int>(std::ceil(s.y + radius)));
    };

    ObjectState s0 = state_at(obj, 0);
    {
        int xl, xh, yl, yh;
        bbox(s0, xl, xh, yl, yh);
        for (int y = yl; y <= yh; ++y)
            for (int x = xl; x <= xh; ++x)
                if (covered(obj, s0, x, y)) {
                    prev[static_cast<std::size_t>(y) * nx + x] = 1;
                    ever_visible = true;
                }
    }

    ObjectState s_prev = s0;
    for (std::uint64_t t = step; t <= cfg.duration_us; t += step) {
        ObjectState s = state_at(obj, static_cast<double>(t));
        int xl0, xh0, yl0, yh0, xl1, xh1, yl1, yh1;
        bbox(s_prev, xl0, xh0, yl0, yh0);
        bbox(s, xl1, xh1, yl1, yh1);
        const int xl = std::min(xl0, xl1), xh = std::max(xh0, xh1);
        const int yl = std::min(yl0, yl1), yh = std::max(yh0, yh1);
        for (int y = yl; y <= yh; ++y) {
            for (int x = xl; x <= xh; ++x) {
                const std::size_t idx = static_cast<std::size_t>(y) * nx + x;
                const bool now = covered(obj, s, x, y);
                if (now) ever_visible = true;
                if (now == static_cast<bool>(prev[idx])) continue;
                out.push_back(Event{t, x, y, now ? +1 : -1});  // leading / trailing edge
                prev[idx] = now ? 1 : 0;
            }
        }
        s_prev = s;
    }

    if (!ever_visible)
        throw std::runtime_error("scene object " + std::to_string(obj.id) +
                                 " never intersects the sensor");
}

void append_gt_axis(const SceneObject& obj, const SceneConfig& cfg, char axis,
                    std::vector<GroundTruthSegment>& out) {
    std::vector<GroundTruthSegment> bins;
    for (std::uint64_t t = 0; t < cfg.duration_us; t += cfg.gt_bin_us) {
        const double t_mid = static_cast<double>(t) + 0.5 * cfg.gt_bin_us;
        const double v = (axis == 'x') ? obj.vx + obj.ax * t_mid : obj.vy + obj.ay * t_mid;
        const double j = v * static_cast<double>(cfg.gt_bin_us);
        if (!bins.empty() && std::abs(bins.back().expected_j - j) < 1e-9) {
            bins.back().t_end_us = std::min(t + cfg.gt_bin_us, cfg.duration_us);
        } else {
            bins.push_back(GroundTruthSegment{t, std::min(t + cfg.gt_bin_us, cfg.duration_us),
                                              axis, j, obj.id});
        }
    }
    out.insert(out.end(), bins.begin(), bins.end());
}

}  // namespace

std::vector<Event> add_noise(std::vector<Event> events, const NoiseConfig& noise,
                             const SensorGeometry& geom, std::uint64_t duration_us) {
    if (noise.rate < 0) throw std::invalid_argument("noise rate must be >= 0");
    std::mt19937_64 rng(noise.seed);

    if (noise.jitter_sigma_us > 0) {
        std::normal_distribution<double> jitter(0.0, noise.jitter_sigma_us);
        for (Event& ev : events) {
            const double dt = jitter(rng);
            const double t = static_cast<double>(ev.t) + dt;
            ev.t = t <= 0 ? 0 : static_cast<std::uint64_t>(std::llround(t));
        }
    }

    if (noise.rate > 0 && !events.empty()) {
        const auto n_noise =
            static_cast<std::size_t>(std::ceil(noise.rate * static_cast<double>(events.size())));
        std::uniform_int_distribution<std::uint64_t> t_dist(0, duration_us - 1);
        std::uniform_int_distribution<int> x_dist(0, geom.nx - 1);
        std::uniform_int_distribution<int> y_dist(0, geom.ny - 1);
        std::uniform_int_distribution<int> p_dist(0, 1);
        for (std::size_t i = 0; i < n_noise; ++i) {
            Event ev;
            ev.t = t_dist(rng);
            ev.x = x_dist(rng);
            ev.y = y_dist(rng);
            ev.p = p_dist(rng) ? +1 : -1;
            events.push_back(ev);
        }
    }

    std::stable_sort(events.begin(), events.end(),
                     [](const Event& a, const Event& b) { return a.t < b.t; });
    return events;
}

SceneOutput generate_scene(const SceneConfig& cfg) {
    if (!cfg.geom.valid()) throw std::invalid_argument("invalid scene geometry");
    if (cfg.duration_us == 0) throw std::invalid_argument("scene duration must be positive");
    if (cfg.gt_bin_us == 0) throw std::invalid_argument("gt_bin_us must be positive");

    SceneOutput out;
    for (const SceneObject& obj : cfg.objects) {
        emit_object_events(obj, cfg, out.events);
        append_gt_axis(obj, cfg, 'x', out.segments);
        append_gt_axis(obj, cfg, 'y', out.segments);
    }
    std::stable_sort(out.events.begin(), out.events.end(),
                     [](const Event& a, const Event& b) { return a.t < b.t; });
    out.events = add_noise(std::move(out.events), cfg.noise, cfg.geom, cfg.duration_us);
    return out;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

BitmapShape load_bitmap(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open bitmap file: " + path);
    BitmapShape bm;
    std::string line;
    std::vector<std::string> rows;
    while (std::getline(in, line)) {
        line = trim(line);
        if (!line.empty()) rows.push_back(line);
    }
    if (rows.empty()) throw std::runtime_error("empty bitmap file: " + path);
    bm.h = static_cast<int>(rows.size());
    bm.w = static_cast<int>(rows[0].size());
    bm.mask.assign(static_cast<std::size_t>(bm.w) * bm.h, 0);
    for (int y = 0; y < bm.h; ++y) {
        if (static_cast<int>(rows[y].size()) != bm.w)
            throw std::runtime_error("ragged bitmap rows in " + path);
        for (int x = 0; x < bm.w; ++x)
            bm.mask[static_cast<std::size_t>(y) * bm.w + x] = rows[y][x] != '0';
    }
    return bm;
}

SceneObject parse_object_line(const std::string& value, const std::string& base_dir,
                              int id) {
    std::istringstream in(value);
    std::string kind;
    in >> kind;
    SceneObject obj;
    obj.id = id;
    BarShape bar;
    std::string bitmap_file;

    std::string tok;
    while (in >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("bad object token: " + tok);
        const std::string key = tok.substr(0, eq);
        const double val = std::stod(tok.substr(eq + 1));
        if (key == "width") bar.width = val;
        else if (key == "length") bar.length = val;
        else if (key == "angle_deg") bar.orientation_rad = val * std::acos(-1.0) / 180.0;
        else if (key == "x") obj.x0 = val;
        else if (key == "y") obj.y0 = val;
        else if (key == "vx") obj.vx = val;
        else if (key == "vy") obj.vy = val;
        else if (key == "omega") obj.omega = val;
        else if (key == "ax") obj.ax = val;
        else if (key == "ay") obj.ay = val;
        else if (key == "file") bitmap_file = tok.substr(eq + 1);
        else throw std::runtime_error("unknown object key: " + key);
    }

    if (kind == "bar") {
        obj.shape = bar;
    } else if (kind == "bitmap") {
        if (bitmap_file.empty())
            throw std::runtime_error("bitmap object requires file=...");
        std::filesystem::path p(bitmap_file);
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        obj.shape = load_bitmap(p.string());
    } else {
        throw std::runtime_error("unknown object kind: " + kind);
    }
    return obj;
}

}  // namespace

SceneConfig load_scene_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scene config: " + path);
    const std::string base_dir = std::filesystem::path(path).parent_path().string();

    SceneConfig cfg;
    std::string line;
    int next_id = 0;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("bad scene config line: " + line);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "nx") cfg.geom.nx = std::stoi(value);
        else if (key == "ny") cfg.geom.ny = std::stoi(value);
        else if (key == "duration_us") cfg.duration_us = std::stoull(value);
        else if (key == "gt_bin_us") cfg.gt_bin_us = std::stoull(value);
        else if (key == "noise_rate") cfg.noise.rate = std::stod(value);
        else if (key == "jitter_us") cfg.noise.jitter_sigma_us = std::stod(value);
        else if (key == "seed") cfg.noise.seed = std::stoull(value);
        else if (key == "object")
            cfg.objects.push_back(parse_object_line(value, base_dir, next_id++));
        else throw std::runtime_error("unknown scene config key: " + key);
    }
    return cfg;
}

void write_segments_csv(std::ostream& out,
                        const std::vector<GroundTruthSegment>& segments) {
    out << "t_start_us,t_end_us,axis,expected_j,object_id\n";
    char buf[128];
    for (const GroundTruthSegment& s : segments) {
        std::snprintf(buf, sizeof(buf), "%llu,%llu,%c,%.9g,%d\n",
                      static_cast<unsigned long long>(s.t_start_us),
                      static_cast<unsigned long long>(s.t_end_us), s.axis, s.expected_j,
                      s.object_id);
        out << buf;
    }
}

std::vector<GroundTruthSegment> load_segments_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open segments file: " + path);
    std::string line;
    if (!std::getline(in, line)) return {};
    const bool seconds = line.find("t_start_s,") == 0;
    const bool micros = line.find("t_start_us,") == 0;
    if (!seconds && !micros)
        throw std::runtime_error("unrecognized segment CSV header: " + line);

    std::vector<GroundTruthSegment> out;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        GroundTruthSegment seg;
        char axis = 'x';
        if (seconds) {
            double t0, t1, j;
            if (std::sscanf(line.c_str(), "%lf,%lf,%c,%lf", &t0, &t1, &axis, &j) != 4)
                throw std::runtime_error("malformed segment row: " + line);
            seg.t_start_us = static_cast<std::uint64_t>(std::llround(t0 * 1e6));
            seg.t_end_us = static_cast<std::uint64_t>(std::llround(t1 * 1e6));
            seg.expected_j = j;
        } else {
            unsigned long long t0, t1;
            double j;
            int id = 0;
            const int got =
                std::sscanf(line.c_str(), "%llu,%llu,%c,%lf,%d", &t0, &t1, &axis, &j, &id);
            if (got < 4) throw std::runtime_error("malformed segment row: " + line);
            seg.t_start_us = t0;
            seg.t_end_us = t1;
            seg.expected_j = j;
            seg.object_id = id;
        }
        seg.axis = axis;
        if (seg.t_start_us >= seg.t_end_us)
            throw std::runtime_error("segment with t_start >= t_end: " + line);
        out.push_back(seg);
    }
    return out;
}

}  // namespace esf
