#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "esf/events.hpp"

namespace esf {

// Rectangle centered on the object position; orientation 0 points the
// length axis along +x, so a bar with orientation pi/2 is vertical.
struct BarShape {
    double width = 4;
    double length = 120;
    double orientation_rad = 0;
};

// Pixel mask placed with its center at the object position; rotated by the
// object's orientation around the mask center.
struct BitmapShape {
    int w = 0;
    int h = 0;
    std::vector<std::uint8_t> mask;  // row-major, nonzero = solid

    bool solid(int px, int py) const {
        return px >= 0 && px < w && py >= 0 && py < h && mask[py * w + px];
    }
};

struct SceneObject {
    std::variant<BarShape, BitmapShape> shape;
    double x0 = 0, y0 = 0;        // sub-pixel position at t = 0
    double vx = 0, vy = 0;        // px/us
    double omega = 0;             // rad/us
    double ax = 0, ay = 0;        // px/us^2
    int id = 0;
};

struct NoiseConfig {
    double rate = 0;              // noise events as a fraction of signal events
    double jitter_sigma_us = 0;   // Gaussian timestamp jitter
    std::uint64_t seed = 0;
};

// Piecewise-constant expected jump along one axis for one object.
struct GroundTruthSegment {
    std::uint64_t t_start_us = 0;
    std::uint64_t t_end_us = 0;
    char axis = 'x';
    double expected_j = 0;  // px/bin, may be fractional
    int object_id = 0;
};

struct SceneConfig {
    SensorGeometry geom;
    std::uint64_t duration_us = 1000000;
    std::uint64_t gt_bin_us = 40000;  // bin duration used to express GT jumps
    std::vector<SceneObject> objects;
    NoiseConfig noise;
};

struct SceneOutput {
    std::vector<Event> events;
    std::vector<GroundTruthSegment> segments;
};

// Advances objects at sub-pixel resolution and emits one event per pixel
// whose coverage changes: newly covered pixels produce +1 (leading edge),
// newly uncovered -1 (trailing edge). Jittered, noise-injected, re-sorted;
// bit-reproducible for a fixed seed.
SceneOutput generate_scene(const SceneConfig& cfg);

// Jitter + uniform noise injection on an existing stream, exposed so
// recorded streams can be stress-tested.
std::vector<Event> add_noise(std::vector<Event> events, const NoiseConfig& noise,
                             const SensorGeometry& geom, std::uint64_t duration_us);

// Scene config file: "key = value" lines plus one "object = ..." line per
// object (see README for the grammar).
SceneConfig load_scene_config(const std::string& path);

// Ground truth CSV: "t_start_us,t_end_us,axis,expected_j,object_id".
void write_segments_csv(std::ostream& out, const std::vector<GroundTruthSegment>& segments);

// Accepts both the synth format above and the manual-track format
// "t_start_s,t_end_s,axis,expected_j" (seconds, converted on load).
std::vector<GroundTruthSegment> load_segments_csv(const std::string& path);

}  // namespace esf
