#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace esf {

// Sensor pixel dimensions. Defaults match a DAVIS240C.
struct SensorGeometry {
    int nx = 240;
    int ny = 180;

    bool valid() const { return nx > 0 && ny > 0; }
};

// One camera event. Timestamps are integer microseconds; polarity is -1 or +1.
struct Event {
    std::uint64_t t = 0;
    int x = 0;
    int y = 0;
    int p = +1;

    bool operator==(const Event&) const = default;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line_no, const std::string& what)
        : std::runtime_error("line " + std::to_string(line_no) + ": " + what),
          line_no_(line_no) {}
    std::size_t line_no() const { return line_no_; }

private:
    std::size_t line_no_;
};

// Parses one line of the RPG text format: "t x y p" with t in decimal
// seconds and p in {0,1}. Seconds are converted to integer microseconds,
// rounded to nearest; p=0 maps to -1 and p=1 to +1.
Event parse_event_line(std::string_view line, const SensorGeometry& geom,
                       std::size_t line_no = 0);

// Formats an event back into the RPG text format (microsecond precision).
std::string format_event_line(const Event& ev);

// Streams events from a text source one at a time, rejecting the stream at
// the first strict timestamp regression. Equal timestamps are allowed.
class EventStream {
public:
    EventStream(std::istream& in, SensorGeometry geom);

    // Returns the next event, or nullopt at end of input.
    std::optional<Event> next();

    std::size_t line_no() const { return line_no_; }

private:
    std::istream& in_;
    SensorGeometry geom_;
    std::size_t line_no_ = 0;
    bool have_prev_ = false;
    std::uint64_t prev_t_ = 0;
};

// Reads a whole RPG-format file into memory.
std::vector<Event> read_events(const std::string& path, const SensorGeometry& geom);

// Writes events in the RPG text format.
void write_events(std::ostream& out, const std::vector<Event>& events);

// Checks an in-memory sequence for ordering and bounds; throws on violation.
void validate_stream(const std::vector<Event>& events, const SensorGeometry& geom);

}  // namespace esf
