#include "esf/events.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

namespace esf {

namespace {

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
        std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
        if (i > start) out.push_back(s.substr(start, i - start));
    }
    return out;
}

int parse_int_field(std::string_view field, const char* name, std::size_t line_no) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        throw ParseError(line_no, std::string("non-numeric ") + name + " field '" +
                                      std::string(field) + "'");
    return value;
}

double parse_double_field(std::string_view field, const char* name, std::size_t line_no) {
    double value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        throw ParseError(line_no, std::string("non-numeric ") + name + " field '" +
                                      std::string(field) + "'");
    return value;
}

}  // namespace

Event parse_event_line(std::string_view line, const SensorGeometry& geom,
                       std::size_t line_no) {
    auto fields = split_ws(line);
    if (fields.size() != 4)
        throw ParseError(line_no, "expected 4 fields, got " + std::to_string(fields.size()));

    const double t_sec = parse_double_field(fields[0], "timestamp", line_no);
    if (t_sec < 0 || !std::isfinite(t_sec))
        throw ParseError(line_no, "negative or non-finite timestamp");

    Event ev;
    ev.t = static_cast<std::uint64_t>(std::llround(t_sec * 1e6));
    ev.x = parse_int_field(fields[1], "x", line_no);
    ev.y = parse_int_field(fields[2], "y", line_no);
    const int p = parse_int_field(fields[3], "p", line_no);

    if (ev.x < 0 || ev.x >= geom.nx)
        throw ParseError(line_no, "x out of bounds: " + std::to_string(ev.x));
    if (ev.y < 0 || ev.y >= geom.ny)
        throw ParseError(line_no, "y out of bounds: " + std::to_string(ev.y));
    if (p != 0 && p != 1)
        throw ParseError(line_no, "polarity must be 0 or 1, got " + std::to_string(p));
    ev.p = (p == 0) ? -1 : +1;
    return ev;
}

std::string format_event_line(const Event& ev) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%llu.%06llu %d %d %d",
                  static_cast<unsigned long long>(ev.t / 1000000),
                  static_cast<unsigned long long>(ev.t % 1000000), ev.x, ev.y,
                  ev.p > 0 ? 1 : 0);
    return buf;
}

EventStream::EventStream(std::istream& in, SensorGeometry geom)
    : in_(in), geom_(geom) {}

std::optional<Event> EventStream::next() {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_no_;
        bool blank = true;
        for (char c : line)
            if (c != ' ' && c != '\t' && c != '\r') { blank = false; break; }
        if (blank) continue;

        Event ev = parse_event_line(line, geom_, line_no_);
        if (have_prev_ && ev.t < prev_t_)
            throw ParseError(line_no_, "timestamp regression: " + std::to_string(ev.t) +
                                           " < " + std::to_string(prev_t_));
        have_prev_ = true;
        prev_t_ = ev.t;
        return ev;
    }
    if (in_.bad()) throw std::runtime_error("I/O failure while reading event stream");
    return std::nullopt;
}

std::vector<Event> read_events(const std::string& path, const SensorGeometry& geom) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open event file: " + path);
    EventStream stream(in, geom);
    std::vector<Event> out;
    while (auto ev = stream.next()) out.push_back(*ev);
    return out;
}

void write_events(std::ostream& out, const std::vector<Event>& events) {
    for (const Event& ev : events) out << format_event_line(ev) << '\n';
}

void validate_stream(const std::vector<Event>& events, const SensorGeometry& geom) {
    std::uint64_t prev = 0;
    bool have_prev = false;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const Event& ev = events[i];
        if (ev.x < 0 || ev.x >= geom.nx || ev.y < 0 || ev.y >= geom.ny)
            throw std::runtime_error("event " + std::to_string(i) + " out of bounds");
        if (have_prev && ev.t < prev)
            throw std::runtime_error("timestamp regression at event " + std::to_string(i));
        prev = ev.t;
        have_prev = true;
    }
}

}  // namespace esf
