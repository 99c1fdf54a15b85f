#include <doctest.h>

#include <sstream>

#include "esf/events.hpp"

using namespace esf;

namespace {
const SensorGeometry kDavis{240, 180};
}

TEST_CASE("parse_event_line converts seconds to microseconds") {
    Event ev = parse_event_line("1.234567 120 90 1", kDavis);
    CHECK(ev == Event{1234567, 120, 90, +1});
}

TEST_CASE("parse_event_line maps polarity 0 to -1") {
    Event ev = parse_event_line("0.0 0 0 0", kDavis);
    CHECK(ev == Event{0, 0, 0, -1});
}

TEST_CASE("parse_event_line rejects out-of-bounds coordinates") {
    CHECK_THROWS_AS(parse_event_line("0.5 240 10 1", kDavis, 7), ParseError);
    CHECK_THROWS_AS(parse_event_line("0.5 10 180 1", kDavis), ParseError);
    try {
        parse_event_line("0.5 240 10 1", kDavis, 7);
    } catch (const ParseError& e) {
        CHECK(e.line_no() == 7);
    }
}

TEST_CASE("parse_event_line rejects malformed input") {
    CHECK_THROWS_AS(parse_event_line("0.5 10 10", kDavis), ParseError);
    CHECK_THROWS_AS(parse_event_line("0.5 10 10 1 9", kDavis), ParseError);
    CHECK_THROWS_AS(parse_event_line("abc 10 10 1", kDavis), ParseError);
    CHECK_THROWS_AS(parse_event_line("-0.5 10 10 1", kDavis), ParseError);
    CHECK_THROWS_AS(parse_event_line("0.5 10 10 2", kDavis), ParseError);
}

TEST_CASE("event stream preserves order and rejects regressions") {
    SUBCASE("ordered") {
        std::istringstream in("1.0 1 1 1\n2.0 2 2 0\n");
        EventStream s(in, kDavis);
        CHECK(s.next()->t == 1000000);
        CHECK(s.next()->t == 2000000);
        CHECK(!s.next());
    }
    SUBCASE("regression") {
        std::istringstream in("2.0 1 1 1\n1.0 2 2 0\n");
        EventStream s(in, kDavis);
        CHECK(s.next());
        CHECK_THROWS_AS(s.next(), ParseError);
    }
    SUBCASE("equal timestamps allowed") {
        std::istringstream in("1.0 1 1 1\n1.0 2 2 0\n");
        EventStream s(in, kDavis);
        CHECK(s.next());
        CHECK(s.next());
    }
    SUBCASE("empty input") {
        std::istringstream in("");
        EventStream s(in, kDavis);
        CHECK(!s.next());
    }
}

TEST_CASE("event round-trips through the text format") {
    for (Event ev : {Event{0, 0, 0, -1}, Event{1234567, 239, 179, +1},
                     Event{999999999, 17, 3, -1}}) {
        CHECK(parse_event_line(format_event_line(ev), kDavis) == ev);
    }
}
