#include <doctest.h>

#include <deque>
#include <random>

#include "esf/grid.hpp"

using namespace esf;

namespace {

OccupancyVector vec_with_bits(int n, std::initializer_list<int> bits) {
    OccupancyVector v(n);
    for (int b : bits) v.set(b);
    return v;
}

}  // namespace

TEST_CASE("shift_insert places the new vector in the newest slot") {
    OccupancyGrid grid(8, 4);
    grid.shift_insert(vec_with_bits(8, {5}));
    CHECK(grid.read_cell(5, 3));
    for (int x = 0; x < 8; ++x)
        for (int l = 0; l < 4; ++l)
            if (!(x == 5 && l == 3)) CHECK(!grid.read_cell(x, l));
    CHECK(grid.filled() == 1);
}

TEST_CASE("consecutive inserts age one slot per bin") {
    OccupancyGrid grid(8, 4);
    grid.shift_insert(vec_with_bits(8, {1}));
    grid.shift_insert(vec_with_bits(8, {2}));
    CHECK(grid.read_cell(2, 3));  // newest
    CHECK(grid.read_cell(1, 2));  // one bin ago
    CHECK(!grid.read_cell(1, 3));
}

TEST_CASE("inserting the same vector L times fills the column") {
    OccupancyGrid grid(8, 4);
    for (int i = 0; i < 4; ++i) grid.shift_insert(vec_with_bits(8, {5}));
    for (int l = 0; l < 4; ++l) CHECK(grid.read_cell(5, l));
    CHECK(grid.filled() == 4);
    CHECK(grid.warmed_up());
}

TEST_CASE("read_cell bounds checking") {
    OccupancyGrid grid(8, 4);
    CHECK_THROWS_AS(grid.read_cell(-1, 0), std::out_of_range);
    CHECK_THROWS_AS(grid.read_cell(8, 0), std::out_of_range);
    CHECK_THROWS_AS(grid.read_cell(0, 4), std::out_of_range);
    CHECK_THROWS_AS(grid.shift_insert(OccupancyVector(9)), std::invalid_argument);
}

TEST_CASE("reset clears everything and is idempotent") {
    OccupancyGrid grid(8, 4);
    for (int i = 0; i < 6; ++i) grid.shift_insert(vec_with_bits(8, {i % 8}));
    grid.reset();
    CHECK(grid.filled() == 0);
    for (int x = 0; x < 8; ++x)
        for (int l = 0; l < 4; ++l) CHECK(!grid.read_cell(x, l));
    grid.reset();
    CHECK(grid.filled() == 0);
}

TEST_CASE("grid matches a naive ring-buffer reference on random streams") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 64);
        const int depth = 1 + static_cast<int>(rng() % 16);
        OccupancyGrid grid(n, depth);
        std::deque<OccupancyVector> window;  // last L vectors, oldest first

        const int inserts = depth + static_cast<int>(rng() % (3 * depth + 1));
        for (int k = 0; k < inserts; ++k) {
            OccupancyVector v(n, k);
            for (int x = 0; x < n; ++x)
                if (rng() % 3 == 0) v.set(x);
            grid.shift_insert(v);
            window.push_back(v);
            if (static_cast<int>(window.size()) > depth) window.pop_front();

            for (int l = 0; l < depth; ++l) {
                const int age = depth - 1 - l;  // slot l holds the vector from age bins ago
                const int idx = static_cast<int>(window.size()) - 1 - age;
                const bool expect_zero = idx < 0;
                for (int x = 0; x < n; ++x) {
                    const bool want = expect_zero ? false : window[idx].test(x);
                    CHECK(grid.read_cell(x, l) == want);
                }
            }
        }
    }
}

TEST_CASE("debug dump renders L rows by N columns") {
    OccupancyGrid grid(4, 2);
    grid.shift_insert(vec_with_bits(4, {0}));
    grid.shift_insert(vec_with_bits(4, {3}));
    CHECK(grid.dump() == "1000\n0001\n");
}
