#include "esf/grid.hpp"

#include <algorithm>
#include <stdexcept>

namespace esf {

OccupancyGrid::OccupancyGrid(int n, int depth) : n_(n), depth_(depth), cols_(n, 0) {
    if (n <= 0) throw std::invalid_argument("grid width must be positive");
    if (depth <= 0 || depth > 64)
        throw std::invalid_argument("grid depth must be in [1, 64]");
}

void OccupancyGrid::shift_insert(const OccupancyVector& vec) {
    if (vec.size() != n_) throw std::invalid_argument("occupancy vector size mismatch");
    const std::uint64_t top = std::uint64_t{1} << (depth_ - 1);
    for (int x = 0; x < n_; ++x) {
        cols_[x] >>= 1;
        if (vec.test(x)) cols_[x] |= top;
    }
    filled_ = std::min(filled_ + 1, depth_);
}

bool OccupancyGrid::read_cell(int x, int slot) const {
    if (x < 0 || x >= n_) throw std::out_of_range("pixel index out of range");
    if (slot < 0 || slot >= depth_) throw std::out_of_range("slot index out of range");
    return read_cell_fast(x, slot);
}

void OccupancyGrid::reset() {
    std::fill(cols_.begin(), cols_.end(), 0);
    filled_ = 0;
}

std::string OccupancyGrid::dump() const {
    std::string out;
    out.reserve(static_cast<std::size_t>(depth_) * (n_ + 1));
    for (int slot = 0; slot < depth_; ++slot) {
        for (int x = 0; x < n_; ++x) out.push_back(read_cell_fast(x, slot) ? '1' : '0');
        out.push_back('\n');
    }
    return out;
}

}  // namespace esf
