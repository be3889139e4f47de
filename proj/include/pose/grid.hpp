#pragma once

#include <cassert>
#include <vector>

namespace pose {

// Dense row-major grid of doubles; used for unary responses, messages and
// distance-transform outputs.
struct Grid {
    int w = 0;
    int h = 0;
    std::vector<double> v;

    Grid() = default;
    Grid(int w_, int h_, double init = 0.0) : w(w_), h(h_), v(static_cast<size_t>(w_) * h_, init) {}

    double& at(int x, int y) {
        assert(x >= 0 && x < w && y >= 0 && y < h);
        return v[static_cast<size_t>(y) * w + x];
    }
    double at(int x, int y) const {
        assert(x >= 0 && x < w && y >= 0 && y < h);
        return v[static_cast<size_t>(y) * w + x];
    }
    size_t size() const { return v.size(); }
};

// Companion grid of back-pointers (linear cell indices or symbol indices).
struct IndexGrid {
    int w = 0;
    int h = 0;
    std::vector<int> v;

    IndexGrid() = default;
    IndexGrid(int w_, int h_, int init = -1) : w(w_), h(h_), v(static_cast<size_t>(w_) * h_, init) {}

    int& at(int x, int y) { return v[static_cast<size_t>(y) * w + x]; }
    int at(int x, int y) const { return v[static_cast<size_t>(y) * w + x]; }
};

} // namespace pose
