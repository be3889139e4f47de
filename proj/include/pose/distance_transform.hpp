#pragma once

#include <array>
#include <span>
#include <vector>

#include "pose/geometry.hpp"
#include "pose/grid.hpp"

namespace pose {

// Quadratic deformation weights must stay at or below this bound so the
// pairwise term is concave and distance-transformable.
constexpr double kMaxQuadWeight = -0.01;

struct Dt1dResult {
    std::vector<double> scores;
    std::vector<int> sources;
};

// g(x) = max_{x'} f(x') + w_lin*d + w_quad*d^2 with d = x - x' - anchor,
// computed by the lower-envelope algorithm in O(n). Ties toward smaller x'.
Dt1dResult distance_transform_1d(std::span<const double> f, double w_lin, double w_quad,
                                 double anchor);

struct Dt2dResult {
    Grid scores;
    IndexGrid src_x;
    IndexGrid src_y;
};

// Separable 2-D transform: rows then columns. w = [w_dx, w_dy, w_dx2, w_dy2],
// d = (x, y) - (x', y') - anchor.
Dt2dResult distance_transform_2d(const Grid& f, const std::array<double, 4>& w, Vec2 anchor);

} // namespace pose
