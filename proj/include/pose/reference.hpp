#pragma once

#include <array>
#include <span>
#include <vector>

#include "pose/distance_transform.hpp"
#include "pose/features.hpp"
#include "pose/params.hpp"

// Serial reference implementations of the hot kernels. These are the
// brute-force oracles the tests and the benchmark compare against; nothing in
// the production path uses them.
namespace pose::ref {

// naive per-location dot product, O(cells * box * dim)
Grid correlate_reference(const FeatureMap& map, const std::vector<double>& filter, BoxSize box);

// O(n^2) scan over all source positions
Dt1dResult dt1d_reference(std::span<const double> f, double w_lin, double w_quad, double anchor);

// O(n^4) scan over all source cells
Dt2dResult dt2d_reference(const Grid& f, const std::array<double, 4>& w, Vec2 anchor);

// Exact optimum of the tree objective by per-edge brute force (no distance
// transform, no envelope); only sensible for tiny models and grids.
double exhaustive_best_score(const FeatureMap& features, const ModelParams& params,
                             const SkeletonTree& tree);

} // namespace pose::ref
