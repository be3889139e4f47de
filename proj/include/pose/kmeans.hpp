#pragma once

#include <cstdint>
#include <vector>

#include "pose/geometry.hpp"

namespace pose {

struct KmeansResult {
    std::vector<std::vector<double>> centroids;
    std::vector<int> assignments;
    std::vector<double> ssd_trace; // within-cluster squared distance per Lloyd iteration
    int iterations = 0;
};

// Lloyd with k-means++ seeding from a seeded PRNG. Assignment ties go to the
// lowest cluster index; an emptied cluster is reseeded to the point farthest
// from its assigned centroid. Stops when assignments are stable or after
// max_iters.
KmeansResult kmeans(const std::vector<std::vector<double>>& points, int k, std::uint64_t seed,
                    int max_iters = 100);

struct GeometricGrouping {
    int part_id = -1;
    int reference_part_id = -1;
    int k = 0;
    std::vector<Vec2> centroids; // relative offsets, pixels
    std::vector<int> assignments;
    std::vector<double> ssd_trace;
};

GeometricGrouping geometric_cluster(const std::vector<Vec2>& offsets, int k, std::uint64_t seed);

} // namespace pose
