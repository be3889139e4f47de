#include "pose/kmeans.hpp"

#include <algorithm>
#include <limits>

#include "pose/error.hpp"
#include "pose/rng.hpp"

namespace pose {

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

} // namespace

KmeansResult kmeans(const std::vector<std::vector<double>>& points, int k, std::uint64_t seed,
                    int max_iters) {
    if (k < 1) fail("bad_arguments", "k must be >= 1");
    const int n = static_cast<int>(points.size());
    if (n < k) fail("insufficient_samples", "fewer samples than clusters");

    Rng rng(seed);
    KmeansResult r;
    r.centroids.reserve(static_cast<size_t>(k));

    // k-means++ seeding
    r.centroids.push_back(points[rng.below(static_cast<std::uint64_t>(n))]);
    std::vector<double> d2(static_cast<size_t>(n), std::numeric_limits<double>::infinity());
    while (static_cast<int>(r.centroids.size()) < k) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            d2[static_cast<size_t>(i)] = std::min(d2[static_cast<size_t>(i)],
                                                  sq_dist(points[static_cast<size_t>(i)],
                                                          r.centroids.back()));
            total += d2[static_cast<size_t>(i)];
        }
        if (total <= 0.0) {
            // all remaining mass at existing centroids; take the next index
            r.centroids.push_back(points[r.centroids.size() % static_cast<size_t>(n)]);
            continue;
        }
        double target = rng.uniform() * total;
        int pick = n - 1;
        for (int i = 0; i < n; ++i) {
            target -= d2[static_cast<size_t>(i)];
            if (target <= 0.0) {
                pick = i;
                break;
            }
        }
        r.centroids.push_back(points[static_cast<size_t>(pick)]);
    }

    r.assignments.assign(static_cast<size_t>(n), -1);
    std::vector<int> prev(static_cast<size_t>(n), -2);
    std::vector<double> assigned_d2(static_cast<size_t>(n), 0.0);

    for (int iter = 0; iter < max_iters; ++iter) {
        r.iterations = iter + 1;
        double ssd = 0.0;
        for (int i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            int best_c = 0;
            for (int c = 0; c < k; ++c) {
                const double d = sq_dist(points[static_cast<size_t>(i)],
                                         r.centroids[static_cast<size_t>(c)]);
                if (d < best) {
                    best = d;
                    best_c = c;
                }
            }
            r.assignments[static_cast<size_t>(i)] = best_c;
            assigned_d2[static_cast<size_t>(i)] = best;
            ssd += best;
        }
        r.ssd_trace.push_back(ssd);
        if (r.assignments == prev) break;
        prev = r.assignments;

        // means of populated clusters
        const size_t dim = points[0].size();
        std::vector<std::vector<double>> sums(static_cast<size_t>(k),
                                              std::vector<double>(dim, 0.0));
        std::vector<int> counts(static_cast<size_t>(k), 0);
        for (int i = 0; i < n; ++i) {
            const int c = r.assignments[static_cast<size_t>(i)];
            ++counts[static_cast<size_t>(c)];
            for (size_t d = 0; d < dim; ++d)
                sums[static_cast<size_t>(c)][d] += points[static_cast<size_t>(i)][d];
        }
        std::vector<char> taken(static_cast<size_t>(n), 0);
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<size_t>(c)] > 0) {
                for (size_t d = 0; d < dim; ++d)
                    r.centroids[static_cast<size_t>(c)][d] =
                        sums[static_cast<size_t>(c)][d] / counts[static_cast<size_t>(c)];
            } else {
                // reseed to the point farthest from its assigned centroid
                int far = -1;
                double far_d = -1.0;
                for (int i = 0; i < n; ++i) {
                    if (taken[static_cast<size_t>(i)]) continue;
                    if (assigned_d2[static_cast<size_t>(i)] > far_d) {
                        far_d = assigned_d2[static_cast<size_t>(i)];
                        far = i;
                    }
                }
                taken[static_cast<size_t>(far)] = 1;
                r.centroids[static_cast<size_t>(c)] = points[static_cast<size_t>(far)];
            }
        }
    }
    return r;
}

GeometricGrouping geometric_cluster(const std::vector<Vec2>& offsets, int k, std::uint64_t seed) {
    std::vector<std::vector<double>> pts;
    pts.reserve(offsets.size());
    for (const Vec2& o : offsets) pts.push_back({o.x, o.y});
    KmeansResult r = kmeans(pts, k, seed);

    GeometricGrouping g;
    g.k = k;
    for (const auto& c : r.centroids) g.centroids.emplace_back(c[0], c[1]);
    g.assignments = std::move(r.assignments);
    g.ssd_trace = std::move(r.ssd_trace);
    return g;
}

} // namespace pose
