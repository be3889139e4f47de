#include <doctest.h>

#include <cmath>

#include "pose/error.hpp"
#include "pose/kmeans.hpp"
#include "pose/lsvm.hpp"
#include "pose/rng.hpp"

#include "support.hpp"

using namespace pose;

TEST_CASE("k=1 clustering returns the mean of all offsets") {
    std::vector<Vec2> pts{{1, 2}, {3, 4}, {5, 0}, {-1, 6}};
    const GeometricGrouping g = geometric_cluster(pts, 1, 9);
    CHECK(g.centroids.size() == 1);
    CHECK(g.centroids[0].x == doctest::Approx(2.0));
    CHECK(g.centroids[0].y == doctest::Approx(3.0));
    for (int a : g.assignments) CHECK(a == 0);
}

TEST_CASE("two separated blobs are recovered exactly") {
    Rng rng(77);
    std::vector<Vec2> pts;
    Vec2 sum_a, sum_b;
    for (int i = 0; i < 40; ++i) {
        const Vec2 p(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
        pts.push_back(p);
        sum_a += p;
    }
    for (int i = 0; i < 30; ++i) {
        const Vec2 p(20 + rng.uniform(-0.5, 0.5), 15 + rng.uniform(-0.5, 0.5));
        pts.push_back(p);
        sum_b += p;
    }
    const Vec2 mean_a = sum_a * (1.0 / 40);
    const Vec2 mean_b = sum_b * (1.0 / 30);

    const GeometricGrouping g = geometric_cluster(pts, 2, 123);
    REQUIRE(g.centroids.size() == 2);
    const bool a_first = g.centroids[0].x < 10;
    const Vec2 ca = a_first ? g.centroids[0] : g.centroids[1];
    const Vec2 cb = a_first ? g.centroids[1] : g.centroids[0];
    CHECK(distance(ca, mean_a) < 1e-6);
    CHECK(distance(cb, mean_b) < 1e-6);

    // ssd is non-increasing over Lloyd iterations
    for (size_t i = 1; i < g.ssd_trace.size(); ++i)
        CHECK(g.ssd_trace[i] <= g.ssd_trace[i - 1] + 1e-9);
}

TEST_CASE("identical offsets with k=2 converge with one populated cluster") {
    std::vector<Vec2> pts(6, Vec2(3, 3));
    const GeometricGrouping g = geometric_cluster(pts, 2, 5);
    for (int a : g.assignments) CHECK(a == 0);
    CHECK(g.centroids[0].x == doctest::Approx(3.0));
}

TEST_CASE("clustering fewer samples than clusters fails") {
    std::vector<Vec2> pts{{0, 0}, {1, 1}};
    CHECK_THROWS_AS(geometric_cluster(pts, 3, 1), Error);
}

TEST_CASE("clustering is deterministic per seed") {
    Rng rng(3);
    std::vector<Vec2> pts;
    for (int i = 0; i < 50; ++i) pts.emplace_back(rng.uniform(-5, 5), rng.uniform(-5, 5));
    const GeometricGrouping a = geometric_cluster(pts, 4, 99);
    const GeometricGrouping b = geometric_cluster(pts, 4, 99);
    CHECK(a.assignments == b.assignments);
    for (size_t i = 0; i < a.centroids.size(); ++i) {
        CHECK(a.centroids[i].x == b.centroids[i].x);
        CHECK(a.centroids[i].y == b.centroids[i].y);
    }
}

namespace {

// positives around per-mode anchors, negatives far away
struct LsvmFixture {
    std::vector<std::vector<double>> pos_store, neg_store;
    std::vector<std::span<const double>> pos, neg;
    std::vector<int> mode; // generating mode per positive

    LsvmFixture(Rng& rng, int n_modes, int per_mode, int n_neg, double spread = 0.3) {
        // modes point in opposite/rotated directions so no single linear
        // classifier can absorb them all; the phase shift per cycle keeps
        // every mode present in both the even and the odd half
        for (int i = 0; i < per_mode; ++i) {
            for (int mm = 0; mm < n_modes; ++mm) {
                const int m = (mm + i) % n_modes;
                const double ang = 2.0 * M_PI * m / n_modes;
                pos_store.push_back({4.0 * std::cos(ang) + rng.uniform(-spread, spread),
                                     4.0 * std::sin(ang) + rng.uniform(-spread, spread),
                                     rng.uniform(-spread, spread)});
                mode.push_back(m);
            }
        }
        for (int i = 0; i < n_neg; ++i)
            neg_store.push_back({rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4),
                                 rng.uniform(-0.4, 0.4)});
        for (const auto& v : pos_store) pos.emplace_back(v);
        for (const auto& v : neg_store) neg.emplace_back(v);
    }
};

} // namespace

TEST_CASE("K=1 collapses to a single binary SVM") {
    Rng rng(2024);
    const LsvmFixture fx(rng, 1, 24, 20);
    const double C = 0.05;
    const LatentCategorization cat = lsvm_categorize(fx.pos, fx.neg, 1, C, 7);
    const double obj = lsvm_objective(cat, fx.pos, fx.neg);

    std::vector<std::vector<double>> xs = fx.pos_store;
    std::vector<int> ys(fx.pos_store.size(), 1);
    for (const auto& v : fx.neg_store) {
        xs.push_back(v);
        ys.push_back(-1);
    }
    const double ref = test_support::reference_svm_objective(xs, ys, C);
    CHECK(std::abs(obj - ref) <= 1e-4 * std::abs(ref));
}

TEST_CASE("two separable appearance clusters are recovered exactly") {
    Rng rng(31337);
    const LsvmFixture fx(rng, 2, 16, 24);
    const LatentCategorization cat = lsvm_categorize(fx.pos, fx.neg, 2, 0.05, 3);
    REQUIRE(cat.filters.size() == 2);
    // labels must be constant within a generating mode and differ across them
    const int label_of_mode0 = cat.labels[0];
    const int label_of_mode1 = cat.labels[1];
    CHECK(label_of_mode0 != label_of_mode1);
    for (size_t i = 0; i < fx.pos.size(); ++i)
        CHECK(cat.labels[i] == (fx.mode[i] == 0 ? label_of_mode0 : label_of_mode1));
}

TEST_CASE("objective trace is non-increasing on random problems") {
    Rng rng(555);
    for (int trial = 0; trial < 10; ++trial) {
        const int modes = rng.uniform_int(1, 3);
        LsvmFixture fx(rng, modes, rng.uniform_int(4, 8), rng.uniform_int(5, 15),
                       rng.uniform(0.2, 1.5));
        const int K = rng.uniform_int(1, 3);
        if (static_cast<int>(fx.pos.size()) < K) continue;
        const LatentCategorization cat =
            lsvm_categorize(fx.pos, fx.neg, K, rng.uniform(0.01, 0.2), trial);
        for (size_t i = 1; i < cat.objective_trace.size(); ++i)
            CHECK(cat.objective_trace[i] <= cat.objective_trace[i - 1] + 1e-9);
        // final labels are argmax-consistent
        for (size_t i = 0; i < fx.pos.size(); ++i) {
            double best = -1e300;
            int best_k = 0;
            for (size_t k = 0; k < cat.filters.size(); ++k) {
                double s = cat.biases[k];
                for (size_t d = 0; d < fx.pos[i].size(); ++d) s += cat.filters[k][d] * fx.pos[i][d];
                if (s > best) {
                    best = s;
                    best_k = static_cast<int>(k);
                }
            }
            CHECK(cat.labels[i] == best_k);
        }
    }
}

TEST_CASE("cross validation prunes a classifier that detects nothing") {
    Rng rng(808);
    // mode B instances sit at even indices only, so they are trained on H1
    // and never detected on H2
    std::vector<std::vector<double>> store;
    for (int i = 0; i < 16; ++i) {
        if (i % 2 == 0 && i < 8)
            store.push_back({8.0 + rng.uniform(-0.2, 0.2), 8.0 + rng.uniform(-0.2, 0.2), 1.0});
        else
            store.push_back({-3.0 + rng.uniform(-0.2, 0.2), 1.0 + rng.uniform(-0.2, 0.2), 1.0});
    }
    std::vector<std::vector<double>> negs;
    for (int i = 0; i < 12; ++i)
        negs.push_back({rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), -1.0});
    std::vector<std::span<const double>> pos_v, neg_v;
    for (const auto& v : store) pos_v.emplace_back(v);
    for (const auto& v : negs) neg_v.emplace_back(v);

    CrossValReport report;
    const CategorySet out = cross_validate(pos_v, neg_v, 2, 1, 0.5, 0.05, 99, &report);
    CHECK(out.filters.size() == 1);
    REQUIRE(report.rounds.size() == 1);
    CHECK(report.rounds[0].k_before == 2);
    CHECK(report.rounds[0].k_after == 1);
}

TEST_CASE("prune_fraction zero disables pruning") {
    Rng rng(909);
    const LsvmFixture fx(rng, 2, 10, 10);
    const CategorySet out = cross_validate(fx.pos, fx.neg, 2, 3, 0.0, 0.05, 1);
    CHECK(out.filters.size() == 2);
}

TEST_CASE("three-mode recovery keeps 3..6 mode-dominated survivors") {
    Rng rng(4242);
    const LsvmFixture fx(rng, 3, 20, 30);
    CrossValReport report;
    const CategorySet out = cross_validate(fx.pos, fx.neg, 6, 3, 0.05, 0.05, 17, &report);
    CHECK(out.filters.size() >= 3);
    CHECK(out.filters.size() <= 6);

    // K never increases across rounds
    for (size_t r = 0; r < report.rounds.size(); ++r) {
        CHECK(report.rounds[r].k_after <= report.rounds[r].k_before);
        if (r > 0) CHECK(report.rounds[r].k_before == report.rounds[r - 1].k_after);
    }

    // every survivor's detections are dominated by one generating mode
    for (size_t k = 0; k < out.filters.size(); ++k) {
        int per_mode[3] = {0, 0, 0};
        for (size_t i = 0; i < fx.pos.size(); ++i) {
            int best_k = 0;
            double best = -1e300;
            for (size_t kk = 0; kk < out.filters.size(); ++kk) {
                double s = out.biases[kk];
                for (size_t d = 0; d < fx.pos[i].size(); ++d)
                    s += out.filters[kk][d] * fx.pos[i][d];
                if (s > best) {
                    best = s;
                    best_k = static_cast<int>(kk);
                }
            }
            if (best_k == static_cast<int>(k)) ++per_mode[fx.mode[i]];
        }
        const int total = per_mode[0] + per_mode[1] + per_mode[2];
        if (total == 0) continue; // never wins the argmax: vacuous
        const int top = std::max({per_mode[0], per_mode[1], per_mode[2]});
        CHECK(2 * top > total);
    }
}

TEST_CASE("cross validation is deterministic per seed") {
    Rng rng(13);
    const LsvmFixture fx(rng, 2, 12, 15);
    const CategorySet a = cross_validate(fx.pos, fx.neg, 3, 2, 0.05, 0.05, 321);
    const CategorySet b = cross_validate(fx.pos, fx.neg, 3, 2, 0.05, 0.05, 321);
    REQUIRE(a.filters.size() == b.filters.size());
    for (size_t k = 0; k < a.filters.size(); ++k) {
        CHECK(a.biases[k] == b.biases[k]);
        CHECK(a.filters[k] == b.filters[k]);
        CHECK(a.slots[k] == b.slots[k]);
    }
}

TEST_CASE("cross validation demands enough instances") {
    Rng rng(1);
    const LsvmFixture fx(rng, 1, 3, 5);
    CHECK_THROWS_AS(cross_validate(fx.pos, fx.neg, 2, 1, 0.05, 0.05, 0), Error);
}
