#include "pose/lsvm.hpp"

#include <algorithm>
#include <cmath>

#include "pose/error.hpp"
#include "pose/kmeans.hpp"
#include "pose/svm.hpp"

namespace pose {

namespace {

double score_of(const std::vector<double>& w, double b, std::span<const double> x) {
    double s = b;
    for (size_t i = 0; i < w.size(); ++i) s += w[i] * x[i];
    return s;
}

int argmax_category(const LatentCategorization& cat, std::span<const double> x) {
    int best_k = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < cat.filters.size(); ++k) {
        const double s = score_of(cat.filters[k], cat.biases[k], x);
        if (s > best) {
            best = s;
            best_k = static_cast<int>(k);
        }
    }
    return best_k;
}

} // namespace

double lsvm_objective(const LatentCategorization& cat,
                      const std::vector<std::span<const double>>& pos,
                      const std::vector<std::span<const double>>& neg) {
    double reg = 0.0;
    for (size_t k = 0; k < cat.filters.size(); ++k) {
        reg += cat.biases[k] * cat.biases[k];
        for (double v : cat.filters[k]) reg += v * v;
    }
    double hinge = 0.0;
    for (size_t i = 0; i < pos.size(); ++i) {
        const int l = cat.labels[i];
        hinge += std::max(0.0, 1.0 - score_of(cat.filters[static_cast<size_t>(l)],
                                              cat.biases[static_cast<size_t>(l)], pos[i]));
    }
    for (const auto& x : neg)
        for (size_t k = 0; k < cat.filters.size(); ++k)
            hinge += std::max(0.0, 1.0 + score_of(cat.filters[k], cat.biases[k], x));
    return 0.5 * reg + cat.C * hinge;
}

LatentCategorization lsvm_categorize(const std::vector<std::span<const double>>& pos,
                                     const std::vector<std::span<const double>>& neg, int K,
                                     double C, std::uint64_t seed, int max_rounds) {
    if (K < 1) fail("bad_arguments", "K must be >= 1");
    if (static_cast<int>(pos.size()) < K)
        fail("insufficient_samples", "need at least K positive instances");
    if (neg.empty()) fail("insufficient_samples", "need at least one negative instance");

    LatentCategorization cat;
    cat.C = C;

    // initial labels from k-means on the positive feature vectors
    {
        std::vector<std::vector<double>> pts;
        pts.reserve(pos.size());
        for (const auto& x : pos) pts.emplace_back(x.begin(), x.end());
        cat.labels = kmeans(pts, K, seed).assignments;
    }
    cat.filters.assign(static_cast<size_t>(K), {});
    cat.biases.assign(static_cast<size_t>(K), 0.0);
    cat.source_category.resize(static_cast<size_t>(K));
    for (int k = 0; k < K; ++k) cat.source_category[static_cast<size_t>(k)] = k;

    for (int round = 0; round < max_rounds; ++round) {
        cat.rounds_run = round + 1;
        const int k_cur = static_cast<int>(cat.filters.size());

        // (a) fix labels, train each category against all negatives
        std::vector<std::vector<int>> members(static_cast<size_t>(k_cur));
        for (size_t i = 0; i < pos.size(); ++i)
            members[static_cast<size_t>(cat.labels[i])].push_back(static_cast<int>(i));

#pragma omp parallel for schedule(dynamic)
        for (int k = 0; k < k_cur; ++k) {
            std::vector<std::span<const double>> xs;
            std::vector<int> ys;
            xs.reserve(members[static_cast<size_t>(k)].size() + neg.size());
            for (int i : members[static_cast<size_t>(k)]) {
                xs.push_back(pos[static_cast<size_t>(i)]);
                ys.push_back(1);
            }
            for (const auto& x : neg) {
                xs.push_back(x);
                ys.push_back(-1);
            }
            SvmOptions opt;
            opt.C = C;
            opt.seed = seed ^ (0x5bd1e995ULL * static_cast<std::uint64_t>(k + 1));
            SvmModel model = train_linear_svm(xs, ys, opt);

            // keep the previous weights when the fresh solve is not better
            if (!cat.filters[static_cast<size_t>(k)].empty()) {
                SvmModel old;
                old.w = cat.filters[static_cast<size_t>(k)];
                old.bias = cat.biases[static_cast<size_t>(k)];
                if (svm_primal_objective(old, xs, ys, C) <
                    svm_primal_objective(model, xs, ys, C)) {
                    model.w = old.w;
                    model.bias = old.bias;
                }
            }
            cat.filters[static_cast<size_t>(k)] = std::move(model.w);
            cat.biases[static_cast<size_t>(k)] = model.bias;
        }

        cat.objective_trace.push_back(lsvm_objective(cat, pos, neg));

        // (b) relabel by argmax score
        std::vector<int> labels(pos.size());
        for (size_t i = 0; i < pos.size(); ++i) labels[i] = argmax_category(cat, pos[i]);

        // drop categories that lost every positive
        std::vector<int> remap(static_cast<size_t>(k_cur), -1);
        int next = 0;
        for (int k = 0; k < k_cur; ++k)
            if (std::count(labels.begin(), labels.end(), k) > 0)
                remap[static_cast<size_t>(k)] = next++;
        if (next < k_cur) {
            LatentCategorization shrunk;
            shrunk.C = cat.C;
            shrunk.objective_trace = cat.objective_trace;
            shrunk.rounds_run = cat.rounds_run;
            shrunk.filters.resize(static_cast<size_t>(next));
            shrunk.biases.resize(static_cast<size_t>(next));
            shrunk.source_category.resize(static_cast<size_t>(next));
            for (int k = 0; k < k_cur; ++k) {
                if (remap[static_cast<size_t>(k)] < 0) continue;
                const size_t to = static_cast<size_t>(remap[static_cast<size_t>(k)]);
                shrunk.filters[to] = std::move(cat.filters[static_cast<size_t>(k)]);
                shrunk.biases[to] = cat.biases[static_cast<size_t>(k)];
                shrunk.source_category[to] = cat.source_category[static_cast<size_t>(k)];
            }
            shrunk.labels.resize(pos.size());
            for (size_t i = 0; i < pos.size(); ++i)
                shrunk.labels[i] = remap[static_cast<size_t>(labels[i])];
            cat = std::move(shrunk); // category set changed, run another round
            continue;
        }

        const bool stable = labels == cat.labels;
        cat.labels = std::move(labels);
        if (stable) break;
    }
    return cat;
}

CategorySet cross_validate(const std::vector<std::span<const double>>& pos,
                           const std::vector<std::span<const double>>& neg, int K_in, int rounds,
                           double prune_fraction, double C, std::uint64_t seed,
                           CrossValReport* report) {
    if (rounds < 1) fail("bad_arguments", "rounds must be >= 1");
    if (static_cast<int>(pos.size()) < 2 * K_in)
        fail("insufficient_samples", "need at least 2*K_in instances for cross validation");

    std::vector<std::span<const double>> h1, h2;
    for (size_t i = 0; i < pos.size(); ++i) (i % 2 == 0 ? h1 : h2).push_back(pos[i]);

    std::vector<int> alive(static_cast<size_t>(K_in));
    for (int k = 0; k < K_in; ++k) alive[static_cast<size_t>(k)] = k;

    CategorySet out;
    for (int round = 0; round < rounds; ++round) {
        const auto& train_half = (round % 2 == 0) ? h1 : h2;
        const auto& val_half = (round % 2 == 0) ? h2 : h1;
        const int k_cur = static_cast<int>(alive.size());
        if (static_cast<int>(train_half.size()) < k_cur)
            fail("insufficient_samples", "training half smaller than classifier count");

        LatentCategorization cat = lsvm_categorize(
            train_half, neg, k_cur, C, seed ^ (0x9e3779b9ULL * static_cast<std::uint64_t>(round)));

        // classifiers surviving the round's training, mapped back to slots
        std::vector<int> slot_of(cat.filters.size());
        for (size_t k = 0; k < cat.filters.size(); ++k)
            slot_of[k] = alive[static_cast<size_t>(cat.source_category[k])];

        // slots whose category lost all positives inside training are gone
        std::vector<int> lsvm_dropped;
        for (int slot : alive)
            if (std::find(slot_of.begin(), slot_of.end(), slot) == slot_of.end())
                lsvm_dropped.push_back(slot);

        // evaluate on the held-out half
        std::vector<int> detections(cat.filters.size(), 0);
        for (const auto& x : val_half) {
            const int k = argmax_category(cat, x);
            if (score_of(cat.filters[static_cast<size_t>(k)], cat.biases[static_cast<size_t>(k)],
                         x) > -1.0)
                ++detections[static_cast<size_t>(k)];
        }

        const double threshold =
            prune_fraction * static_cast<double>(val_half.size()) / std::max(1, static_cast<int>(cat.filters.size()));

        CrossValRound info;
        info.k_before = k_cur;
        info.detection_counts = detections;
        info.removed_slots = lsvm_dropped;
        info.objective = cat.objective_trace.empty() ? 0.0 : cat.objective_trace.back();

        std::vector<int> keep;
        for (size_t k = 0; k < cat.filters.size(); ++k) {
            if (static_cast<double>(detections[k]) < threshold)
                info.removed_slots.push_back(slot_of[k]);
            else
                keep.push_back(static_cast<int>(k));
        }
        // slots dropped inside lsvm training (lost all positives) are gone too
        if (keep.empty()) fail("degenerate_symbol_set", "all classifiers pruned");

        out.filters.clear();
        out.biases.clear();
        out.slots.clear();
        out.detection_counts.clear();
        std::vector<int> next_alive;
        for (int k : keep) {
            out.filters.push_back(cat.filters[static_cast<size_t>(k)]);
            out.biases.push_back(cat.biases[static_cast<size_t>(k)]);
            out.slots.push_back(slot_of[static_cast<size_t>(k)]);
            out.detection_counts.push_back(detections[static_cast<size_t>(k)]);
            next_alive.push_back(slot_of[static_cast<size_t>(k)]);
        }
        alive = std::move(next_alive);
        info.k_after = static_cast<int>(alive.size());
        if (report) report->rounds.push_back(info);
    }
    return out;
}

} // namespace pose
