#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pose {

// Latent categorization of a positive set into K appearance subcategories:
// alternate between training one hinge-loss SVM per category (its positives
// vs all negatives) and relabeling positives by argmax score. Categories that
// lose all positives are dropped.
struct LatentCategorization {
    std::vector<std::vector<double>> filters; // K x dim
    std::vector<double> biases;
    std::vector<int> source_category; // initial category each filter descends from
    std::vector<int> labels;          // per positive, index into filters
    double C = 0.0;
    std::vector<double> objective_trace; // one entry per alternation round
    int rounds_run = 0;
};

LatentCategorization lsvm_categorize(const std::vector<std::span<const double>>& pos,
                                     const std::vector<std::span<const double>>& neg, int K,
                                     double C, std::uint64_t seed, int max_rounds = 20);

// objective of a categorization state (used by tests and the trace):
// 1/2 sum_k (||w_k||^2 + b_k^2) + C [ sum_pos hinge(+1, score of own label)
//                                   + sum_neg sum_k hinge(-1, score_k) ]
double lsvm_objective(const LatentCategorization& cat,
                      const std::vector<std::span<const double>>& pos,
                      const std::vector<std::span<const double>>& neg);

struct CrossValRound {
    int k_before = 0;
    int k_after = 0;
    std::vector<int> detection_counts; // per alive slot, before pruning
    std::vector<int> removed_slots;
    double objective = 0.0; // final Eq.1 objective of the round's training
};

struct CrossValReport {
    std::vector<CrossValRound> rounds;
};

// Survivors of the train/validate/prune loop. `slots` are identities in
// [0, K_in): a removed slot never re-enters.
struct CategorySet {
    std::vector<std::vector<double>> filters;
    std::vector<double> biases;
    std::vector<int> slots;
    std::vector<int> detection_counts; // last validation round
};

// Halves are the even/odd elements of `pos` (deterministic), swapped every
// round. A classifier is "detected" by a validation instance when it wins the
// argmax and scores above -1; classifiers with fewer than
// prune_fraction * |H_val| / K_current detections are removed.
CategorySet cross_validate(const std::vector<std::span<const double>>& pos,
                           const std::vector<std::span<const double>>& neg, int K_in, int rounds,
                           double prune_fraction, double C, std::uint64_t seed,
                           CrossValReport* report = nullptr);

} // namespace pose
