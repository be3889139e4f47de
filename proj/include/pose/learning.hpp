#pragma once

#include <cstdint>
#include <vector>

#include "pose/features.hpp"
#include "pose/params.hpp"

namespace pose {

// One full (location, symbol) assignment, indexed by part id.
struct ParseConfig {
    std::vector<Cell> locs;
    std::vector<int> syms;

    bool operator==(const ParseConfig& o) const { return locs == o.locs && syms == o.syms; }
};

// Feature vector in ParamLayout coordinates: dense filter blocks for the
// assigned symbols, [psi | 1] for each edge pair, 1 in the root-bias slot.
struct SparseVec {
    std::vector<std::pair<int, double>> items;
};

// <theta, Phi> of this configuration equals its Eq.6 score exactly.
// Throws Error("infeasible_configuration") when a pair is incompatible.
SparseVec feature_vector(const ParseConfig& config, const FeatureMap& features,
                         const ModelParams& params, const SkeletonTree& tree);

double sparse_dot(const std::vector<double>& theta, const SparseVec& phi);

struct PositiveExample {
    const FeatureMap* features = nullptr;
    ParseConfig config;
};

struct LearnOptions {
    double C = 0.002;
    int max_epochs = 10;
    double qp_tol_abs = 1e-3;
    double qp_tol_rel = 1e-5;
    int qp_max_passes = 2000;
    double margin_tol = 1e-3;
    int evict_after = 2; // consecutive inactive epochs before a constraint is dropped
};

struct EpochStats {
    int epoch = 0;
    int cache_size = 0;
    int new_violations = 0;
    double objective_pre = 0.0;             // after mining, before the re-solve
    double objective_post = 0.0;            // after the re-solve, before projection
    double objective_post_projection = 0.0; // with quadratic weights clamped
    bool projection_increased = false;      // post_projection > post + 1e-6
    int evicted = 0;
    double wall_ms = 0.0;
};

struct LearnReport {
    std::vector<EpochStats> epochs;
    int infeasible_positives = 0;
    double final_objective = 0.0;
    double worst_positive_violation = 0.0; // margin audit at convergence
    double worst_negative_violation = 0.0;
};

// Cutting-plane training of Eq.7: positives keep their annotated
// configuration, negatives contribute argmax configurations mined by parse()
// each epoch; one slack per example shared by all its cached cuts.
ModelParams train_params(const std::vector<PositiveExample>& positives,
                         const std::vector<const FeatureMap*>& negatives,
                         const ModelParams& init, const SkeletonTree& tree,
                         const LearnOptions& opt, LearnReport* report = nullptr);

} // namespace pose
