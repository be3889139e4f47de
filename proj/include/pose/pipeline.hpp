#pragma once

#include <cstdint>
#include <string>

#include "pose/dataset.hpp"
#include "pose/learning.hpp"
#include "pose/model_io.hpp"

namespace pose {

// Staged training exactly as the CLI wires it: derive part instances,
// geometric clustering, latent categorization with cross-validation pruning,
// compatibility building, then joint parameter learning.
struct PipelineConfig {
    int cell_size = 4;
    int k_large = 8; // geometric clusters, high/mid-level parts
    int k_small = 6; // geometric clusters, joint parts
    int sym_large = 2;
    int sym_small = 4;
    int cv_rounds = 10;
    double prune_fraction = 0.05;
    double C = 0.002; // both Eq.1 categorization and Eq.7 learning
    int learn_epochs = 8;
    std::uint64_t seed = 1;
    bool init_filters_from_lsvm = true;
    int negatives_per_part = 150; // background patches per part
    int min_cooccurrence = 1;
};

struct TrainArtifacts {
    Model model;
    std::string symbol_report_text;
    std::string symbol_report_csv;
    std::string learn_report_csv;
    LearnReport learn_report;
};

TrainArtifacts train_pipeline(const Dataset& dataset, const PipelineConfig& config);

} // namespace pose
