#pragma once

#include <vector>

#include "pose/features.hpp"
#include "pose/params.hpp"
#include "pose/parse_result.hpp"

namespace pose {

// Per-symbol root score maps after the leaf-to-root sweep (root bias
// included). Symbols with no feasible support below or no finite pair on the
// upward edge are excluded.
struct RootMaps {
    std::vector<int> viable_symbols;
    std::vector<Grid> maps; // aligned with viable_symbols
};

RootMaps pass_messages(const FeatureMap& features, const ModelParams& params,
                       const SkeletonTree& tree);

// Exact argmax configuration via backtracking. Ties: higher score, then lower
// linear cell index, then lower symbol index.
ParseResult parse(const FeatureMap& features, const ModelParams& params,
                  const SkeletonTree& tree);

// All root-map local maxima above threshold, greedily NMS-suppressed at root
// box IoU > 0.5, each backtracked to a full configuration.
std::vector<ParseResult> detect_all(const FeatureMap& features, const ModelParams& params,
                                    const SkeletonTree& tree, double threshold);

struct ScoreBreakdown {
    std::vector<double> unary;    // per part (root includes root_bias)
    std::vector<double> pairwise; // per edge index
    double total = 0.0;
};

// Recomputes every appearance and compatibility term of a configuration from
// scratch; throws Error("infeasible_configuration") on a -inf pair.
ScoreBreakdown score_decomposition(const ParseResult& result, const ModelParams& params,
                                   const SkeletonTree& tree, const FeatureMap& features);

} // namespace pose
