#pragma once

#include <string>
#include <vector>

#include "pose/geometry.hpp"
#include "pose/symbols.hpp"

namespace pose {

struct PartParse {
    int part_id = -1;
    Cell loc;               // feature-cell coordinates
    int symbol_index = -1;  // dense index into the part's surviving symbols
    SymbolId symbol;
    double unary_score = 0.0;    // appearance term (root includes root_bias)
    double pairwise_score = 0.0; // D term of the edge to the parent, 0 for root
};

struct ParseResult {
    std::string image_id;
    std::vector<PartParse> parts; // indexed by part_id
    double total_score = 0.0;
};

} // namespace pose
