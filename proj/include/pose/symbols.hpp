#pragma once

#include <vector>

namespace pose {

// Identity of a visual symbol: which part it belongs to, which geometric
// cluster it came from and which visual category inside that cluster.
struct SymbolId {
    int part_id = -1;
    int geometric_type = 0;
    int visual_category = 0;

    bool operator==(const SymbolId& o) const {
        return part_id == o.part_id && geometric_type == o.geometric_type &&
               visual_category == o.visual_category;
    }
};

struct Symbol {
    SymbolId id;
    std::vector<double> filter; // appearance weights, crop_patch_feature layout
    double svm_bias = 0.0;      // classifier bias, used for symbol assignment only
    bool survived = true;
    int detection_count = 0; // validation detections in the last pruning round
};

// All symbols learned for one part; pruned symbols stay as tombstones with
// survived=false and are never referenced by the context table or filters.
struct SymbolSet {
    int part_id = -1;
    std::vector<Symbol> symbols;

    std::vector<int> surviving_indices() const {
        std::vector<int> out;
        for (int i = 0; i < static_cast<int>(symbols.size()); ++i)
            if (symbols[static_cast<size_t>(i)].survived) out.push_back(i);
        return out;
    }
};

} // namespace pose
