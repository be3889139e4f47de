#pragma once

#include <vector>

#include "pose/context.hpp"
#include "pose/skeleton.hpp"
#include "pose/symbols.hpp"

namespace pose {

// The full parameter vector theta: appearance filters per surviving symbol,
// the context table (deformation weights + biases) and the root bias.
struct ModelParams {
    int cell_size = 4;
    int feature_dim = 31;
    std::vector<std::vector<SymbolId>> symbol_ids;          // [part][dense symbol idx]
    std::vector<std::vector<std::vector<double>>> filters;  // [part][dense symbol idx]
    ContextTable context;
    double root_bias = 0.0;

    int num_symbols(int part_id) const {
        return static_cast<int>(symbol_ids[static_cast<size_t>(part_id)].size());
    }

    // filter lengths, context shape, quadratic clamp; throws Error on breach
    void validate(const SkeletonTree& tree) const;
};

// Offsets into the flat theta vector. Layout:
//   [part 0 symbol 0 filter | part 0 symbol 1 filter | ... | part N ...]
//   [per edge, per finite (s_parent, s_child) pair: w0 w1 w2 w3 bias]
//   [root_bias]
// Pairs absent from the context table have no coordinates at all.
class ParamLayout {
public:
    ParamLayout(const SkeletonTree& tree, const ModelParams& params);

    int filter_offset(int part, int sym) const {
        return filter_offsets_[static_cast<size_t>(part)][static_cast<size_t>(sym)];
    }
    int filter_length(int part, int sym) const {
        return filter_lengths_[static_cast<size_t>(part)][static_cast<size_t>(sym)];
    }
    // -1 when the pair is incompatible; otherwise offset of w[0] (bias at +4)
    int pair_offset(int edge, int sp, int sc) const {
        return pair_offsets_[static_cast<size_t>(edge)]
                            [static_cast<size_t>(sp) * child_syms_[static_cast<size_t>(edge)] + sc];
    }
    int root_bias_offset() const { return root_bias_offset_; }
    int total() const { return total_; }
    // indices of all quadratic deformation coordinates (for the clamp)
    const std::vector<int>& quadratic_indices() const { return quad_indices_; }

private:
    std::vector<std::vector<int>> filter_offsets_;
    std::vector<std::vector<int>> filter_lengths_;
    std::vector<std::vector<int>> pair_offsets_;
    std::vector<int> child_syms_;
    std::vector<int> quad_indices_;
    int root_bias_offset_ = 0;
    int total_ = 0;
};

std::vector<double> flatten_params(const SkeletonTree& tree, const ModelParams& params);

// Writes theta back into a structurally identical params object.
void unflatten_params(const SkeletonTree& tree, const std::vector<double>& theta,
                      ModelParams& params);

} // namespace pose
