#include "pose/params.hpp"

#include <string>

#include "pose/distance_transform.hpp"
#include "pose/error.hpp"

namespace pose {

void ModelParams::validate(const SkeletonTree& tree) const {
    const size_t n = static_cast<size_t>(tree.num_parts());
    if (symbol_ids.size() != n || filters.size() != n)
        fail("invalid_params", "per-part symbol tables must match the tree");
    for (int p = 0; p < tree.num_parts(); ++p) {
        const PartDef& part = tree.part(p);
        const size_t want =
            static_cast<size_t>(part.box.w) * part.box.h * static_cast<size_t>(feature_dim);
        const auto& fs = filters[static_cast<size_t>(p)];
        if (fs.size() != symbol_ids[static_cast<size_t>(p)].size())
            fail("invalid_params", "filters and symbol ids disagree for part " + part.name);
        for (const auto& f : fs)
            if (f.size() != want)
                fail("invalid_params", "filter length mismatch for part " + part.name);
    }
    if (context.edges.size() != tree.edges.size())
        fail("invalid_params", "context table edge count mismatch");
    for (size_t e = 0; e < context.edges.size(); ++e) {
        const auto [pi, ci] = tree.edges[e];
        const EdgeContext& ec = context.edges[e];
        if (ec.parent_symbols != num_symbols(pi) || ec.child_symbols != num_symbols(ci))
            fail("invalid_params", "context symbol counts mismatch on edge " + std::to_string(e));
        for (size_t i = 0; i < ec.present.size(); ++i) {
            if (!ec.present[i]) continue;
            const ContextEntry& entry = ec.entries[i];
            if (!(entry.w[2] <= kMaxQuadWeight) || !(entry.w[3] <= kMaxQuadWeight))
                fail("invalid_params", "quadratic deformation weight above clamp on edge " +
                                           std::to_string(e));
        }
    }
}

ParamLayout::ParamLayout(const SkeletonTree& tree, const ModelParams& params) {
    int off = 0;
    const int n_parts = tree.num_parts();
    filter_offsets_.resize(static_cast<size_t>(n_parts));
    filter_lengths_.resize(static_cast<size_t>(n_parts));
    for (int p = 0; p < n_parts; ++p) {
        const int ns = params.num_symbols(p);
        for (int s = 0; s < ns; ++s) {
            const int len = static_cast<int>(params.filters[static_cast<size_t>(p)]
                                                            [static_cast<size_t>(s)].size());
            filter_offsets_[static_cast<size_t>(p)].push_back(off);
            filter_lengths_[static_cast<size_t>(p)].push_back(len);
            off += len;
        }
    }
    pair_offsets_.resize(tree.edges.size());
    child_syms_.resize(tree.edges.size());
    for (size_t e = 0; e < tree.edges.size(); ++e) {
        const EdgeContext& ec = params.context.edges[e];
        child_syms_[e] = ec.child_symbols;
        pair_offsets_[e].assign(ec.present.size(), -1);
        for (size_t i = 0; i < ec.present.size(); ++i) {
            if (!ec.present[i]) continue;
            pair_offsets_[e][i] = off;
            quad_indices_.push_back(off + 2);
            quad_indices_.push_back(off + 3);
            off += 5; // w0 w1 w2 w3 bias
        }
    }
    root_bias_offset_ = off;
    total_ = off + 1;
}

std::vector<double> flatten_params(const SkeletonTree& tree, const ModelParams& params) {
    const ParamLayout layout(tree, params);
    std::vector<double> theta(static_cast<size_t>(layout.total()), 0.0);
    for (int p = 0; p < tree.num_parts(); ++p) {
        for (int s = 0; s < params.num_symbols(p); ++s) {
            const auto& f = params.filters[static_cast<size_t>(p)][static_cast<size_t>(s)];
            std::copy(f.begin(), f.end(),
                      theta.begin() + layout.filter_offset(p, s));
        }
    }
    for (size_t e = 0; e < tree.edges.size(); ++e) {
        const EdgeContext& ec = params.context.edges[e];
        for (int sp = 0; sp < ec.parent_symbols; ++sp) {
            for (int sc = 0; sc < ec.child_symbols; ++sc) {
                const int off = layout.pair_offset(static_cast<int>(e), sp, sc);
                if (off < 0) continue;
                const ContextEntry& entry = ec.entries[ec.index(sp, sc)];
                for (int i = 0; i < 4; ++i) theta[static_cast<size_t>(off) + i] = entry.w[i];
                theta[static_cast<size_t>(off) + 4] = entry.bias;
            }
        }
    }
    theta[static_cast<size_t>(layout.root_bias_offset())] = params.root_bias;
    return theta;
}

void unflatten_params(const SkeletonTree& tree, const std::vector<double>& theta,
                      ModelParams& params) {
    const ParamLayout layout(tree, params);
    if (theta.size() != static_cast<size_t>(layout.total()))
        fail("invalid_params", "theta length does not match layout");
    for (int p = 0; p < tree.num_parts(); ++p) {
        for (int s = 0; s < params.num_symbols(p); ++s) {
            auto& f = params.filters[static_cast<size_t>(p)][static_cast<size_t>(s)];
            const int off = layout.filter_offset(p, s);
            std::copy(theta.begin() + off, theta.begin() + off + static_cast<int>(f.size()),
                      f.begin());
        }
    }
    for (size_t e = 0; e < tree.edges.size(); ++e) {
        EdgeContext& ec = params.context.edges[e];
        for (int sp = 0; sp < ec.parent_symbols; ++sp) {
            for (int sc = 0; sc < ec.child_symbols; ++sc) {
                const int off = layout.pair_offset(static_cast<int>(e), sp, sc);
                if (off < 0) continue;
                ContextEntry& entry = ec.entries[ec.index(sp, sc)];
                for (int i = 0; i < 4; ++i) entry.w[i] = theta[static_cast<size_t>(off) + i];
                entry.bias = theta[static_cast<size_t>(off) + 4];
            }
        }
    }
    params.root_bias = theta[static_cast<size_t>(layout.root_bias_offset())];
}

} // namespace pose
