#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "pose/geometry.hpp"
#include "pose/skeleton.hpp"

namespace pose {

// psi = [dx, dy, dx^2, dy^2] in cell units, centered at the pair anchor.
struct DeformationFeature {
    double dx = 0.0;
    double dy = 0.0;
    double dx2 = 0.0;
    double dy2 = 0.0;

    std::array<double, 4> as_array() const { return {dx, dy, dx2, dy2}; }
};

// dx = (x_j - x_i) - anchor_x (child minus parent), squares appended.
DeformationFeature deformation_feature(Vec2 loc_i, Vec2 loc_j, Vec2 anchor);

struct ContextEntry {
    std::array<double, 4> w{0.0, 0.0, -0.05, -0.05};
    double bias = 0.0;
    Vec2 anchor; // mean training offset, cell units
};

// Per-edge table over ordered (parent symbol, child symbol) pairs. A pair
// that never co-occurred in training has no entry at all: absence IS the
// -inf bias. No sentinel float ever enters arithmetic.
struct EdgeContext {
    int parent_symbols = 0;
    int child_symbols = 0;
    std::vector<std::uint8_t> present;
    std::vector<ContextEntry> entries;

    void resize(int ps, int cs) {
        parent_symbols = ps;
        child_symbols = cs;
        present.assign(static_cast<size_t>(ps) * cs, 0);
        entries.assign(static_cast<size_t>(ps) * cs, ContextEntry{});
    }
    size_t index(int sp, int sc) const { return static_cast<size_t>(sp) * child_symbols + sc; }
    const ContextEntry* find(int sp, int sc) const {
        const size_t i = index(sp, sc);
        return present[i] ? &entries[i] : nullptr;
    }
    ContextEntry& put(int sp, int sc) {
        const size_t i = index(sp, sc);
        present[i] = 1;
        return entries[i];
    }
    int finite_pairs() const {
        int n = 0;
        for (auto p : present) n += p;
        return n;
    }
};

struct ContextTable {
    std::vector<EdgeContext> edges; // aligned with SkeletonTree::edges
};

// D = w . psi + b for the pair, or nullopt when the pair is incompatible.
// Indices outside the table are an error, distinct from incompatibility.
std::optional<double> compatibility_score(const ContextTable& table, int edge_index, int s_parent,
                                          int s_child, Vec2 loc_parent, Vec2 loc_child);

// One full symbol assignment of a training image (locations on the cell grid,
// symbols as dense per-part indices).
struct TrainingParse {
    std::vector<Cell> locations;
    std::vector<int> symbols;
};

// Finite entries (bias 0, weights [0,0,-0.05,-0.05], anchor = mean offset)
// exactly for pairs co-occurring in at least min_count images.
ContextTable build_compatibility(const std::vector<TrainingParse>& parses,
                                 const SkeletonTree& tree,
                                 const std::vector<int>& symbols_per_part, int min_count = 1);

} // namespace pose
