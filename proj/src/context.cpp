#include "pose/context.hpp"

#include <string>

#include "pose/error.hpp"

namespace pose {

DeformationFeature deformation_feature(Vec2 loc_i, Vec2 loc_j, Vec2 anchor) {
    DeformationFeature psi;
    psi.dx = (loc_j.x - loc_i.x) - anchor.x;
    psi.dy = (loc_j.y - loc_i.y) - anchor.y;
    psi.dx2 = psi.dx * psi.dx;
    psi.dy2 = psi.dy * psi.dy;
    return psi;
}

std::optional<double> compatibility_score(const ContextTable& table, int edge_index, int s_parent,
                                          int s_child, Vec2 loc_parent, Vec2 loc_child) {
    if (edge_index < 0 || edge_index >= static_cast<int>(table.edges.size()))
        fail("unknown_symbol_pair", "edge index out of range");
    const EdgeContext& ec = table.edges[static_cast<size_t>(edge_index)];
    if (s_parent < 0 || s_parent >= ec.parent_symbols || s_child < 0 ||
        s_child >= ec.child_symbols)
        fail("unknown_symbol_pair", "symbol index out of range for edge");
    const ContextEntry* e = ec.find(s_parent, s_child);
    if (!e) return std::nullopt;
    const DeformationFeature psi = deformation_feature(loc_parent, loc_child, e->anchor);
    return e->w[0] * psi.dx + e->w[1] * psi.dy + e->w[2] * psi.dx2 + e->w[3] * psi.dy2 + e->bias;
}

ContextTable build_compatibility(const std::vector<TrainingParse>& parses,
                                 const SkeletonTree& tree,
                                 const std::vector<int>& symbols_per_part, int min_count) {
    const int n_edges = static_cast<int>(tree.edges.size());
    for (const TrainingParse& p : parses) {
        if (static_cast<int>(p.locations.size()) != tree.num_parts() ||
            static_cast<int>(p.symbols.size()) != tree.num_parts())
            fail("bad_arguments", "training parse must assign every part");
    }

    ContextTable table;
    table.edges.resize(static_cast<size_t>(n_edges));
    for (int e = 0; e < n_edges; ++e) {
        const auto [pi, ci] = tree.edges[static_cast<size_t>(e)];
        EdgeContext& ec = table.edges[static_cast<size_t>(e)];
        ec.resize(symbols_per_part[static_cast<size_t>(pi)],
                  symbols_per_part[static_cast<size_t>(ci)]);

        std::vector<int> count(ec.present.size(), 0);
        std::vector<Vec2> offset_sum(ec.present.size());
        for (const TrainingParse& p : parses) {
            const int sp = p.symbols[static_cast<size_t>(pi)];
            const int sc = p.symbols[static_cast<size_t>(ci)];
            const size_t idx = ec.index(sp, sc);
            count[idx] += 1;
            const Cell lp = p.locations[static_cast<size_t>(pi)];
            const Cell lc = p.locations[static_cast<size_t>(ci)];
            offset_sum[idx] += Vec2(lc.x - lp.x, lc.y - lp.y);
        }

        int finite = 0;
        for (size_t idx = 0; idx < count.size(); ++idx) {
            if (count[idx] >= min_count && count[idx] > 0) {
                ContextEntry& entry =
                    ec.put(static_cast<int>(idx) / ec.child_symbols,
                           static_cast<int>(idx) % ec.child_symbols);
                entry.anchor = offset_sum[idx] * (1.0 / count[idx]);
                ++finite;
            }
        }
        if (finite == 0)
            fail("disconnected_context",
                 "edge " + tree.part(pi).name + "->" + tree.part(ci).name +
                     " has no co-occurring symbol pair");
    }
    return table;
}

} // namespace pose
