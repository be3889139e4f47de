#include "pose/reference.hpp"

#include <limits>

#include "pose/error.hpp"

namespace pose::ref {

Grid correlate_reference(const FeatureMap& map, const std::vector<double>& filter, BoxSize box) {
    Grid out(map.cells_wide, map.cells_high, 0.0);
    const int ox = (box.w - 1) / 2;
    const int oy = (box.h - 1) / 2;
    for (int y = 0; y < map.cells_high; ++y) {
        for (int x = 0; x < map.cells_wide; ++x) {
            double acc = 0.0;
            for (int by = 0; by < box.h; ++by) {
                for (int bx = 0; bx < box.w; ++bx) {
                    const int cx = x + bx - ox;
                    const int cy = y + by - oy;
                    if (cx < 0 || cx >= map.cells_wide || cy < 0 || cy >= map.cells_high)
                        continue;
                    const double* cell = map.cell(cx, cy);
                    const double* f =
                        &filter[(static_cast<size_t>(by) * box.w + bx) * map.feature_dim];
                    for (int d = 0; d < map.feature_dim; ++d) acc += f[d] * cell[d];
                }
            }
            out.at(x, y) = acc;
        }
    }
    return out;
}

Dt1dResult dt1d_reference(std::span<const double> f, double w_lin, double w_quad, double anchor) {
    const int n = static_cast<int>(f.size());
    Dt1dResult r;
    r.scores.assign(static_cast<size_t>(n), -std::numeric_limits<double>::infinity());
    r.sources.assign(static_cast<size_t>(n), -1);
    for (int x = 0; x < n; ++x) {
        for (int src = 0; src < n; ++src) {
            const double d = static_cast<double>(x) - src - anchor;
            const double v = f[static_cast<size_t>(src)] + w_lin * d + w_quad * d * d;
            if (v > r.scores[static_cast<size_t>(x)]) {
                r.scores[static_cast<size_t>(x)] = v;
                r.sources[static_cast<size_t>(x)] = src;
            }
        }
    }
    return r;
}

Dt2dResult dt2d_reference(const Grid& f, const std::array<double, 4>& w, Vec2 anchor) {
    Dt2dResult r;
    r.scores = Grid(f.w, f.h, -std::numeric_limits<double>::infinity());
    r.src_x = IndexGrid(f.w, f.h, -1);
    r.src_y = IndexGrid(f.w, f.h, -1);
    for (int y = 0; y < f.h; ++y) {
        for (int x = 0; x < f.w; ++x) {
            for (int sy = 0; sy < f.h; ++sy) {
                for (int sx = 0; sx < f.w; ++sx) {
                    const double dx = static_cast<double>(x) - sx - anchor.x;
                    const double dy = static_cast<double>(y) - sy - anchor.y;
                    const double v =
                        f.at(sx, sy) + w[0] * dx + w[1] * dy + w[2] * dx * dx + w[3] * dy * dy;
                    if (v > r.scores.at(x, y)) {
                        r.scores.at(x, y) = v;
                        r.src_x.at(x, y) = sx;
                        r.src_y.at(x, y) = sy;
                    }
                }
            }
        }
    }
    return r;
}

double exhaustive_best_score(const FeatureMap& features, const ModelParams& params,
                             const SkeletonTree& tree) {
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    const int n_parts = tree.num_parts();

    std::vector<std::vector<Grid>> best(static_cast<size_t>(n_parts));
    std::vector<std::vector<char>> feasible(static_cast<size_t>(n_parts));

    auto order = tree.topological_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const int p = *it;
        const int ns = params.num_symbols(p);
        best[static_cast<size_t>(p)].resize(static_cast<size_t>(ns));
        feasible[static_cast<size_t>(p)].assign(static_cast<size_t>(ns), 1);

        for (int s = 0; s < ns; ++s) {
            Grid table = correlate_reference(
                features, params.filters[static_cast<size_t>(p)][static_cast<size_t>(s)],
                tree.part(p).box);

            for (int c : tree.children_of(p)) {
                int edge = -1;
                for (size_t e = 0; e < tree.edges.size(); ++e)
                    if (tree.edges[e].first == p && tree.edges[e].second == c)
                        edge = static_cast<int>(e);
                const EdgeContext& ec = params.context.edges[static_cast<size_t>(edge)];

                bool child_possible = false;
                Grid msg(features.cells_wide, features.cells_high, kNegInf);
                for (int sc = 0; sc < params.num_symbols(c); ++sc) {
                    if (!feasible[static_cast<size_t>(c)][static_cast<size_t>(sc)]) continue;
                    const ContextEntry* entry = ec.find(s, sc);
                    if (!entry) continue;
                    child_possible = true;
                    const Grid& cb = best[static_cast<size_t>(c)][static_cast<size_t>(sc)];
                    for (int py = 0; py < msg.h; ++py) {
                        for (int px = 0; px < msg.w; ++px) {
                            for (int cy = 0; cy < msg.h; ++cy) {
                                for (int cx = 0; cx < msg.w; ++cx) {
                                    const double dx = (cx - px) - entry->anchor.x;
                                    const double dy = (cy - py) - entry->anchor.y;
                                    const double v = cb.at(cx, cy) + entry->w[0] * dx +
                                                     entry->w[1] * dy + entry->w[2] * dx * dx +
                                                     entry->w[3] * dy * dy + entry->bias;
                                    if (v > msg.at(px, py)) msg.at(px, py) = v;
                                }
                            }
                        }
                    }
                }
                if (!child_possible) {
                    feasible[static_cast<size_t>(p)][static_cast<size_t>(s)] = 0;
                    break;
                }
                for (size_t i = 0; i < table.v.size(); ++i) table.v[i] += msg.v[i];
            }
            best[static_cast<size_t>(p)][static_cast<size_t>(s)] = std::move(table);
        }
    }

    double top = kNegInf;
    const int root = tree.root_id;
    for (int s = 0; s < params.num_symbols(root); ++s) {
        if (!feasible[static_cast<size_t>(root)][static_cast<size_t>(s)]) continue;
        for (double v : best[static_cast<size_t>(root)][static_cast<size_t>(s)].v)
            top = std::max(top, v + params.root_bias);
    }
    if (top == kNegInf) fail("infeasible_model", "no feasible configuration");
    return top;
}

} // namespace pose::ref
