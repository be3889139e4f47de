#include "pose/inference.hpp"

#include <algorithm>
#include <limits>

#include "pose/distance_transform.hpp"
#include "pose/error.hpp"

namespace pose {

namespace {

struct EdgeMemo {
    // per parent symbol: best child symbol at each parent location
    std::vector<IndexGrid> best_child_symbol;
    // per (parent symbol, child symbol): DT argmax sources
    std::vector<std::vector<IndexGrid>> src_x;
    std::vector<std::vector<IndexGrid>> src_y;
};

struct Messages {
    std::vector<std::vector<Grid>> unary;  // [part][sym]
    std::vector<std::vector<Grid>> belief; // [part][sym], valid only for viable symbols
    std::vector<std::vector<char>> viable; // [part][sym]
    std::vector<EdgeMemo> memo;            // [edge]
    std::vector<int> edge_of_child;        // part -> incoming edge index (-1 for root)
};

Messages compute_messages(const FeatureMap& features, const ModelParams& params,
                          const SkeletonTree& tree) {
    params.validate(tree);
    const int n_parts = tree.num_parts();
    for (int p = 0; p < n_parts; ++p)
        if (params.num_symbols(p) == 0)
            fail("infeasible_model", "part " + tree.part(p).name + " has no surviving symbol");

    Messages m;
    m.unary.resize(static_cast<size_t>(n_parts));
    m.belief.resize(static_cast<size_t>(n_parts));
    m.viable.resize(static_cast<size_t>(n_parts));
    m.memo.resize(tree.edges.size());
    m.edge_of_child.assign(static_cast<size_t>(n_parts), -1);
    for (size_t e = 0; e < tree.edges.size(); ++e)
        m.edge_of_child[static_cast<size_t>(tree.edges[e].second)] = static_cast<int>(e);

    // appearance responses
    struct Job {
        int part;
        int sym;
    };
    std::vector<Job> jobs;
    for (int p = 0; p < n_parts; ++p) {
        m.unary[static_cast<size_t>(p)].resize(static_cast<size_t>(params.num_symbols(p)));
        m.viable[static_cast<size_t>(p)].assign(static_cast<size_t>(params.num_symbols(p)), 0);
        for (int s = 0; s < params.num_symbols(p); ++s) jobs.push_back({p, s});
    }
#pragma omp parallel for schedule(dynamic)
    for (size_t j = 0; j < jobs.size(); ++j) {
        const auto [p, s] = jobs[j];
        m.unary[static_cast<size_t>(p)][static_cast<size_t>(s)] = correlate_filter(
            features, params.filters[static_cast<size_t>(p)][static_cast<size_t>(s)],
            tree.part(p).box);
    }

    // leaf-to-root sweep
    auto order = tree.topological_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const int j = *it;
        const auto children = tree.children_of(j);
        const int ns = params.num_symbols(j);
        m.belief[static_cast<size_t>(j)].resize(static_cast<size_t>(ns));

        for (int s = 0; s < ns; ++s) {
            bool ok = true;
            for (int c : children) {
                const int e = m.edge_of_child[static_cast<size_t>(c)];
                const EdgeContext& ec = params.context.edges[static_cast<size_t>(e)];
                bool any = false;
                for (int sc = 0; sc < params.num_symbols(c) && !any; ++sc)
                    any = m.viable[static_cast<size_t>(c)][static_cast<size_t>(sc)] &&
                          ec.find(s, sc) != nullptr;
                if (!any) {
                    ok = false;
                    break;
                }
            }
            m.viable[static_cast<size_t>(j)][static_cast<size_t>(s)] = ok ? 1 : 0;
        }
        if (std::count(m.viable[static_cast<size_t>(j)].begin(),
                       m.viable[static_cast<size_t>(j)].end(), 1) == 0)
            fail("infeasible_model",
                 "all symbols of part " + tree.part(j).name + " are unreachable");

        for (int c : children) {
            const int e = m.edge_of_child[static_cast<size_t>(c)];
            EdgeMemo& memo = m.memo[static_cast<size_t>(e)];
            memo.best_child_symbol.resize(static_cast<size_t>(ns));
            memo.src_x.resize(static_cast<size_t>(ns));
            memo.src_y.resize(static_cast<size_t>(ns));
            for (int s = 0; s < ns; ++s) {
                memo.src_x[static_cast<size_t>(s)].resize(
                    static_cast<size_t>(params.num_symbols(c)));
                memo.src_y[static_cast<size_t>(s)].resize(
                    static_cast<size_t>(params.num_symbols(c)));
            }
        }

        for (int s = 0; s < ns; ++s) {
            if (!m.viable[static_cast<size_t>(j)][static_cast<size_t>(s)]) continue;
            Grid belief = m.unary[static_cast<size_t>(j)][static_cast<size_t>(s)];

            for (int c : children) {
                const int e = m.edge_of_child[static_cast<size_t>(c)];
                const EdgeContext& ec = params.context.edges[static_cast<size_t>(e)];
                EdgeMemo& memo = m.memo[static_cast<size_t>(e)];
                Grid msg;
                IndexGrid best_sym(features.cells_wide, features.cells_high, -1);
                bool first = true;
                for (int sc = 0; sc < params.num_symbols(c); ++sc) {
                    if (!m.viable[static_cast<size_t>(c)][static_cast<size_t>(sc)]) continue;
                    const ContextEntry* entry = ec.find(s, sc);
                    if (!entry) continue;
                    // DT output coordinate is the parent location, so flip
                    // the linear weights and the anchor (d is child-parent).
                    Dt2dResult dt = distance_transform_2d(
                        m.belief[static_cast<size_t>(c)][static_cast<size_t>(sc)],
                        {-entry->w[0], -entry->w[1], entry->w[2], entry->w[3]},
                        Vec2(-entry->anchor.x, -entry->anchor.y));
                    memo.src_x[static_cast<size_t>(s)][static_cast<size_t>(sc)] =
                        std::move(dt.src_x);
                    memo.src_y[static_cast<size_t>(s)][static_cast<size_t>(sc)] =
                        std::move(dt.src_y);
                    if (first) {
                        msg = std::move(dt.scores);
                        for (auto& val : msg.v) val += entry->bias;
                        std::fill(best_sym.v.begin(), best_sym.v.end(), sc);
                        first = false;
                    } else {
                        for (size_t i = 0; i < msg.v.size(); ++i) {
                            const double cand = dt.scores.v[i] + entry->bias;
                            if (cand > msg.v[i]) {
                                msg.v[i] = cand;
                                best_sym.v[i] = sc;
                            }
                        }
                    }
                }
                memo.best_child_symbol[static_cast<size_t>(s)] = std::move(best_sym);
                for (size_t i = 0; i < belief.v.size(); ++i) belief.v[i] += msg.v[i];
            }
            m.belief[static_cast<size_t>(j)][static_cast<size_t>(s)] = std::move(belief);
        }
    }

    // root bias enters the root maps
    const int root = tree.root_id;
    for (int s = 0; s < params.num_symbols(root); ++s) {
        if (!m.viable[static_cast<size_t>(root)][static_cast<size_t>(s)]) continue;
        for (auto& val : m.belief[static_cast<size_t>(root)][static_cast<size_t>(s)].v)
            val += params.root_bias;
    }
    return m;
}

ParseResult backtrack(const Messages& m, const ModelParams& params, const SkeletonTree& tree,
                      int root_sym, Cell root_loc, double total) {
    ParseResult result;
    result.total_score = total;
    result.parts.resize(static_cast<size_t>(tree.num_parts()));

    struct Frame {
        int part;
        int sym;
        Cell loc;
    };
    std::vector<Frame> stack{{tree.root_id, root_sym, root_loc}};
    while (!stack.empty()) {
        const Frame f = stack.back();
        stack.pop_back();

        PartParse& pp = result.parts[static_cast<size_t>(f.part)];
        pp.part_id = f.part;
        pp.loc = f.loc;
        pp.symbol_index = f.sym;
        pp.symbol = params.symbol_ids[static_cast<size_t>(f.part)][static_cast<size_t>(f.sym)];
        pp.unary_score =
            m.unary[static_cast<size_t>(f.part)][static_cast<size_t>(f.sym)].at(f.loc.x, f.loc.y);
        if (f.part == tree.root_id) pp.unary_score += params.root_bias;

        for (int c : tree.children_of(f.part)) {
            const int e = m.edge_of_child[static_cast<size_t>(c)];
            const EdgeMemo& memo = m.memo[static_cast<size_t>(e)];
            const int sc =
                memo.best_child_symbol[static_cast<size_t>(f.sym)].at(f.loc.x, f.loc.y);
            const Cell cloc{
                memo.src_x[static_cast<size_t>(f.sym)][static_cast<size_t>(sc)].at(f.loc.x,
                                                                                   f.loc.y),
                memo.src_y[static_cast<size_t>(f.sym)][static_cast<size_t>(sc)].at(f.loc.x,
                                                                                   f.loc.y)};
            const auto d = compatibility_score(
                params.context, e, f.sym, sc, Vec2(f.loc.x, f.loc.y), Vec2(cloc.x, cloc.y));
            result.parts[static_cast<size_t>(c)].pairwise_score = *d;
            stack.push_back({c, sc, cloc});
        }
    }
    return result;
}

} // namespace

RootMaps pass_messages(const FeatureMap& features, const ModelParams& params,
                       const SkeletonTree& tree) {
    Messages m = compute_messages(features, params, tree);
    RootMaps out;
    const int root = tree.root_id;
    for (int s = 0; s < params.num_symbols(root); ++s) {
        if (!m.viable[static_cast<size_t>(root)][static_cast<size_t>(s)]) continue;
        out.viable_symbols.push_back(s);
        out.maps.push_back(std::move(m.belief[static_cast<size_t>(root)][static_cast<size_t>(s)]));
    }
    return out;
}

ParseResult parse(const FeatureMap& features, const ModelParams& params,
                  const SkeletonTree& tree) {
    Messages m = compute_messages(features, params, tree);
    const int root = tree.root_id;

    double best = -std::numeric_limits<double>::infinity();
    int best_sym = -1;
    int best_idx = -1;
    for (int s = 0; s < params.num_symbols(root); ++s) {
        if (!m.viable[static_cast<size_t>(root)][static_cast<size_t>(s)]) continue;
        const Grid& g = m.belief[static_cast<size_t>(root)][static_cast<size_t>(s)];
        for (int i = 0; i < static_cast<int>(g.v.size()); ++i) {
            const double score = g.v[static_cast<size_t>(i)];
            if (score > best || (score == best && (i < best_idx || (i == best_idx && s < best_sym)))) {
                best = score;
                best_sym = s;
                best_idx = i;
            }
        }
    }
    const Cell loc{best_idx % features.cells_wide, best_idx / features.cells_wide};
    return backtrack(m, params, tree, best_sym, loc, best);
}

namespace {

double box_iou(Cell a, Cell b, BoxSize box) {
    const int ax0 = a.x - (box.w - 1) / 2;
    const int ay0 = a.y - (box.h - 1) / 2;
    const int bx0 = b.x - (box.w - 1) / 2;
    const int by0 = b.y - (box.h - 1) / 2;
    const int ix = std::max(0, std::min(ax0 + box.w, bx0 + box.w) - std::max(ax0, bx0));
    const int iy = std::max(0, std::min(ay0 + box.h, by0 + box.h) - std::max(ay0, by0));
    const double inter = static_cast<double>(ix) * iy;
    const double uni = 2.0 * box.w * box.h - inter;
    return inter / uni;
}

} // namespace

std::vector<ParseResult> detect_all(const FeatureMap& features, const ModelParams& params,
                                    const SkeletonTree& tree, double threshold) {
    Messages m = compute_messages(features, params, tree);
    const int root = tree.root_id;
    const int w = features.cells_wide;
    const int h = features.cells_high;

    // combined root map with per-cell best symbol
    Grid combined(w, h, -std::numeric_limits<double>::infinity());
    IndexGrid sym(w, h, -1);
    for (int s = 0; s < params.num_symbols(root); ++s) {
        if (!m.viable[static_cast<size_t>(root)][static_cast<size_t>(s)]) continue;
        const Grid& g = m.belief[static_cast<size_t>(root)][static_cast<size_t>(s)];
        for (int i = 0; i < static_cast<int>(g.v.size()); ++i) {
            if (g.v[static_cast<size_t>(i)] > combined.v[static_cast<size_t>(i)]) {
                combined.v[static_cast<size_t>(i)] = g.v[static_cast<size_t>(i)];
                sym.v[static_cast<size_t>(i)] = s;
            }
        }
    }

    struct Candidate {
        double score;
        int idx;
        int sym;
    };
    std::vector<Candidate> cands;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double score = combined.at(x, y);
            if (!(score > threshold)) continue;
            bool is_max = true;
            for (int dy = -1; dy <= 1 && is_max; ++dy) {
                for (int dx = -1; dx <= 1 && is_max; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const int nx = x + dx;
                    const int ny = y + dy;
                    if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                    if (combined.at(nx, ny) > score) is_max = false;
                }
            }
            if (is_max) cands.push_back({score, y * w + x, sym.at(x, y)});
        }
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.idx != b.idx) return a.idx < b.idx;
        return a.sym < b.sym;
    });

    const BoxSize root_box = tree.part(root).box;
    std::vector<Cell> kept;
    std::vector<ParseResult> out;
    for (const Candidate& c : cands) {
        const Cell loc{c.idx % w, c.idx / w};
        bool suppressed = false;
        for (const Cell& k : kept)
            if (box_iou(loc, k, root_box) > 0.5) {
                suppressed = true;
                break;
            }
        if (suppressed) continue;
        kept.push_back(loc);
        out.push_back(backtrack(m, params, tree, c.sym, loc, c.score));
    }
    return out;
}

ScoreBreakdown score_decomposition(const ParseResult& result, const ModelParams& params,
                                   const SkeletonTree& tree, const FeatureMap& features) {
    ScoreBreakdown breakdown;
    breakdown.unary.resize(static_cast<size_t>(tree.num_parts()), 0.0);
    breakdown.pairwise.resize(tree.edges.size(), 0.0);

    for (int p = 0; p < tree.num_parts(); ++p) {
        const PartParse& pp = result.parts[static_cast<size_t>(p)];
        const auto patch = crop_patch_feature(features, pp.loc, tree.part(p).box);
        const auto& filter =
            params.filters[static_cast<size_t>(p)][static_cast<size_t>(pp.symbol_index)];
        double dot = 0.0;
        for (size_t i = 0; i < patch.size(); ++i) dot += patch[i] * filter[i];
        if (p == tree.root_id) dot += params.root_bias;
        breakdown.unary[static_cast<size_t>(p)] = dot;
    }
    for (size_t e = 0; e < tree.edges.size(); ++e) {
        const auto [pi, ci] = tree.edges[e];
        const PartParse& pp = result.parts[static_cast<size_t>(pi)];
        const PartParse& pc = result.parts[static_cast<size_t>(ci)];
        const auto d = compatibility_score(params.context, static_cast<int>(e), pp.symbol_index,
                                           pc.symbol_index, Vec2(pp.loc.x, pp.loc.y),
                                           Vec2(pc.loc.x, pc.loc.y));
        if (!d)
            fail("infeasible_configuration",
                 "configuration uses an incompatible symbol pair on edge " + std::to_string(e));
        breakdown.pairwise[e] = *d;
    }
    breakdown.total = 0.0;
    for (double u : breakdown.unary) breakdown.total += u;
    for (double d : breakdown.pairwise) breakdown.total += d;
    return breakdown;
}

} // namespace pose
