#pragma once

// Shared helpers for the test suites: tiny random models, random feature
// maps and an independent dense-QP SVM reference solver.

#include <vector>

#include "pose/features.hpp"
#include "pose/learning.hpp"
#include "pose/params.hpp"
#include "pose/rng.hpp"
#include "pose/skeleton.hpp"

namespace test_support {

using namespace pose;

inline FeatureMap random_feature_map(Rng& rng, int w, int h, int dim, double lo = -1.0,
                                     double hi = 1.0) {
    FeatureMap fm;
    fm.cells_wide = w;
    fm.cells_high = h;
    fm.feature_dim = dim;
    fm.cell_size = 4;
    fm.data.resize(static_cast<size_t>(w) * h * dim);
    for (auto& v : fm.data) v = rng.uniform(lo, hi);
    return fm;
}

// toy tree of mid-level parts with the given box; part 0 is the root and each
// later part hangs off a random earlier one
inline SkeletonTree random_toy_tree(Rng& rng, int n_parts, BoxSize box = {1, 1}) {
    SkeletonTree t;
    for (int i = 0; i < n_parts; ++i) {
        PartDef p;
        p.part_id = i;
        p.level = PartLevel::mid;
        p.box = box;
        p.name = "part" + std::to_string(i);
        t.parts.push_back(p);
    }
    t.root_id = 0;
    for (int i = 1; i < n_parts; ++i)
        t.edges.emplace_back(rng.uniform_int(0, i - 1), i);
    t.validate();
    return t;
}

// Random params over the toy tree: 1..max_syms symbols per part, random
// filters, random finite/absent context with the (0, 0) pair always finite so
// at least one configuration is feasible.
inline ModelParams random_toy_params(Rng& rng, const SkeletonTree& tree, int max_syms,
                                     int feature_dim, double present_prob) {
    ModelParams params;
    params.cell_size = 4;
    params.feature_dim = feature_dim;
    params.symbol_ids.resize(static_cast<size_t>(tree.num_parts()));
    params.filters.resize(static_cast<size_t>(tree.num_parts()));
    for (int p = 0; p < tree.num_parts(); ++p) {
        const int ns = rng.uniform_int(1, max_syms);
        const size_t len = static_cast<size_t>(tree.part(p).box.w) * tree.part(p).box.h *
                           static_cast<size_t>(feature_dim);
        for (int s = 0; s < ns; ++s) {
            params.symbol_ids[static_cast<size_t>(p)].push_back({p, 0, s});
            std::vector<double> f(len);
            for (auto& v : f) v = rng.uniform(-1.0, 1.0);
            params.filters[static_cast<size_t>(p)].push_back(std::move(f));
        }
    }
    params.context.edges.resize(tree.edges.size());
    for (size_t e = 0; e < tree.edges.size(); ++e) {
        const auto [pi, ci] = tree.edges[e];
        EdgeContext& ec = params.context.edges[e];
        ec.resize(params.num_symbols(pi), params.num_symbols(ci));
        for (int sp = 0; sp < ec.parent_symbols; ++sp) {
            for (int sc = 0; sc < ec.child_symbols; ++sc) {
                if (!(sp == 0 && sc == 0) && rng.uniform() > present_prob) continue;
                ContextEntry& entry = ec.put(sp, sc);
                entry.w = {rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
                           rng.uniform(-2.0, -0.05), rng.uniform(-2.0, -0.05)};
                entry.bias = rng.uniform(-1.0, 1.0);
                entry.anchor = Vec2(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
            }
        }
    }
    params.root_bias = rng.uniform(-1.0, 1.0);
    return params;
}

// any feasible configuration (the all-zero symbol assignment is always
// feasible by construction), locations uniform
inline ParseConfig random_feasible_config(Rng& rng, const ModelParams& params,
                                          const SkeletonTree& tree, int w, int h) {
    ParseConfig cfg;
    const int n = tree.num_parts();
    cfg.locs.resize(static_cast<size_t>(n));
    cfg.syms.assign(static_cast<size_t>(n), 0);
    for (int p = 0; p < n; ++p)
        cfg.locs[static_cast<size_t>(p)] = {rng.uniform_int(0, w - 1), rng.uniform_int(0, h - 1)};
    for (int attempt = 0; attempt < 60; ++attempt) {
        ParseConfig trial = cfg;
        for (int p = 0; p < n; ++p)
            trial.syms[static_cast<size_t>(p)] = rng.uniform_int(0, params.num_symbols(p) - 1);
        bool ok = true;
        for (size_t e = 0; e < tree.edges.size() && ok; ++e) {
            const auto [pi, ci] = tree.edges[e];
            ok = params.context.edges[e].find(trial.syms[static_cast<size_t>(pi)],
                                              trial.syms[static_cast<size_t>(ci)]) != nullptr;
        }
        if (ok) return trial;
    }
    return cfg; // all-zeros fallback
}

// Independent reference for a single binary SVM with the augmented-bias
// convention: projected gradient ascent on the box-constrained dual with a
// safe 1/L step, run to near-exact convergence. Returns the primal objective.
inline double reference_svm_objective(const std::vector<std::vector<double>>& xs,
                                      const std::vector<int>& ys, double C) {
    const int n = static_cast<int>(xs.size());
    const size_t dim = xs[0].size();
    std::vector<std::vector<double>> q(static_cast<size_t>(n),
                                       std::vector<double>(static_cast<size_t>(n)));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double dot = 1.0; // bias coordinate
            for (size_t d = 0; d < dim; ++d) dot += xs[static_cast<size_t>(i)][d] * xs[static_cast<size_t>(j)][d];
            q[static_cast<size_t>(i)][static_cast<size_t>(j)] =
                ys[static_cast<size_t>(i)] * ys[static_cast<size_t>(j)] * dot;
        }
    }
    double lipschitz = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) row += std::abs(q[static_cast<size_t>(i)][static_cast<size_t>(j)]);
        lipschitz = std::max(lipschitz, row);
    }
    const double step = 1.0 / std::max(lipschitz, 1e-12);

    std::vector<double> alpha(static_cast<size_t>(n), 0.0);
    for (int iter = 0; iter < 200000; ++iter) {
        double move = 0.0;
        for (int i = 0; i < n; ++i) {
            double g = 1.0;
            for (int j = 0; j < n; ++j)
                g -= q[static_cast<size_t>(i)][static_cast<size_t>(j)] * alpha[static_cast<size_t>(j)];
            const double next = std::clamp(alpha[static_cast<size_t>(i)] + step * g, 0.0, C);
            move = std::max(move, std::abs(next - alpha[static_cast<size_t>(i)]));
            alpha[static_cast<size_t>(i)] = next;
        }
        if (move < 1e-14) break;
    }

    std::vector<double> w(dim, 0.0);
    double bias = 0.0;
    for (int i = 0; i < n; ++i) {
        const double ay = alpha[static_cast<size_t>(i)] * ys[static_cast<size_t>(i)];
        for (size_t d = 0; d < dim; ++d) w[d] += ay * xs[static_cast<size_t>(i)][d];
        bias += ay;
    }
    double reg = bias * bias;
    for (double v : w) reg += v * v;
    double hinge = 0.0;
    for (int i = 0; i < n; ++i) {
        double s = bias;
        for (size_t d = 0; d < dim; ++d) s += w[d] * xs[static_cast<size_t>(i)][d];
        hinge += std::max(0.0, 1.0 - ys[static_cast<size_t>(i)] * s);
    }
    return 0.5 * reg + C * hinge;
}

} // namespace test_support
