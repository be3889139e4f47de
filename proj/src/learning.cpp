#include "pose/learning.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "pose/distance_transform.hpp"
#include "pose/error.hpp"
#include "pose/inference.hpp"

namespace pose {

SparseVec feature_vector(const ParseConfig& config, const FeatureMap& features,
                         const ModelParams& params, const SkeletonTree& tree) {
    const ParamLayout layout(tree, params);
    SparseVec phi;

    for (int p = 0; p < tree.num_parts(); ++p) {
        const int sym = config.syms[static_cast<size_t>(p)];
        const Cell loc = config.locs[static_cast<size_t>(p)];
        const auto patch = crop_patch_feature(features, loc, tree.part(p).box);
        const int off = layout.filter_offset(p, sym);
        for (size_t i = 0; i < patch.size(); ++i)
            if (patch[i] != 0.0) phi.items.emplace_back(off + static_cast<int>(i), patch[i]);
    }
    for (size_t e = 0; e < tree.edges.size(); ++e) {
        const auto [pi, ci] = tree.edges[e];
        const int sp = config.syms[static_cast<size_t>(pi)];
        const int sc = config.syms[static_cast<size_t>(ci)];
        const int off = layout.pair_offset(static_cast<int>(e), sp, sc);
        if (off < 0)
            fail("infeasible_configuration",
                 "configuration uses an incompatible symbol pair on edge " + std::to_string(e));
        const ContextEntry& entry =
            params.context.edges[e].entries[params.context.edges[e].index(sp, sc)];
        const Cell lp = config.locs[static_cast<size_t>(pi)];
        const Cell lc = config.locs[static_cast<size_t>(ci)];
        const DeformationFeature psi =
            deformation_feature(Vec2(lp.x, lp.y), Vec2(lc.x, lc.y), entry.anchor);
        const auto arr = psi.as_array();
        for (int i = 0; i < 4; ++i)
            if (arr[static_cast<size_t>(i)] != 0.0)
                phi.items.emplace_back(off + i, arr[static_cast<size_t>(i)]);
        phi.items.emplace_back(off + 4, 1.0); // bias slot
    }
    phi.items.emplace_back(layout.root_bias_offset(), 1.0);
    return phi;
}

double sparse_dot(const std::vector<double>& theta, const SparseVec& phi) {
    double s = 0.0;
    for (const auto& [idx, val] : phi.items) s += theta[static_cast<size_t>(idx)] * val;
    return s;
}

namespace {

struct Constraint {
    SparseVec phi;
    double norm2 = 0.0;
    int y = 1;        // +1 positive, -1 negative
    int group = 0;    // slack group (example identity)
    int example = 0;  // index within its example list
    ParseConfig config;
    double alpha = 0.0;
    int inactive_epochs = 0;
};

struct Qp {
    std::vector<Constraint> constraints;
    std::vector<double> theta;
    std::vector<double> group_alpha; // sum of alphas per group
    int n_groups = 0;

    void add(Constraint c) {
        c.norm2 = 0.0;
        for (const auto& [idx, val] : c.phi.items) c.norm2 += val * val;
        constraints.push_back(std::move(c));
    }

    bool has_config(int y, int example, const ParseConfig& config) const {
        for (const Constraint& c : constraints)
            if (c.y == y && c.example == example && c.config == config) return true;
        return false;
    }

    double primal(double C) const {
        double reg = 0.0;
        for (double v : theta) reg += v * v;
        std::vector<double> slack(static_cast<size_t>(n_groups), 0.0);
        for (const Constraint& c : constraints) {
            const double h = 1.0 - c.y * sparse_dot(theta, c.phi);
            slack[static_cast<size_t>(c.group)] =
                std::max(slack[static_cast<size_t>(c.group)], std::max(0.0, h));
        }
        double total = 0.5 * reg;
        for (double s : slack) total += C * s;
        return total;
    }

    double dual() const {
        double reg = 0.0;
        for (double v : theta) reg += v * v;
        double asum = 0.0;
        for (const Constraint& c : constraints) asum += c.alpha;
        return asum - 0.5 * reg;
    }

    void rebuild_theta(size_t dim) {
        theta.assign(dim, 0.0);
        group_alpha.assign(static_cast<size_t>(n_groups), 0.0);
        for (const Constraint& c : constraints) {
            group_alpha[static_cast<size_t>(c.group)] += c.alpha;
            if (c.alpha != 0.0)
                for (const auto& [idx, val] : c.phi.items)
                    theta[static_cast<size_t>(idx)] += c.alpha * c.y * val;
        }
    }

    // dual coordinate descent with a shared per-group budget of C
    void solve(double C, const LearnOptions& opt) {
        for (int pass = 0; pass < opt.qp_max_passes; ++pass) {
            double max_step = 0.0;
            for (Constraint& c : constraints) {
                if (c.norm2 <= 0.0) continue;
                const double g = c.y * sparse_dot(theta, c.phi) - 1.0;
                const double cap = C - (group_alpha[static_cast<size_t>(c.group)] - c.alpha);
                const double a_new =
                    std::clamp(c.alpha - g / c.norm2, 0.0, std::max(0.0, cap));
                const double delta = a_new - c.alpha;
                if (delta != 0.0) {
                    c.alpha = a_new;
                    group_alpha[static_cast<size_t>(c.group)] += delta;
                    for (const auto& [idx, val] : c.phi.items)
                        theta[static_cast<size_t>(idx)] += delta * c.y * val;
                    max_step = std::max(max_step, std::abs(delta) * std::sqrt(c.norm2));
                }
            }
            if (pass % 8 == 7 || max_step == 0.0) {
                const double p = primal(C);
                const double gap = p - dual();
                const double tol =
                    std::min(opt.qp_tol_abs, opt.qp_tol_rel * std::max(1e-8, std::abs(p)));
                if (gap <= tol) break;
            }
            if (max_step == 0.0) break;
        }
    }
};

} // namespace

ModelParams train_params(const std::vector<PositiveExample>& positives,
                         const std::vector<const FeatureMap*>& negatives,
                         const ModelParams& init, const SkeletonTree& tree,
                         const LearnOptions& opt, LearnReport* report) {
    if (positives.empty()) fail("no_feasible_positive", "no positive examples");
    init.validate(tree);

    const ParamLayout layout(tree, init);
    LearnReport local_report;
    LearnReport& rep = report ? *report : local_report;

    // positive feature vectors are fixed for the whole run
    std::vector<SparseVec> pos_phi;
    std::vector<int> pos_index; // original index of each feasible positive
    for (size_t i = 0; i < positives.size(); ++i) {
        try {
            pos_phi.push_back(
                feature_vector(positives[i].config, *positives[i].features, init, tree));
            pos_index.push_back(static_cast<int>(i));
        } catch (const Error& e) {
            if (std::string(e.category()) != "infeasible_configuration") throw;
            ++rep.infeasible_positives;
        }
    }
    if (pos_phi.empty()) fail("no_feasible_positive", "every positive is infeasible");

    Qp qp;
    qp.n_groups = static_cast<int>(pos_phi.size() + negatives.size());
    const auto neg_group = [&](int neg_idx) {
        return static_cast<int>(pos_phi.size()) + neg_idx;
    };

    ModelParams current = init; // mining model, kept projected
    std::vector<double> theta = flatten_params(tree, current);

    auto project = [&](std::vector<double>& t) {
        for (int idx : layout.quadratic_indices())
            t[static_cast<size_t>(idx)] = std::min(t[static_cast<size_t>(idx)], kMaxQuadWeight);
    };

    for (int epoch = 0; epoch < opt.max_epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        EpochStats stats;
        stats.epoch = epoch;

        // current per-group slacks under the mining model
        std::vector<double> slack(static_cast<size_t>(qp.n_groups), 0.0);
        for (const Constraint& c : qp.constraints) {
            const double h = std::max(0.0, 1.0 - c.y * sparse_dot(theta, c.phi));
            slack[static_cast<size_t>(c.group)] =
                std::max(slack[static_cast<size_t>(c.group)], h);
        }

        // (a) positives: all cached up front, re-added only if evicted and
        // violated again
        int added = 0;
        for (size_t i = 0; i < pos_phi.size(); ++i) {
            const ParseConfig& cfg = positives[static_cast<size_t>(pos_index[i])].config;
            if (qp.has_config(1, static_cast<int>(i), cfg)) continue;
            if (epoch > 0 &&
                sparse_dot(theta, pos_phi[i]) >= 1.0 - slack[i] - opt.margin_tol)
                continue;
            Constraint c;
            c.phi = pos_phi[i];
            c.y = 1;
            c.group = static_cast<int>(i);
            c.example = static_cast<int>(i);
            c.config = cfg;
            qp.add(std::move(c));
            ++added;
        }

        // (b) negatives: mine argmax configurations in parallel
        std::vector<ParseConfig> mined(negatives.size());
        std::vector<double> mined_score(negatives.size());
#pragma omp parallel for schedule(dynamic)
        for (size_t i = 0; i < negatives.size(); ++i) {
            const ParseResult pr = parse(*negatives[i], current, tree);
            ParseConfig cfg;
            cfg.locs.resize(static_cast<size_t>(tree.num_parts()));
            cfg.syms.resize(static_cast<size_t>(tree.num_parts()));
            for (const PartParse& pp : pr.parts) {
                cfg.locs[static_cast<size_t>(pp.part_id)] = pp.loc;
                cfg.syms[static_cast<size_t>(pp.part_id)] = pp.symbol_index;
            }
            mined[i] = std::move(cfg);
            mined_score[i] = pr.total_score;
        }
        for (size_t i = 0; i < negatives.size(); ++i) {
            const double xi = slack[static_cast<size_t>(neg_group(static_cast<int>(i)))];
            if (mined_score[i] <= -1.0 + xi + opt.margin_tol) continue;
            if (qp.has_config(-1, static_cast<int>(i), mined[i])) continue;
            Constraint c;
            c.phi = feature_vector(mined[i], *negatives[i], current, tree);
            c.y = -1;
            c.group = neg_group(static_cast<int>(i));
            c.example = static_cast<int>(i);
            c.config = mined[i];
            qp.add(std::move(c));
            ++added;
        }
        stats.new_violations = added;
        stats.cache_size = static_cast<int>(qp.constraints.size());

        // (c) re-solve over the cache; keep the previous point if the fresh
        // solve did not improve the primal
        qp.rebuild_theta(static_cast<size_t>(layout.total()));
        stats.objective_pre = qp.primal(opt.C);
        const std::vector<double> alpha_before = [&] {
            std::vector<double> a;
            a.reserve(qp.constraints.size());
            for (const Constraint& c : qp.constraints) a.push_back(c.alpha);
            return a;
        }();
        qp.solve(opt.C, opt);
        stats.objective_post = qp.primal(opt.C);
        if (stats.objective_post > stats.objective_pre) {
            for (size_t i = 0; i < qp.constraints.size(); ++i)
                qp.constraints[i].alpha = alpha_before[i];
            qp.rebuild_theta(static_cast<size_t>(layout.total()));
            stats.objective_post = stats.objective_pre;
        }

        // (d) projection onto the concavity clamp
        theta = qp.theta;
        project(theta);
        stats.objective_post_projection = [&] {
            std::vector<double> saved = std::move(qp.theta);
            qp.theta = theta;
            const double v = qp.primal(opt.C);
            qp.theta = std::move(saved);
            return v;
        }();
        stats.projection_increased =
            stats.objective_post_projection > stats.objective_post + 1e-6;
        unflatten_params(tree, theta, current);

        // eviction of constraints inactive for evict_after consecutive epochs
        int evicted = 0;
        for (auto it = qp.constraints.begin(); it != qp.constraints.end();) {
            const double margin = it->y * sparse_dot(theta, it->phi);
            if (it->alpha == 0.0 && margin > 1.1)
                ++it->inactive_epochs;
            else
                it->inactive_epochs = 0;
            if (it->inactive_epochs >= opt.evict_after) {
                it = qp.constraints.erase(it);
                ++evicted;
            } else {
                ++it;
            }
        }
        stats.evicted = evicted;

        stats.wall_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
        rep.epochs.push_back(stats);
        if (added == 0) break;
    }

    // margin audit with the final (projected) parameters
    {
        std::vector<double> slack(static_cast<size_t>(qp.n_groups), 0.0);
        for (const Constraint& c : qp.constraints) {
            const double h = std::max(0.0, 1.0 - c.y * sparse_dot(theta, c.phi));
            slack[static_cast<size_t>(c.group)] =
                std::max(slack[static_cast<size_t>(c.group)], h);
        }
        for (size_t i = 0; i < pos_phi.size(); ++i) {
            const double v = (1.0 - slack[i]) - sparse_dot(theta, pos_phi[i]);
            rep.worst_positive_violation = std::max(rep.worst_positive_violation, v);
        }
        for (const Constraint& c : qp.constraints) {
            if (c.y != -1) continue;
            const double v = sparse_dot(theta, c.phi) -
                             (-1.0 + slack[static_cast<size_t>(c.group)]);
            rep.worst_negative_violation = std::max(rep.worst_negative_violation, v);
        }
        rep.final_objective = rep.epochs.empty() ? 0.0 : rep.epochs.back().objective_post_projection;
    }
    return current;
}

} // namespace pose
