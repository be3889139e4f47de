#include "pose/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pose/error.hpp"
#include "pose/kmeans.hpp"
#include "pose/lsvm.hpp"
#include "pose/rng.hpp"

namespace pose {

namespace {

Cell to_cell(Vec2 px, int cell_size, int cw, int ch) {
    return {std::clamp(static_cast<int>(std::floor(px.x / cell_size)), 0, cw - 1),
            std::clamp(static_cast<int>(std::floor(px.y / cell_size)), 0, ch - 1)};
}

int config_k(const PipelineConfig& cfg, PartLevel level) {
    return level == PartLevel::joint ? cfg.k_small : cfg.k_large;
}

int config_sym(const PipelineConfig& cfg, PartLevel level) {
    return level == PartLevel::joint ? cfg.sym_small : cfg.sym_large;
}

} // namespace

TrainArtifacts train_pipeline(const Dataset& dataset, const PipelineConfig& cfg) {
    if (dataset.train.empty()) fail("insufficient_samples", "empty training split");
    if (dataset.negatives.empty())
        fail("insufficient_samples", "training needs at least one negative image");

    const SkeletonTree tree = default_skeleton();
    const int n_parts = tree.num_parts();
    const int n_imgs = static_cast<int>(dataset.train.size());

    // features and part instances per training image
    std::vector<FeatureMap> maps(static_cast<size_t>(n_imgs));
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n_imgs; ++i)
        maps[static_cast<size_t>(i)] =
            extract_features(dataset.train[static_cast<size_t>(i)].image, cfg.cell_size);

    std::vector<FeatureMap> neg_maps(dataset.negatives.size());
#pragma omp parallel for schedule(dynamic)
    for (size_t i = 0; i < dataset.negatives.size(); ++i)
        neg_maps[i] = extract_features(dataset.negatives[i], cfg.cell_size);

    std::vector<std::vector<std::optional<Vec2>>> locs_px(static_cast<size_t>(n_imgs));
    for (int i = 0; i < n_imgs; ++i)
        locs_px[static_cast<size_t>(i)] =
            derive_part_instances(dataset.train[static_cast<size_t>(i)].ann, tree);

    // geometric types per (part, image): -1 when undefined
    std::vector<std::vector<int>> geo_type(static_cast<size_t>(n_parts),
                                           std::vector<int>(static_cast<size_t>(n_imgs), -1));
    std::vector<int> geo_k(static_cast<size_t>(n_parts), 1);
    for (int p = 0; p < n_parts; ++p) {
        const int parent = tree.parent_of(p);
        if (parent < 0) {
            for (int i = 0; i < n_imgs; ++i)
                if (locs_px[static_cast<size_t>(i)][static_cast<size_t>(p)])
                    geo_type[static_cast<size_t>(p)][static_cast<size_t>(i)] = 0;
            geo_k[static_cast<size_t>(p)] = 1;
            continue;
        }
        std::vector<Vec2> offsets;
        std::vector<int> images;
        for (int i = 0; i < n_imgs; ++i) {
            const auto& pl = locs_px[static_cast<size_t>(i)][static_cast<size_t>(parent)];
            const auto& cl = locs_px[static_cast<size_t>(i)][static_cast<size_t>(p)];
            if (!pl || !cl) continue;
            offsets.push_back(*cl - *pl);
            images.push_back(i);
        }
        if (offsets.empty())
            fail("insufficient_samples", "part " + tree.part(p).name + " has no instances");
        const int k = std::clamp(config_k(cfg, tree.part(p).level), 1,
                                 static_cast<int>(offsets.size()));
        geo_k[static_cast<size_t>(p)] = k;
        GeometricGrouping g = geometric_cluster(
            offsets, k, cfg.seed ^ (0x100000001b3ULL * static_cast<std::uint64_t>(p + 1)));
        for (size_t s = 0; s < images.size(); ++s)
            geo_type[static_cast<size_t>(p)][static_cast<size_t>(images[s])] = g.assignments[s];
    }

    // positive patches per (part, image)
    std::vector<std::vector<std::vector<double>>> patches(static_cast<size_t>(n_parts));
    for (int p = 0; p < n_parts; ++p) {
        patches[static_cast<size_t>(p)].resize(static_cast<size_t>(n_imgs));
        for (int i = 0; i < n_imgs; ++i) {
            const auto& loc = locs_px[static_cast<size_t>(i)][static_cast<size_t>(p)];
            if (!loc) continue;
            const FeatureMap& fm = maps[static_cast<size_t>(i)];
            patches[static_cast<size_t>(p)][static_cast<size_t>(i)] = crop_patch_feature(
                fm, to_cell(*loc, cfg.cell_size, fm.cells_wide, fm.cells_high),
                tree.part(p).box);
        }
    }

    // symbol learning per part
    std::vector<SymbolSet> symbol_sets(static_cast<size_t>(n_parts));
    std::ostringstream report_text;
    std::ostringstream report_csv;
    report_csv << "part,geometric_type,slot,survived,detections\n";

    for (int p = 0; p < n_parts; ++p) {
        const PartDef& part = tree.part(p);
        SymbolSet& set = symbol_sets[static_cast<size_t>(p)];
        set.part_id = p;

        // background patches for this part's box size
        Rng neg_rng(cfg.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(p + 101)));
        std::vector<std::vector<double>> neg_patches;
        neg_patches.reserve(static_cast<size_t>(cfg.negatives_per_part));
        for (int i = 0; i < cfg.negatives_per_part; ++i) {
            const FeatureMap& fm = neg_maps[neg_rng.below(neg_maps.size())];
            const Cell c{static_cast<int>(neg_rng.below(static_cast<std::uint64_t>(fm.cells_wide))),
                         static_cast<int>(neg_rng.below(static_cast<std::uint64_t>(fm.cells_high)))};
            neg_patches.push_back(crop_patch_feature(fm, c, part.box));
        }
        std::vector<std::span<const double>> neg_views;
        neg_views.reserve(neg_patches.size());
        for (const auto& v : neg_patches) neg_views.emplace_back(v);

        report_text << "part " << part.name << " (k=" << geo_k[static_cast<size_t>(p)] << ")\n";

        for (int g = 0; g < geo_k[static_cast<size_t>(p)]; ++g) {
            std::vector<std::span<const double>> pos_views;
            for (int i = 0; i < n_imgs; ++i)
                if (geo_type[static_cast<size_t>(p)][static_cast<size_t>(i)] == g)
                    pos_views.emplace_back(patches[static_cast<size_t>(p)][static_cast<size_t>(i)]);
            if (pos_views.empty()) continue;

            const int want_k = config_sym(cfg, part.level);
            const int max_k = std::max(1, static_cast<int>(pos_views.size()) / 2);
            const int K = std::clamp(want_k, 1, max_k);
            const std::uint64_t seed =
                cfg.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(p * 64 + g + 1));

            if (static_cast<int>(pos_views.size()) >= 2 * K &&
                static_cast<int>(pos_views.size()) >= 2) {
                CrossValReport cv_report;
                CategorySet cats = cross_validate(pos_views, neg_views, K, cfg.cv_rounds,
                                                  cfg.prune_fraction, cfg.C, seed, &cv_report);
                report_text << "  type " << g << ": n=" << pos_views.size() << " K_in=" << K;
                for (const auto& round : cv_report.rounds)
                    report_text << " [K " << round.k_before << "->" << round.k_after
                                << " obj " << round.objective << "]";
                report_text << "\n";

                for (size_t k = 0; k < cats.filters.size(); ++k) {
                    Symbol sym;
                    sym.id = {p, g, cats.slots[k]};
                    sym.filter = cats.filters[k];
                    sym.svm_bias = cats.biases[k];
                    sym.survived = true;
                    sym.detection_count = cats.detection_counts[k];
                    set.symbols.push_back(std::move(sym));
                }
                // tombstones for pruned slots
                for (const auto& round : cv_report.rounds) {
                    for (int slot : round.removed_slots) {
                        Symbol sym;
                        sym.id = {p, g, slot};
                        sym.survived = false;
                        sym.detection_count = 0;
                        set.symbols.push_back(std::move(sym));
                    }
                }
            } else {
                // too few samples to split: single Eq.1 category, kept as-is
                LatentCategorization cat = lsvm_categorize(pos_views, neg_views, 1, cfg.C, seed);
                Symbol sym;
                sym.id = {p, g, 0};
                sym.filter = cat.filters[0];
                sym.svm_bias = cat.biases[0];
                sym.survived = true;
                sym.detection_count = static_cast<int>(pos_views.size());
                set.symbols.push_back(std::move(sym));
                report_text << "  type " << g << ": n=" << pos_views.size()
                            << " single category (no cross-validation)\n";
            }
        }
        if (set.surviving_indices().empty())
            fail("degenerate_symbol_set", "part " + part.name + " kept no symbols");

        for (const Symbol& s : set.symbols)
            report_csv << part.name << "," << s.id.geometric_type << "," << s.id.visual_category
                       << "," << (s.survived ? 1 : 0) << "," << s.detection_count << "\n";
    }

    // dense per-part symbol tables
    ModelParams init;
    init.cell_size = cfg.cell_size;
    init.feature_dim = kHogDim;
    init.symbol_ids.resize(static_cast<size_t>(n_parts));
    init.filters.resize(static_cast<size_t>(n_parts));
    for (int p = 0; p < n_parts; ++p) {
        const size_t filter_len = static_cast<size_t>(tree.part(p).box.w) * tree.part(p).box.h *
                                  static_cast<size_t>(kHogDim);
        for (int idx : symbol_sets[static_cast<size_t>(p)].surviving_indices()) {
            const Symbol& s = symbol_sets[static_cast<size_t>(p)].symbols[static_cast<size_t>(idx)];
            init.symbol_ids[static_cast<size_t>(p)].push_back(s.id);
            init.filters[static_cast<size_t>(p)].push_back(
                cfg.init_filters_from_lsvm ? s.filter : std::vector<double>(filter_len, 0.0));
        }
    }

    // argmax symbol assignment for every (image, part) instance
    const auto assign_symbol = [&](int p, const std::vector<double>& patch) {
        const SymbolSet& set = symbol_sets[static_cast<size_t>(p)];
        int dense = 0;
        int best = -1;
        double best_score = -std::numeric_limits<double>::infinity();
        for (int idx : set.surviving_indices()) {
            const Symbol& s = set.symbols[static_cast<size_t>(idx)];
            double score = s.svm_bias;
            for (size_t i = 0; i < patch.size(); ++i) score += s.filter[i] * patch[i];
            if (score > best_score) {
                best_score = score;
                best = dense;
            }
            ++dense;
        }
        return best;
    };

    std::vector<TrainingParse> full_parses;
    std::vector<int> full_images;
    for (int i = 0; i < n_imgs; ++i) {
        TrainingParse tp;
        tp.locations.resize(static_cast<size_t>(n_parts));
        tp.symbols.resize(static_cast<size_t>(n_parts));
        bool full = true;
        for (int p = 0; p < n_parts; ++p) {
            const auto& loc = locs_px[static_cast<size_t>(i)][static_cast<size_t>(p)];
            if (!loc) {
                full = false;
                break;
            }
            const FeatureMap& fm = maps[static_cast<size_t>(i)];
            tp.locations[static_cast<size_t>(p)] =
                to_cell(*loc, cfg.cell_size, fm.cells_wide, fm.cells_high);
            tp.symbols[static_cast<size_t>(p)] =
                assign_symbol(p, patches[static_cast<size_t>(p)][static_cast<size_t>(i)]);
        }
        if (full) {
            full_parses.push_back(std::move(tp));
            full_images.push_back(i);
        }
    }
    if (full_parses.empty())
        fail("insufficient_samples", "no training image has all parts present");

    std::vector<int> symbols_per_part(static_cast<size_t>(n_parts));
    for (int p = 0; p < n_parts; ++p) symbols_per_part[static_cast<size_t>(p)] = init.num_symbols(p);
    init.context =
        build_compatibility(full_parses, tree, symbols_per_part, cfg.min_cooccurrence);
    init.root_bias = 0.0;
    init.validate(tree);

    // Eq.7 joint training with hard-negative mining
    std::vector<PositiveExample> positives;
    for (size_t f = 0; f < full_parses.size(); ++f) {
        PositiveExample ex;
        ex.features = &maps[static_cast<size_t>(full_images[f])];
        ex.config.locs = full_parses[f].locations;
        ex.config.syms = full_parses[f].symbols;
        positives.push_back(std::move(ex));
    }
    std::vector<const FeatureMap*> negatives;
    for (const FeatureMap& fm : neg_maps) negatives.push_back(&fm);

    LearnOptions lopt;
    lopt.C = cfg.C;
    lopt.max_epochs = cfg.learn_epochs;

    TrainArtifacts artifacts;
    artifacts.model.tree = tree;
    artifacts.model.symbols = std::move(symbol_sets);
    artifacts.model.params =
        train_params(positives, negatives, init, tree, lopt, &artifacts.learn_report);

    std::ostringstream learn_csv;
    learn_csv << "epoch,cache_size,new_violations,objective_pre,objective_post,"
                 "objective_post_projection,projection_increased,evicted,wall_ms\n";
    for (const EpochStats& s : artifacts.learn_report.epochs)
        learn_csv << s.epoch << "," << s.cache_size << "," << s.new_violations << ","
                  << s.objective_pre << "," << s.objective_post << ","
                  << s.objective_post_projection << "," << (s.projection_increased ? 1 : 0) << ","
                  << s.evicted << "," << s.wall_ms << "\n";

    artifacts.symbol_report_text = report_text.str();
    artifacts.symbol_report_csv = report_csv.str();
    artifacts.learn_report_csv = learn_csv.str();
    return artifacts;
}

} // namespace pose
