#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <json.hpp>

#include "pose/dataset.hpp"
#include "pose/error.hpp"
#include "pose/evaluation.hpp"
#include "pose/inference.hpp"
#include "pose/model_io.hpp"
#include "pose/pipeline.hpp"
#include "pose/synthetic.hpp"
#include "pose/threads.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text_atomic(const std::string& text, const std::string& path) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) pose::fail("io_error", "cannot write " + path);
        out << text;
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) pose::fail("io_error", "rename failed for " + path + ": " + ec.message());
}

int run_train(const std::string& data, const std::string& out, pose::PipelineConfig& cfg) {
    const pose::Dataset dataset = pose::load_dataset(data, true);
    pose::TrainArtifacts artifacts = pose::train_pipeline(dataset, cfg);
    pose::save_model(artifacts.model, out);
    write_text_atomic(artifacts.symbol_report_text, out + ".symbols.txt");
    write_text_atomic(artifacts.symbol_report_csv, out + ".symbols.csv");
    write_text_atomic(artifacts.learn_report_csv, out + ".train.csv");
    std::cout << "trained on " << dataset.train.size() << " images, "
              << dataset.negatives.size() << " negatives; model written to " << out << "\n";
    return 0;
}

json part_to_json(const pose::PartParse& pp, const pose::SkeletonTree& tree, int cell_size) {
    return json{
        {"part_id", pp.part_id},
        {"name", tree.part(pp.part_id).name},
        {"loc_cell", {pp.loc.x, pp.loc.y}},
        {"loc_px", {(pp.loc.x + 0.5) * cell_size, (pp.loc.y + 0.5) * cell_size}},
        {"symbol",
         {{"geometric_type", pp.symbol.geometric_type},
          {"visual_category", pp.symbol.visual_category},
          {"index", pp.symbol_index}}},
        {"unary", pp.unary_score},
        {"pairwise", pp.pairwise_score},
    };
}

struct Rgb {
    std::uint8_t r, g, b;
};

Rgb part_color(const std::string& name) {
    if (name == "upper_body") return {255, 255, 0};                       // yellow
    if (name == "lower_body") return {255, 165, 0};                       // orange
    if (name == "head") return {255, 0, 0};                               // red
    if (name.rfind("upper_arm", 0) == 0) return {0, 255, 255};            // cyan
    if (name.rfind("lower_arm", 0) == 0) return {255, 0, 255};            // magenta
    if (name.rfind("upper_leg", 0) == 0) return {0, 255, 0};              // green
    if (name.rfind("lower_leg", 0) == 0) return {0, 0, 255};              // blue
    return {255, 255, 255};
}

void draw_box(pose::ImageBuffer& img, int x0, int y0, int x1, int y1, Rgb c, bool dashed) {
    const auto plot = [&](int x, int y) {
        if (x < 0 || x >= img.width || y < 0 || y >= img.height) return;
        if (dashed && ((x + y) % 6) >= 3) return;
        img.set(x, y, 0, c.r);
        img.set(x, y, 1, c.g);
        img.set(x, y, 2, c.b);
    };
    for (int x = x0; x <= x1; ++x) {
        plot(x, y0);
        plot(x, y1);
    }
    for (int y = y0; y <= y1; ++y) {
        plot(x0, y);
        plot(x1, y);
    }
}

void write_overlay(const pose::ImageBuffer& src, const pose::ParseResult& result,
                   const pose::SkeletonTree& tree, int cell_size, const std::string& path) {
    pose::ImageBuffer rgb(src.width, src.height, 3);
    for (int y = 0; y < src.height; ++y)
        for (int x = 0; x < src.width; ++x)
            for (int c = 0; c < 3; ++c)
                rgb.set(x, y, c, src.at(x, y, src.channels == 3 ? c : 0));
    for (const pose::PartParse& pp : result.parts) {
        const pose::PartDef& part = tree.part(pp.part_id);
        if (part.level == pose::PartLevel::joint) continue;
        const int cx = static_cast<int>((pp.loc.x + 0.5) * cell_size);
        const int cy = static_cast<int>((pp.loc.y + 0.5) * cell_size);
        const int hw = part.box.w * cell_size / 2;
        const int hh = part.box.h * cell_size / 2;
        const bool dashed = part.name.size() > 2 && part.name.ends_with("_r");
        draw_box(rgb, cx - hw, cy - hh, cx + hw, cy + hh, part_color(part.name), dashed);
    }
    pose::write_pnm(rgb, path);
}

int run_parse(const std::string& model_path, const std::string& images_dir,
              const std::string& out_path, const std::string& overlay_dir, double threshold,
              bool use_threshold) {
    const pose::Model model = pose::load_model(model_path);

    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(images_dir)) {
        const std::string ext = entry.path().extension().string();
        if (ext == ".pgm" || ext == ".ppm") files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    if (!overlay_dir.empty()) fs::create_directories(overlay_dir);

    std::ostringstream lines;
    for (const std::string& file : files) {
        const pose::ImageBuffer img = pose::read_pnm(file);
        const pose::FeatureMap fm = pose::extract_features(img, model.params.cell_size);
        const std::string id = fs::path(file).filename().string();

        std::vector<pose::ParseResult> results;
        if (use_threshold)
            results = pose::detect_all(fm, model.params, model.tree, threshold);
        else
            results.push_back(pose::parse(fm, model.params, model.tree));

        for (size_t d = 0; d < results.size(); ++d) {
            json parts = json::array();
            for (const pose::PartParse& pp : results[d].parts)
                parts.push_back(part_to_json(pp, model.tree, model.params.cell_size));
            lines << json{{"image_id", id},
                          {"detection", d},
                          {"total_score", results[d].total_score},
                          {"parts", parts}}
                         .dump()
                  << "\n";
        }
        if (!overlay_dir.empty() && !results.empty())
            write_overlay(img, results[0], model.tree, model.params.cell_size,
                          (fs::path(overlay_dir) / (id + ".overlay.ppm")).string());
    }
    write_text_atomic(lines.str(), out_path);
    std::cout << "parsed " << files.size() << " images -> " << out_path << "\n";
    return 0;
}

int run_eval(const std::string& pred_path, const std::string& truth_manifest,
             const std::string& out_csv) {
    const pose::DatasetManifest manifest = pose::load_manifest(truth_manifest);
    if (manifest.annotations_path.empty())
        pose::fail("bad_manifest", "manifest has no annotations field");
    const auto all_annotations =
        pose::load_annotations(manifest.resolve(manifest.annotations_path), manifest.joint_remap);

    // evaluate the test split when present, otherwise everything annotated
    std::vector<pose::Annotation> truth;
    if (!manifest.test.empty()) {
        std::map<std::string, pose::Annotation> by_id;
        for (const auto& a : all_annotations) by_id[a.image_id] = a;
        for (const std::string& id : manifest.test) {
            const auto it = by_id.find(id);
            if (it == by_id.end()) pose::fail("bad_manifest", "no annotation for test image " + id);
            truth.push_back(it->second);
        }
    } else {
        truth = all_annotations;
    }

    std::map<std::string, std::string> truth_id_by_basename;
    for (const auto& a : truth)
        truth_id_by_basename[fs::path(a.image_id).filename().string()] = a.image_id;

    std::ifstream in(pred_path);
    if (!in) pose::fail("io_error", "cannot open predictions: " + pred_path);
    std::vector<pose::PosePrediction> predictions;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            pose::fail("bad_predictions",
                       pred_path + " line " + std::to_string(line_no) + ": " + e.what());
        }
        if (j.value("detection", 0) != 0) continue; // keep the top detection per image
        pose::PosePrediction pred;
        pred.valid = true;
        std::string id = j.at("image_id");
        const auto it = truth_id_by_basename.find(fs::path(id).filename().string());
        pred.image_id = it != truth_id_by_basename.end() ? it->second : id;
        for (const auto& part : j.at("parts")) {
            const int part_id = part.at("part_id");
            if (part_id < pose::kJointPartBase) continue;
            const int jnt = part_id - pose::kJointPartBase;
            pred.joints[static_cast<size_t>(jnt)] =
                pose::Vec2(part.at("loc_px")[0], part.at("loc_px")[1]);
        }
        predictions.push_back(std::move(pred));
    }

    const pose::PcpReport report = pose::evaluate(predictions, truth);
    std::cout << pose::format_report_table(report);
    if (!out_csv.empty()) write_text_atomic(pose::report_to_csv(report), out_csv);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    pose::init_threads_from_env();

    CLI::App app{"visual-symbol pose parser"};
    app.require_subcommand(1);

    // train
    auto* train = app.add_subcommand("train", "learn symbols, context and parameters");
    std::string train_data, train_out;
    pose::PipelineConfig cfg;
    bool no_lsvm_init = false;
    train->add_option("--data", train_data, "dataset manifest")->required();
    train->add_option("--out", train_out, "output model file")->required();
    train->add_option("--cell", cfg.cell_size, "feature cell size in pixels");
    train->add_option("--k-large", cfg.k_large, "geometric clusters for large parts");
    train->add_option("--k-small", cfg.k_small, "geometric clusters for joint parts");
    train->add_option("--sym-large", cfg.sym_large, "visual categories per type, large parts");
    train->add_option("--sym-small", cfg.sym_small, "visual categories per type, joint parts");
    train->add_option("--cv-rounds", cfg.cv_rounds, "cross-validation rounds");
    train->add_option("--prune", cfg.prune_fraction, "pruning fraction");
    train->add_option("--c", cfg.C, "regularization weight C");
    train->add_option("--seed", cfg.seed, "random seed");
    train->add_option("--epochs", cfg.learn_epochs, "hard-negative mining epochs");
    train->add_option("--negatives-per-part", cfg.negatives_per_part,
                      "background patches per part");
    train->add_flag("--no-lsvm-init", no_lsvm_init, "start filters from zero");

    // parse
    auto* parse_cmd = app.add_subcommand("parse", "parse images with a trained model");
    std::string parse_model, parse_images, parse_out, overlay_dir;
    double threshold = 0.0;
    parse_cmd->add_option("--model", parse_model, "model file")->required();
    parse_cmd->add_option("--images", parse_images, "directory of PGM/PPM images")->required();
    parse_cmd->add_option("--out", parse_out, "output JSON-lines file")->required();
    parse_cmd->add_option("--overlay", overlay_dir, "directory for overlay images");
    auto* thr_opt = parse_cmd->add_option("--threshold", threshold,
                                          "emit all detections above this score");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "PCP evaluation of parse results");
    std::string pred_path, truth_path, eval_out;
    eval_cmd->add_option("--pred", pred_path, "predictions JSON-lines")->required();
    eval_cmd->add_option("--truth", truth_path, "truth dataset manifest")->required();
    eval_cmd->add_option("--out", eval_out, "report CSV path");

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    std::string synth_out;
    int synth_n = 40;
    pose::SynthConfig scfg;
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--n", synth_n, "number of positive images");
    synth->add_option("--seed", scfg.seed, "random seed");
    synth->add_option("--clutter", scfg.clutter, "distractor density");
    synth->add_option("--width", scfg.image_width, "image width");
    synth->add_option("--height", scfg.image_height, "image height");
    synth->add_option("--scale-min", scfg.scale_min, "min person height px");
    synth->add_option("--scale-max", scfg.scale_max, "max person height px");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) {
            cfg.init_filters_from_lsvm = !no_lsvm_init;
            return run_train(train_data, train_out, cfg);
        }
        if (*parse_cmd)
            return run_parse(parse_model, parse_images, parse_out, overlay_dir, threshold,
                             thr_opt->count() > 0);
        if (*eval_cmd) return run_eval(pred_path, truth_path, eval_out);
        if (*synth) {
            pose::write_synth_dataset(scfg, synth_n, synth_out);
            std::cout << "wrote " << synth_n << " images to " << synth_out << "\n";
            return 0;
        }
    } catch (const pose::Error& e) {
        std::cerr << "error: " << e.category() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
